"""Floating-point set geometry for filter state ranges.

Intervals, axis-aligned boxes, convex polygons in vertex form and
halfspace polytopes in two or three dimensions. Every polygon-producing
operation returns a normalized polygon: counter-clockwise, collinear
vertices removed, starting at the lexicographically smallest vertex.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

TOL = 1e-9


class GeometryError(ValueError):
    pass


class UnboundedPolytope(GeometryError):
    pass


# --------------------------------------------------------------------------
# Interval and Box
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]. ``Interval.EMPTY`` is the empty set."""

    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not (math.isnan(self.lo) and math.isnan(self.hi)) and self.lo > self.hi:
            raise GeometryError(f"interval with lo > hi: [{self.lo}, {self.hi}]")

    @property
    def is_empty(self) -> bool:
        return math.isnan(self.lo)

    @property
    def diameter(self) -> float:
        return 0.0 if self.is_empty else self.hi - self.lo

    def intersect(self, other: "Interval") -> "Interval":
        if self.is_empty or other.is_empty:
            return EMPTY_INTERVAL
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else EMPTY_INTERVAL

    def hull(self, other: "Interval") -> "Interval":
        if self.is_empty:
            return other
        if other.is_empty:
            return self
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def contains(self, other: "Interval | float", tol: float = TOL) -> bool:
        if isinstance(other, Interval):
            if other.is_empty:
                return True
            if self.is_empty:
                return False
            return self.lo - tol <= other.lo and other.hi <= self.hi + tol
        if self.is_empty:
            return False
        return self.lo - tol <= other <= self.hi + tol

    def __add__(self, other: "Interval") -> "Interval":
        if self.is_empty or other.is_empty:
            return EMPTY_INTERVAL
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def scale(self, c: float) -> "Interval":
        if self.is_empty:
            return EMPTY_INTERVAL
        a, b = c * self.lo, c * self.hi
        return Interval(min(a, b), max(a, b))

    def to_json(self) -> dict:
        if self.is_empty:
            return {"dim": 1, "vertices": []}
        return {"dim": 1, "vertices": [[self.lo], [self.hi]]}


EMPTY_INTERVAL = Interval(math.nan, math.nan)
Interval.EMPTY = EMPTY_INTERVAL  # type: ignore[attr-defined]


@dataclass(frozen=True)
class Box:
    axes: tuple[Interval, ...]

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 3:
            raise GeometryError("box dimension must be 1, 2 or 3")

    @classmethod
    def from_bounds(cls, bounds: Sequence[tuple[float, float]]) -> "Box":
        return cls(tuple(Interval(float(lo), float(hi)) for lo, hi in bounds))

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def is_empty(self) -> bool:
        return any(a.is_empty for a in self.axes)

    def vertices(self) -> np.ndarray:
        if self.is_empty:
            return np.empty((0, self.dim))
        return np.array(list(itertools.product(*[(a.lo, a.hi) for a in self.axes])), dtype=float)

    def to_polygon(self) -> "Polygon":
        if self.dim != 2:
            raise GeometryError("only 2D boxes convert to polygons")
        return Polygon.hull(self.vertices())

    def to_polytope(self) -> "PolytopeH":
        eye = np.eye(self.dim)
        A = np.vstack([eye, -eye])
        b = np.array([a.hi for a in self.axes] + [-a.lo for a in self.axes])
        return PolytopeH(A, b)


# --------------------------------------------------------------------------
# Convex polygons
# --------------------------------------------------------------------------


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points: np.ndarray, tol: float = TOL) -> np.ndarray:
    """Monotone-chain hull; returns CCW vertices starting at the lexicographic minimum.

    Points closer than ``tol`` are merged and vertices whose turn is within
    ``tol`` of straight are dropped, so degenerate inputs give 1 or 2 vertices.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return np.empty((0, 2))
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    uniq = [pts[0]]
    for p in pts[1:]:
        if abs(p[0] - uniq[-1][0]) > tol or abs(p[1] - uniq[-1][1]) > tol:
            uniq.append(p)
    if len(uniq) <= 2:
        if len(uniq) == 2 and math.dist(uniq[0], uniq[1]) <= tol:
            uniq = uniq[:1]
        return np.array(uniq)

    def chain(seq):
        out: list = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 0.0:
                out.pop()
            out.append(p)
        return out

    lower = chain(uniq)
    upper = chain(reversed(uniq))
    hull = _drop_collinear(lower[:-1] + upper[:-1], tol)
    if len(hull) < 3:
        # all points collinear: keep the two extremes
        return np.array([uniq[0], uniq[-1]])
    start = min(range(len(hull)), key=lambda i: (hull[i][0], hull[i][1]))
    return np.array(hull[start:] + hull[:start])


def _drop_collinear(hull: list, tol: float) -> list:
    """Remove vertices lying within tol of the segment joining their neighbours."""
    changed = True
    while changed and len(hull) >= 3:
        changed = False
        for i in range(len(hull)):
            o, a, b = hull[i - 1], hull[i], hull[(i + 1) % len(hull)]
            base = math.dist(o, b)
            if base == 0.0 or abs(_cross(o, a, b)) <= tol * base:
                del hull[i]
                changed = True
                break
    return hull


def _normalize(vertices: np.ndarray, tol: float = TOL) -> np.ndarray:
    return convex_hull_2d(vertices, tol)


class Polygon:
    """Convex polygon in vertex form (CCW). Zero vertices is EMPTY.

    One or two vertices are legal degenerate polygons with zero area.
    """

    __slots__ = ("vertices",)

    def __init__(self, vertices: np.ndarray | Sequence[Sequence[float]], *, normalized: bool = False):
        v = np.asarray(vertices, dtype=float).reshape(-1, 2)
        self.vertices = v if normalized else _normalize(v)
        self.vertices.setflags(write=False)

    @classmethod
    def hull(cls, points) -> "Polygon":
        return cls(points)

    @classmethod
    def empty(cls) -> "Polygon":
        return cls(np.empty((0, 2)), normalized=True)

    @property
    def is_empty(self) -> bool:
        return len(self.vertices) == 0

    def __len__(self) -> int:
        return len(self.vertices)

    def __repr__(self) -> str:
        return f"Polygon({self.vertices.tolist()})"

    def to_json(self) -> dict:
        return {"dim": 2, "vertices": [[_fmt_num(x) for x in v] for v in self.vertices]}

    @classmethod
    def from_json(cls, data: dict) -> "Polygon":
        if data.get("dim") != 2:
            raise GeometryError("polygon JSON must have dim 2")
        return cls(np.array(data["vertices"], dtype=float).reshape(-1, 2))


def is_convex_ccw(p: Polygon, tol: float = TOL) -> bool:
    v = p.vertices
    n = len(v)
    if n < 3:
        return True
    for i in range(n):
        if _cross(v[i], v[(i + 1) % n], v[(i + 2) % n]) < -tol:
            return False
    return area(p) >= 0.0


def linear_image(M, p):
    """Image of a convex set under ``z -> M z``.

    Polygons and boxes in 2D map to polygons when M is 2x2; otherwise
    (and for vertex arrays) the mapped vertex array is returned.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if isinstance(p, Box):
        verts = p.vertices()
    elif isinstance(p, Polygon):
        verts = p.vertices
    elif isinstance(p, PolytopeH):
        verts = vertex_enumerate(p)
    else:
        verts = np.asarray(p, dtype=float)
    if verts.size == 0:
        return Polygon.empty() if M.shape[0] == 2 else np.empty((0, M.shape[0]))
    if verts.shape[1] != M.shape[1]:
        raise GeometryError(f"dimension mismatch: matrix {M.shape} vs points of dim {verts.shape[1]}")
    out = verts @ M.T
    if M.shape[0] == 2:
        return Polygon(out)
    return out


def minkowski_sum(p: Polygon, s) -> Polygon:
    """Exact Minkowski sum of convex sets given by vertices (hull of pairwise sums)."""
    q = s.vertices if isinstance(s, Polygon) else np.asarray(s, dtype=float).reshape(-1, 2)
    if p.is_empty or len(q) == 0:
        return Polygon.empty()
    sums = (p.vertices[:, None, :] + q[None, :, :]).reshape(-1, 2)
    return Polygon(sums)


@dataclass(frozen=True)
class Halfspace:
    """{z : normal . z <= offset}."""

    normal: tuple[float, ...]
    offset: float

    def __post_init__(self):
        if not any(c != 0.0 for c in self.normal):
            raise GeometryError("halfspace normal must be nonzero")


def clip_halfspace(p: Polygon, h: Halfspace, tol: float = TOL) -> Polygon:
    """One Sutherland-Hodgman step: p intersected with a halfspace."""
    if p.is_empty:
        return p
    a = np.asarray(h.normal, dtype=float)
    v = p.vertices
    d = v @ a - h.offset
    scale = max(1.0, float(np.linalg.norm(a)))
    if np.all(d <= tol * scale):
        return p
    if np.all(d > tol * scale):
        return Polygon.empty()
    n = len(v)
    out = []
    for i in range(n):
        cur, nxt = v[i], v[(i + 1) % n]
        dc, dn = d[i], d[(i + 1) % n]
        if dc <= 0.0:
            out.append(cur)
        if (dc < 0.0 < dn) or (dn < 0.0 < dc):
            t = dc / (dc - dn)
            out.append(cur + t * (nxt - cur))
    if not out:
        # polygon only touches the boundary within tolerance
        out = [v[i] for i in range(n) if d[i] <= tol * scale]
    return Polygon(np.array(out))


def clip_strip(p: Polygon, normal, lo: float, hi: float) -> Polygon:
    """Intersect with {z : lo <= normal . z <= hi}."""
    a = tuple(float(c) for c in normal)
    q = clip_halfspace(p, Halfspace(a, float(hi)))
    return clip_halfspace(q, Halfspace(tuple(-c for c in a), -float(lo)))


def area(p: Polygon) -> float:
    v = p.vertices
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def diameter(p) -> float:
    if isinstance(p, Interval):
        return p.diameter
    v = p.vertices if isinstance(p, Polygon) else np.asarray(p, dtype=float)
    if len(v) < 2:
        return 0.0
    diff = v[:, None, :] - v[None, :, :]
    return float(np.sqrt((diff**2).sum(-1)).max())


def contains(p, q, tol: float = TOL) -> bool:
    """True when q is a subset of p, each vertex of q checked against p within tol."""
    if isinstance(p, Interval):
        return p.contains(q, tol)
    pts = q.vertices if isinstance(q, Polygon) else np.asarray(q, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return True
    if p.is_empty:
        return False
    return bool(np.all(_distance_outside(p, pts) <= tol))


def _distance_outside(p: Polygon, pts: np.ndarray) -> np.ndarray:
    v = p.vertices
    if len(v) == 1:
        return np.linalg.norm(pts - v[0], axis=1)
    if len(v) == 2:
        a, b = v
        ab = b - a
        t = np.clip(((pts - a) @ ab) / float(ab @ ab), 0.0, 1.0)
        return np.linalg.norm(pts - (a + t[:, None] * ab), axis=1)
    edges = np.roll(v, -1, axis=0) - v
    normals = np.column_stack([edges[:, 1], -edges[:, 0]])
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    signed = np.einsum("pij,ij->pi", pts[:, None, :] - v[None, :, :], normals)
    return np.maximum(signed.max(axis=1), 0.0)


def contains_point(p, x, tol: float = TOL) -> bool:
    if isinstance(p, Interval):
        return p.contains(float(np.asarray(x).ravel()[0]), tol)
    return contains(p, np.asarray(x, dtype=float).reshape(1, 2), tol)


def hausdorff(p: Polygon, q: Polygon, samples: int = 64) -> float:
    """Hausdorff distance between convex polygons, using boundary samples of each."""
    if p.is_empty or q.is_empty:
        return 0.0 if p.is_empty and q.is_empty else math.inf
    return max(
        float(_distance_outside(q, boundary_points(p, samples)).max()),
        float(_distance_outside(p, boundary_points(q, samples)).max()),
    )


def boundary_points(p: Polygon, per_edge: int = 64) -> np.ndarray:
    v = p.vertices
    if len(v) == 1:
        return v.copy()
    t = np.linspace(0.0, 1.0, per_edge, endpoint=False)[:, None]
    nxt = np.roll(v, -1, axis=0)
    return np.concatenate([a + t * (b - a) for a, b in zip(v, nxt)])


# --------------------------------------------------------------------------
# Halfspace polytopes
# --------------------------------------------------------------------------


class PolytopeH:
    """Intersection of halfspaces ``A z <= b`` in dimension 2 or 3."""

    __slots__ = ("A", "b")

    def __init__(self, A, b):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        if A.shape[0] != b.shape[0]:
            raise GeometryError("A and b row counts differ")
        if A.shape[1] not in (2, 3):
            raise GeometryError("polytopes must be 2D or 3D")
        if np.any(np.all(A == 0.0, axis=1)):
            raise GeometryError("halfspace normal must be nonzero")
        self.A, self.b = A, b

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def halfspaces(self) -> list[Halfspace]:
        return [Halfspace(tuple(a), float(c)) for a, c in zip(self.A, self.b)]

    @classmethod
    def from_halfspaces(cls, hs: Iterable[Halfspace]) -> "PolytopeH":
        hs = list(hs)
        return cls([h.normal for h in hs], [h.offset for h in hs])

    def add(self, normal, offset) -> "PolytopeH":
        return PolytopeH(np.vstack([self.A, np.asarray(normal, dtype=float)]), np.append(self.b, offset))

    def add_strip(self, normal, lo: float, hi: float) -> "PolytopeH":
        n = np.asarray(normal, dtype=float)
        return PolytopeH(np.vstack([self.A, n, -n]), np.concatenate([self.b, [hi, -lo]]))

    def contains_points(self, pts, tol: float = TOL) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.all(pts @ self.A.T <= self.b + tol, axis=1)

    def to_json(self) -> dict:
        return {
            "halfspaces": [
                {"normal": [_fmt_num(c) for c in a], "offset": _fmt_num(c)} for a, c in zip(self.A, self.b)
            ]
        }

    @classmethod
    def from_json(cls, data: dict) -> "PolytopeH":
        hs = data["halfspaces"]
        return cls([h["normal"] for h in hs], [h["offset"] for h in hs])


def _check_bounded(p: PolytopeH) -> bool:
    """Bounded (or empty) iff every coordinate direction has a finite LP optimum."""
    from scipy.optimize import linprog

    for i in range(p.dim):
        for sign in (1.0, -1.0):
            c = np.zeros(p.dim)
            c[i] = sign
            res = linprog(c, A_ub=p.A, b_ub=p.b, bounds=[(None, None)] * p.dim, method="highs")
            if res.status == 2:
                return True  # infeasible -> empty, trivially bounded
            if res.status == 3:
                return False
    return True


def vertex_enumerate(p: PolytopeH, tol: float = TOL, check_bounded: bool = True) -> np.ndarray:
    """All vertices of a bounded polytope by solving every d-subset of planes.

    Returns an (n, d) array, empty when the polytope is empty. The set is
    sorted lexicographically so the output is reproducible.
    """
    d = p.dim
    m = len(p.b)
    if m < d + 1:
        raise UnboundedPolytope(f"{m} halfspaces cannot bound a {d}-dimensional set")
    if check_bounded and not _check_bounded(p):
        raise UnboundedPolytope("polytope is unbounded")
    combos = np.array(list(itertools.combinations(range(m), d)), dtype=np.intp)
    M = p.A[combos]  # (T, d, d)
    rhs = p.b[combos]  # (T, d)
    det = np.linalg.det(M)
    rownorm = np.prod(np.linalg.norm(M, axis=2), axis=1)
    ok = np.abs(det) > 1e-12 * rownorm
    if not np.any(ok):
        return np.empty((0, d))
    sol = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
    scale = np.maximum(1.0, np.abs(p.b))
    feasible = np.all(sol @ p.A.T - p.b <= tol * scale, axis=1)
    pts = sol[feasible]
    if len(pts) == 0:
        return np.empty((0, d))
    return _dedupe(pts, tol)


def _dedupe(pts: np.ndarray, tol: float) -> np.ndarray:
    order = np.lexsort(pts.T[::-1])
    pts = pts[order]
    keep: list[np.ndarray] = []
    for q in pts:
        if not any(np.max(np.abs(q - k)) <= tol * max(1.0, float(np.max(np.abs(q)))) for k in keep):
            keep.append(q)
    return np.array(keep)


def vertex_enumerate_3d(p: PolytopeH, tol: float = TOL) -> np.ndarray:
    if p.dim != 3:
        raise GeometryError("expected a 3D polytope")
    return vertex_enumerate(p, tol)


def project_to_plane(points, axes: tuple[int, int] = (0, 1)) -> Polygon:
    pts = np.asarray(points, dtype=float)
    if len(pts) == 0:
        return Polygon.empty()
    return Polygon(pts[:, list(axes)])


def interval_image_monotone(f: Callable[[float], float], x: Interval) -> Interval:
    """Image of an interval under a nondecreasing scalar map."""
    if x.is_empty:
        return EMPTY_INTERVAL
    return Interval(f(x.lo), f(x.hi))


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------


def _fmt_num(x: float) -> float:
    """Round to 12 significant digits so serialized output is byte-stable."""
    x = float(x)
    if x == 0.0:
        return 0.0
    return float(f"{x:.12g}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def set_from_json(data: dict):
    if "halfspaces" in data:
        return PolytopeH.from_json(data)
    dim = data["dim"]
    if dim == 2:
        return Polygon.from_json(data)
    if dim == 1:
        v = data["vertices"]
        return EMPTY_INTERVAL if not v else Interval(float(v[0][0]), float(v[-1][0]))
    return np.array(data["vertices"], dtype=float).reshape(-1, dim)
