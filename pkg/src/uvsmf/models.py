"""System models: scalar nonlinear/linear models, matrix linear models, and
the state augmentation that absorbs a constant process noise into the state."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .geom import Box, Interval, PolytopeH


class SystemModel:
    """Scalar model ``x' = f(x, w)``, ``y = g(x, v)`` with interval ranges.

    ``f`` must be nondecreasing or nonincreasing in each argument separately,
    so the image of a box of arguments is spanned by its corners. When
    ``v_given_w`` is set, the range of ``v_k`` depends on ``w_{k-1}``.
    """

    x0: Interval
    w_range: Interval
    v_range: Interval
    v_given_w: Optional[Callable] = None

    def f(self, x, w):
        raise NotImplementedError

    def g(self, x, v):
        raise NotImplementedError

    def preimage(self, y, vlo, vhi):
        """Bounds of {x : g(x, v) = y for some v in [vlo, vhi]} (vectorized)."""
        raise NotImplementedError

    def accepts(self, x, y, vlo, vhi, tol: float = 0.0):
        """Mask of states x that can produce y with noise in [vlo, vhi]."""
        raise NotImplementedError

    @property
    def related(self) -> bool:
        return self.v_given_w is not None

    def unrelated(self) -> "SystemModel":
        return replace(self, v_given_w=None)

    def v_bounds(self, w):
        if self.v_given_w is None:
            w = np.asarray(w, dtype=float)
            return np.full(w.shape, self.v_range.lo), np.full(w.shape, self.v_range.hi)
        return self.v_given_w(w)

    def predict(self, post: Interval) -> Interval:
        if post.is_empty:
            return post
        vals = [self.f(x, w) for x in (post.lo, post.hi) for w in (self.w_range.lo, self.w_range.hi)]
        return Interval(min(vals), max(vals))

    def update(self, prior: Interval, y: float) -> Interval:
        lo, hi = self.preimage(y, self.v_range.lo, self.v_range.hi)
        return Interval(float(lo), float(hi)).intersect(prior)

    def sample_v(self, rng: np.random.Generator, w_prev: Optional[float]) -> float:
        if w_prev is None or self.v_given_w is None:
            lo, hi = self.v_range.lo, self.v_range.hi
        else:
            lo, hi = (float(b) for b in self.v_given_w(np.float64(w_prev)))
        return lo + rng.random() * (hi - lo)


def _related_v(w):
    w = np.asarray(w, dtype=float)
    return np.maximum(1.0, 1.8 - w), 2.0 - w


@dataclass(frozen=True)
class NonlinearModel(SystemModel):
    """``x' = sin(x) + x + w``, ``y = v x`` with x0 in [0, 1], w in [0, 1], v in [1, 2].

    With ``related`` the measurement noise range shrinks to
    ``[max(1, 1.8 - w_{k-1}), 2 - w_{k-1}]``.
    """

    x0: Interval = Interval(0.0, 1.0)
    w_range: Interval = Interval(0.0, 1.0)
    v_range: Interval = Interval(1.0, 2.0)
    v_given_w: Optional[Callable] = _related_v

    @classmethod
    def create(cls, related: bool = True) -> "NonlinearModel":
        return cls() if related else cls(v_given_w=None)

    def f(self, x, w):
        return np.sin(x) + x + w

    def g(self, x, v):
        return v * x

    def preimage(self, y, vlo, vhi):
        # multiplicative noise with 0 < vlo <= vhi
        a, b = y / vhi, y / vlo
        return np.minimum(a, b), np.maximum(a, b)

    def update(self, prior: Interval, y: float) -> Interval:
        # the [0.5y, y] bracket, written with the same float operations as the
        # textbook recursion so the two agree bit for bit
        if self.v_range == Interval(1.0, 2.0):
            lo, hi = min(0.5 * y, y), max(0.5 * y, y)
            return Interval(lo, hi).intersect(prior)
        return super().update(prior, y)

    def accepts(self, x, y, vlo, vhi, tol: float = 0.0):
        x = np.asarray(x, dtype=float)
        nz = x != 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(nz, y / np.where(nz, x, 1.0), np.nan)
        lo = vlo - tol * np.maximum(1.0, np.abs(vlo))
        hi = vhi + tol * np.maximum(1.0, np.abs(vhi))
        return (nz & (v >= lo) & (v <= hi)) | (~nz & (y == 0.0))


@dataclass(frozen=True)
class ScalarLinearModel(SystemModel):
    """``x' = a x + b w``, ``y = c x + d v``."""

    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    d: float = 1.0
    x0: Interval = Interval(-1.0, 1.0)
    w_range: Interval = Interval(-1.0, 1.0)
    v_range: Interval = Interval(-1.0, 1.0)
    v_given_w: Optional[Callable] = None

    def f(self, x, w):
        return self.a * x + self.b * w

    def g(self, x, v):
        return self.c * x + self.d * v

    def preimage(self, y, vlo, vhi):
        p, q = (y - self.d * vlo) / self.c, (y - self.d * vhi) / self.c
        return np.minimum(p, q), np.maximum(p, q)

    def accepts(self, x, y, vlo, vhi, tol: float = 0.0):
        x = np.asarray(x, dtype=float)
        r = y - self.c * x
        if self.d == 0.0:
            return np.abs(r) <= tol * max(1.0, abs(y))
        v = r / self.d
        lo = vlo - tol * np.maximum(1.0, np.abs(vlo))
        hi = vhi + tol * np.maximum(1.0, np.abs(vhi))
        return (v >= lo) & (v <= hi)

    def to_linear(self) -> "LinearModel":
        return LinearModel(
            A=np.array([[self.a]]),
            B=np.array([[self.b]]),
            C=np.array([[self.c]]),
            D=np.array([[self.d]]),
            x0=Box((self.x0,)),
            w_range=Box((self.w_range,)),
            v_range=Box((self.v_range,)),
        )


@dataclass(frozen=True, eq=False)
class LinearModel:
    """``x' = A x + B w``, ``y = C x + D v`` with box-shaped ranges."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    x0: Box
    w_range: Box
    v_range: Box

    def __post_init__(self):
        A, B, C, D = (np.atleast_2d(np.asarray(M, dtype=float)) for M in (self.A, self.B, self.C, self.D))
        n = A.shape[0]
        if A.shape != (n, n) or B.shape[0] != n or C.shape[1] != n or D.shape[0] != C.shape[0]:
            raise ValueError("inconsistent matrix dimensions")
        if self.x0.dim != n or self.w_range.dim != B.shape[1] or self.v_range.dim != D.shape[1]:
            raise ValueError("range dimensions do not match the matrices")
        for name, M in zip("ABCD", (A, B, C, D)):
            object.__setattr__(self, name, M)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def measurement_bounds(self, y) -> tuple[np.ndarray, np.ndarray]:
        """Bounds on C x implied by y: y - D v over the noise box."""
        Dv = self.D @ self.v_range.vertices().T  # (m, corners)
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return y - Dv.max(axis=1), y - Dv.min(axis=1)


def example_b_model() -> LinearModel:
    return LinearModel(
        A=np.array([[1.0, 1.0], [0.0, 1.0]]),
        B=np.array([[0.5], [1.0]]),
        C=np.array([[1.0, 0.0]]),
        D=np.array([[1.0]]),
        x0=Box.from_bounds([(-10, 10), (-10, 10)]),
        w_range=Box.from_bounds([(-1, 1)]),
        v_range=Box.from_bounds([(-1, 1)]),
    )


@dataclass(frozen=True, eq=False)
class AugmentedModel:
    """Noise-free augmented system ``z' = Abar z``, ``y = Cbar z + D v`` with z = (x, w)."""

    Abar: np.ndarray
    Cbar: np.ndarray
    D: np.ndarray
    z0: Box
    v_range: Box
    n_x: int

    def power(self, k: int) -> np.ndarray:
        return np.linalg.matrix_power(self.Abar, k)

    def initial_polytope(self) -> PolytopeH:
        return self.z0.to_polytope()


def augment(model: LinearModel) -> AugmentedModel:
    """Absorb a time-constant process noise into the state."""
    n, p = model.B.shape
    top = np.hstack([model.A, model.B])
    bottom = np.hstack([np.zeros((p, n)), np.eye(p)])
    Abar = np.vstack([top, bottom])
    Cbar = np.hstack([model.C, np.zeros((model.C.shape[0], p))])
    z0 = Box(tuple(model.x0.axes) + tuple(model.w_range.axes))
    return AugmentedModel(Abar, Cbar, model.D, z0, model.v_range, n)


def simulate_scalar(model: SystemModel, steps: int, rng: np.random.Generator):
    """Trajectory with uniformly drawn x0, w_k and v_k (v_k from its conditional range).

    Returns arrays ``x[0..K]``, ``w[0..K-1]``, ``v[0..K]``, ``y[0..K]``.
    """
    xs = np.empty(steps + 1)
    vs = np.empty(steps + 1)
    ys = np.empty(steps + 1)
    ws = np.empty(steps)
    x = model.x0.lo + rng.random() * (model.x0.hi - model.x0.lo)
    w_prev = None
    for k in range(steps + 1):
        v = model.sample_v(rng, w_prev)
        xs[k], vs[k], ys[k] = x, v, float(model.g(x, v))
        if k == steps:
            break
        w = model.w_range.lo + rng.random() * (model.w_range.hi - model.w_range.lo)
        ws[k] = w
        x = float(model.f(x, w))
        w_prev = w
    return xs, ws, vs, ys


def simulate_linear_constant_noise(model: LinearModel, steps: int, rng: np.random.Generator):
    """Trajectory in which a single process-noise draw is reused at every step."""
    def draw(box: Box):
        return np.array([a.lo + rng.random() * (a.hi - a.lo) for a in box.axes])

    x = draw(model.x0)
    w = draw(model.w_range)
    xs, ys = [], []
    for k in range(steps + 1):
        v = draw(model.v_range)
        xs.append(x)
        ys.append(model.C @ x + model.D @ v)
        x = model.A @ x + model.B @ w
    return np.array(xs), w, np.array(ys)
