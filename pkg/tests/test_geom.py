import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from uvsmf import geom
from uvsmf.geom import (
    EMPTY_INTERVAL,
    Box,
    Halfspace,
    Interval,
    Polygon,
    PolytopeH,
    area,
    clip_halfspace,
    clip_strip,
    contains,
    diameter,
    hausdorff,
    interval_image_monotone,
    is_convex_ccw,
    linear_image,
    minkowski_sum,
    project_to_plane,
    vertex_enumerate_3d,
)

SQUARE = Polygon([[0, 0], [1, 0], [1, 1], [0, 1]])
SHEAR = np.array([[1.0, 1.0], [0.0, 1.0]])
NOISE_DIR = np.array([0.5, 1.0])

# frozen from the sampled-sum hull oracle in test_hexagon_matches_sampled_sums
HEXAGON = np.array([[-20.5, -11.0], [-0.5, -11.0], [19.5, 9.0], [20.5, 11.0], [0.5, 11.0], [-19.5, -9.0]])
# sin(1) + 1, confirmed by a 10^6-point dense grid in test_monotone_image_dense_grid
SIN_PLUS_X_AT_ONE = 1.8414709848078965


def sameset(a, b, tol=1e-12):
    a, b = np.asarray(a, float), np.asarray(b, float)
    if a.shape != b.shape:
        return False
    return all(np.min(np.max(np.abs(b - p), axis=1)) <= tol for p in a)


def hull_of(points):
    pts = np.asarray(points, float)
    return pts[ConvexHull(pts).vertices]


# ---------------------------------------------------------------- intervals


def test_monotone_image_dense_grid():
    f = lambda x: np.sin(x) + x
    x = np.linspace(0.0, 1.0, 1_000_001)
    img = f(x)
    out = interval_image_monotone(f, Interval(0, 1))
    assert abs(out.lo - img.min()) <= 1e-9 and abs(out.hi - img.max()) <= 1e-9
    assert out.hi == pytest.approx(SIN_PLUS_X_AT_ONE, abs=1e-9)


def test_monotone_image_identity_and_fixed_point():
    assert interval_image_monotone(lambda x: x, Interval(-2, 3)) == Interval(-2, 3)
    out = interval_image_monotone(lambda x: math.sin(x) + x, Interval(math.pi, math.pi))
    assert out.lo == pytest.approx(math.pi, abs=1e-15) and out.diameter == 0.0
    assert interval_image_monotone(math.sin, EMPTY_INTERVAL).is_empty


def test_interval_basics():
    assert Interval(0.6, 1).diameter == pytest.approx(0.4, abs=1e-15)
    assert Interval(0, 1).intersect(Interval(2, 3)).is_empty
    assert Interval(0, 1).hull(Interval(2, 3)) == Interval(0, 3)
    assert Interval(0, 1) + Interval(1, 2) == Interval(1, 3)
    assert Interval(1, 2).scale(-1) == Interval(-2, -1)
    assert EMPTY_INTERVAL.diameter == 0.0
    assert Interval.EMPTY.is_empty
    with pytest.raises(geom.GeometryError):
        Interval(1, 0)


def test_interval_diameter_against_grid():
    x = np.linspace(0, 1, 100_001)
    acc = x[(x >= 0.6 - 1e-12) & (x <= 1.2)]
    assert Interval(0.6, 1).diameter == pytest.approx(acc.max() - acc.min(), abs=1e-5)


# ---------------------------------------------------------------- images and sums


def test_linear_image_identity_and_zero():
    assert sameset(linear_image(np.eye(2), SQUARE).vertices, SQUARE.vertices)
    z = linear_image(np.zeros((2, 2)), SQUARE)
    assert sameset(z.vertices, [[0, 0]])


def test_linear_image_shear_parallelogram():
    p = linear_image(SHEAR, Box.from_bounds([(-10, 10), (-10, 10)]))
    expected = [[-20, -10], [0, -10], [20, 10], [0, 10]]
    assert sameset(p.vertices, expected)
    # sampling oracle: images of random box points stay inside, corners are attained
    rng = np.random.default_rng(3)
    pts = rng.uniform(-10, 10, (5000, 2)) @ SHEAR.T
    assert contains(p, pts, 1e-9)


def test_linear_image_dimension_mismatch():
    with pytest.raises(geom.GeometryError):
        linear_image(np.eye(3), SQUARE)


def test_minkowski_identity_and_segments():
    assert sameset(minkowski_sum(SQUARE, [[0, 0]]).vertices, SQUARE.vertices)
    sq = minkowski_sum(Polygon([[0, 0], [1, 0]]), [[0, 0], [0, 1]])
    assert sameset(sq.vertices, SQUARE.vertices)
    assert minkowski_sum(Polygon.empty(), SQUARE).is_empty


def test_hexagon_matches_sampled_sums():
    p = linear_image(SHEAR, Box.from_bounds([(-10, 10), (-10, 10)]))
    hexagon = minkowski_sum(p, np.outer([-1, 1], NOISE_DIR))
    assert sameset(hexagon.vertices, HEXAGON)
    # oracle: hull of sums of boundary samples (10^4 parallelogram points x segment points)
    rng = np.random.default_rng(0)
    edge = rng.integers(0, 4, 10_000)
    t = rng.random(10_000)[:, None]
    v = p.vertices
    pts = v[edge] + t * (v[(edge + 1) % 4] - v[edge])
    pts = np.vstack([pts, v])
    s = np.linspace(-1, 1, 21)[:, None] * NOISE_DIR
    sums = (pts[:, None, :] + s[None, :, :]).reshape(-1, 2)
    oracle = Polygon(hull_of(sums))
    assert hausdorff(hexagon, oracle) <= 1e-6


# ---------------------------------------------------------------- clipping


def test_clip_half_square():
    out = clip_halfspace(SQUARE, Halfspace((1.0, 0.0), 0.5))
    assert sameset(out.vertices, [[0, 0], [0.5, 0], [0.5, 1], [0, 1]])


def test_clip_noop_and_empty():
    assert clip_halfspace(SQUARE, Halfspace((1.0, 1.0), 5.0)) is SQUARE
    assert clip_halfspace(SQUARE, Halfspace((1.0, 0.0), -1.0)).is_empty


def test_clip_strip_band_against_membership_grid():
    box = Box.from_bounds([(-10, 10), (-10, 10)]).to_polygon()
    band = clip_strip(box, (1.0, 0.0), 3 - 1, 3 + 1)
    assert sameset(band.vertices, [[2, -10], [4, -10], [4, 10], [2, 10]])
    x1 = np.linspace(-10, 10, 20_001)
    x2 = np.linspace(-10, 10, 41)
    X1, X2 = np.meshgrid(x1, x2)
    member = np.abs(3 - X1) <= 1 + 1e-12
    pts = np.column_stack([X1[member], X2[member]])
    assert pts[:, 0].min() == pytest.approx(2, abs=1e-3) and pts[:, 0].max() == pytest.approx(4, abs=1e-3)
    assert contains(band, pts, 1e-9)
    assert not contains(band, np.column_stack([X1[~member], X2[~member]])[:1], 1e-9)


# ---------------------------------------------------------------- measures


def test_square_measures():
    assert area(SQUARE) == pytest.approx(1.0)
    assert diameter(SQUARE) == pytest.approx(math.sqrt(2))
    assert area(Polygon.empty()) == 0 and diameter(Polygon.empty()) == 0


def test_containment_strict_subset():
    inner = Polygon([[0.2, 0.2], [0.8, 0.2], [0.8, 0.8]])
    assert contains(SQUARE, inner, 1e-9)
    assert not contains(inner, SQUARE, 1e-9)
    assert contains(SQUARE, SQUARE, 1e-9)


def test_degenerate_polygons_are_legal():
    seg = project_to_plane([[0, 0, 1], [1, 1, 2], [2, 2, 3]])
    assert len(seg) == 2 and area(seg) == 0.0
    assert diameter(seg) == pytest.approx(2 * math.sqrt(2))
    assert contains(seg, [[1.0, 1.0]], 1e-9)


# ---------------------------------------------------------------- polytopes


def test_cube_vertices():
    v = vertex_enumerate_3d(Box.from_bounds([(-1, 1)] * 3).to_polytope())
    assert len(v) == 8 and sameset(v, np.array(np.meshgrid([-1, 1], [-1, 1], [-1, 1])).T.reshape(-1, 3))


def test_half_cube_vertices():
    p = Box.from_bounds([(-1, 1)] * 3).to_polytope().add([1, 0, 0], 0.0)
    v = vertex_enumerate_3d(p)
    assert len(v) == 8 and v[:, 0].max() == 0.0


def test_unbounded_rejected():
    p = PolytopeH([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]], [1, 1, 1, 1])
    with pytest.raises(geom.UnboundedPolytope):
        vertex_enumerate_3d(p)
    p = PolytopeH([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1]], [1, 1, 1, 1, 1])
    with pytest.raises(geom.UnboundedPolytope):
        vertex_enumerate_3d(p)


def test_cube_projection():
    v = vertex_enumerate_3d(Box.from_bounds([(0, 1)] * 3).to_polytope())
    assert sameset(project_to_plane(v, (0, 1)).vertices, SQUARE.vertices)


def test_random_projection_matches_2d_hull():
    rng = np.random.default_rng(11)
    for _ in range(20):
        pts = rng.normal(size=(40, 3))
        proj = project_to_plane(pts[ConvexHull(pts).vertices], (0, 2))
        oracle = Polygon(hull_of(pts[:, [0, 2]]))
        assert hausdorff(proj, oracle) <= 1e-6


def test_zero_normal_rejected():
    with pytest.raises(geom.GeometryError):
        Halfspace((0.0, 0.0), 1.0)


# ---------------------------------------------------------------- serialization


def test_polygon_json_round_trip_and_bytes():
    p = minkowski_sum(linear_image(SHEAR, Box.from_bounds([(-10, 10), (-10, 10)])), np.outer([-1, 1], NOISE_DIR))
    text = geom.dumps(p.to_json())
    assert geom.dumps(Polygon.from_json(json.loads(text)).to_json()) == text
    q = geom.set_from_json(json.loads(text))
    assert sameset(q.vertices, p.vertices)


def test_polytope_json_round_trip():
    p = Box.from_bounds([(-1, 1)] * 3).to_polytope().add_strip([1, 1, 0], -0.5, 0.5)
    q = geom.set_from_json(json.loads(geom.dumps(p.to_json())))
    assert sameset(vertex_enumerate_3d(q), vertex_enumerate_3d(p))


def test_interval_json():
    assert geom.set_from_json(Interval(0, 2).to_json()) == Interval(0, 2)
    assert geom.set_from_json(EMPTY_INTERVAL.to_json()).is_empty


# ---------------------------------------------------------------- properties

coord = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
points = st.lists(st.tuples(coord, coord), min_size=3, max_size=12)


def polygon_from(pts):
    p = Polygon(pts)
    assume(len(p) >= 3 and area(p) > 1e-3)
    return p


@settings(max_examples=150, deadline=None)
@given(points, points)
def test_minkowski_sum_convex_and_commutative(a, b):
    p, q = polygon_from(a), polygon_from(b)
    pq, qp = minkowski_sum(p, q), minkowski_sum(q, p)
    assert is_convex_ccw(pq) and is_convex_ccw(qp)
    assert sameset(pq.vertices, qp.vertices, 1e-12)
    assert sameset(minkowski_sum(p, [[0.0, 0.0]]).vertices, p.vertices, 1e-12)


@settings(max_examples=200, deadline=None)
@given(points, coord, coord, coord)
def test_clip_stays_inside_and_convex(a, nx, ny, off):
    assume(abs(nx) + abs(ny) > 1e-3)
    p = polygon_from(a)
    c = clip_halfspace(p, Halfspace((nx, ny), off))
    assert is_convex_ccw(c)
    assert contains(p, c, 1e-12 * max(1.0, diameter(p)))


@settings(max_examples=100, deadline=None)
@given(points, st.floats(0, 2 * math.pi), coord, coord, st.integers(0, 11))
def test_area_invariant_under_rigid_motion_and_rotation(a, theta, tx, ty, shift):
    p = polygon_from(a)
    R = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    moved = Polygon(p.vertices @ R.T + [tx, ty])
    assert area(moved) == pytest.approx(area(p), rel=1e-12, abs=1e-9)
    rolled = Polygon(np.roll(p.vertices, shift % len(p), axis=0), normalized=True)
    assert area(rolled) == pytest.approx(area(p), rel=1e-12)


@settings(max_examples=150, deadline=None)
@given(points)
def test_normalization_is_canonical(a):
    p = polygon_from(a)
    again = Polygon(p.vertices[::-1])
    assert np.array_equal(again.vertices, p.vertices)
    assert tuple(p.vertices[0]) == min(map(tuple, p.vertices))


lattice = st.integers(-50, 50)


# exact lattice points keep facets well conditioned; near-coplanar sliver facets
# would put solver noise above the 1e-9 round-trip tolerance
@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(lattice, lattice, lattice), min_size=6, max_size=16, unique=True))
def test_halfspace_rebuild_reproduces_vertices(raw):
    pts = np.array(raw, dtype=float)
    try:
        hull = ConvexHull(pts)
    except Exception:
        assume(False)
    assume(hull.volume > 1.0)
    cube = Box.from_bounds([(-60, 60)] * 3)
    poly = PolytopeH(hull.equations[:, :3], -hull.equations[:, 3])
    v = vertex_enumerate_3d(poly)
    assert sameset(v, pts[hull.vertices], 1e-9 * 60)
    rebuilt = ConvexHull(v)
    v2 = vertex_enumerate_3d(PolytopeH(rebuilt.equations[:, :3], -rebuilt.equations[:, 3]))
    assert sameset(v2, v, 1e-9 * 60)
    assert cube.to_polytope().contains_points(v).all()


@settings(max_examples=100, deadline=None)
@given(points)
def test_json_bytes_stable(a):
    p = polygon_from(a)
    text = geom.dumps(p.to_json())
    again = geom.dumps(Polygon.from_json(json.loads(text)).to_json())
    assert again == text
