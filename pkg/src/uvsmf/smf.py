"""Set-membership filter engines.

``classical``
    Predict by the set image of the previous posterior and the whole noise
    range, update by intersecting with the measurement preimage. Exact only
    when noises are unrelated to each other and to the initial state.
``optimal``
    For scalar models whose measurement noise range depends on the previous
    process noise: a combined predict-and-update step over pairs
    ``(x_{k-1}, w_{k-1})``, realized by a deterministic sweep over w or by
    Monte Carlo rejection sampling.
``pb``
    For linear models whose process noise is one constant draw: augment the
    state with the noise and filter the augmented system exactly by
    accumulating halfspaces in initial-state coordinates, then project.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import geom
from .geom import EMPTY_INTERVAL, Interval, Polygon, PolytopeH
from .models import AugmentedModel, LinearModel, SystemModel, augment
from .oracle import MCConfig, mc_posterior_step

StateSet = Union[Interval, Polygon]

ENGINES = ("classical", "optimal", "pb")


class InconsistentMeasurement(RuntimeError):
    """The posterior became empty: the measurements cannot come from the model."""

    def __init__(self, k: int, trace: Optional["FilterTrace"] = None):
        self.k = k
        self.trace = trace
        super().__init__(f"measurement inconsistent with model at step {k}")


@dataclass
class StepRecord:
    k: int
    y: object
    prior: StateSet
    posterior: StateSet


@dataclass
class FilterTrace:
    engine: str
    initial: StateSet
    steps: list[StepRecord] = field(default_factory=list)

    @property
    def posteriors(self) -> list[StateSet]:
        return [s.posterior for s in self.steps]

    @property
    def priors(self) -> list[StateSet]:
        return [s.prior for s in self.steps]

    def __len__(self) -> int:
        return len(self.steps)


def _is_empty(s) -> bool:
    return s.is_empty


# --------------------------------------------------------------------------
# classical engine
# --------------------------------------------------------------------------


def classical_predict(posterior: StateSet, model) -> StateSet:
    if isinstance(model, SystemModel):
        return model.predict(posterior)
    if isinstance(posterior, Interval):
        if model.n != 1:
            raise ValueError("interval state requires a scalar model")
        w = model.w_range.vertices() @ model.B.T
        return posterior.scale(float(model.A[0, 0])) + Interval(float(w.min()), float(w.max()))
    image = geom.linear_image(model.A, posterior)
    noise = model.w_range.vertices() @ model.B.T
    return geom.minkowski_sum(image, noise)


def classical_update(prior: StateSet, y, model) -> StateSet:
    """Intersect the prior with every state that can produce ``y``.

    Returns an empty set when the measurement is inconsistent with the prior.
    """
    if isinstance(model, SystemModel):
        return model.update(prior, float(y))
    lo, hi = model.measurement_bounds(y)
    if isinstance(prior, Interval):
        c = float(model.C[0, 0])
        pre = Interval(*sorted((lo[0] / c, hi[0] / c)))
        return pre.intersect(prior)
    out = prior
    for row, a, b in zip(model.C, lo, hi):
        out = geom.clip_strip(out, row, a, b)
    return out


# --------------------------------------------------------------------------
# optimal engine for scalar models with related noises
# --------------------------------------------------------------------------


def _sweep_bounds(prev: Interval, y: float, model: SystemModel, w: np.ndarray):
    f_lo, f_hi = model.f(prev.lo, w), model.f(prev.hi, w)
    lo, hi = np.minimum(f_lo, f_hi), np.maximum(f_lo, f_hi)
    vlo, vhi = model.v_bounds(w)
    m_lo, m_hi = model.preimage(y, vlo, vhi)
    L, U = np.maximum(lo, m_lo), np.minimum(hi, m_hi)
    return L, U, L <= U


def optimal_sweep(prev: Interval, y: float, model: SystemModel, points: int = 4097, zooms: int = 4) -> Interval:
    """Hull of the optimal posterior by sweeping the previous process noise.

    For fixed w the feasible states form the interval
    ``f(prev, w) ∩ g^{-1}(y, V(w))``; the hull of their union is found on a
    w-grid and refined by zooming in on the minimizing/maximizing cells.
    Requires f monotone in x.
    """
    wr = model.w_range
    w = np.linspace(wr.lo, wr.hi, points)
    lo = _zoom_extreme(prev, y, model, w, 0, points, zooms)
    if lo == np.inf:
        return EMPTY_INTERVAL
    hi = -_zoom_extreme(prev, y, model, w, 1, points, zooms)
    return Interval(float(lo), float(hi))


def _zoom_extreme(prev, y, model, w, side: int, points: int, zooms: int) -> float:
    """Minimum of the lower bound (side 0) or of minus the upper bound (side 1)."""

    def values(wg):
        L, U, ok = _sweep_bounds(prev, y, model, wg)
        return np.where(ok, L if side == 0 else -U, np.inf)

    vals = values(w)
    best = vals.min()
    if best == np.inf:
        return best
    for _ in range(zooms):
        i = int(np.argmin(vals))
        w = np.linspace(w[max(i - 1, 0)], w[min(i + 1, len(w) - 1)], points)
        vals = values(w)
        best = min(best, vals.min())
    return best


def optimal_step_related(
    posterior_prev: Interval,
    y: float,
    model: SystemModel,
    k: int,
    *,
    method: str = "sweep",
    cfg: Optional[MCConfig] = None,
    rng: Optional[np.random.Generator] = None,
) -> Interval:
    """States ``f(x, w)`` with x in the previous posterior, w in its range, and
    ``y`` reachable with measurement noise in the range conditioned on w."""
    if posterior_prev.is_empty:
        raise ValueError("previous posterior is empty")
    if method == "sweep":
        return optimal_sweep(posterior_prev, y, model)
    if method == "mc":
        if rng is None:
            raise ValueError("Monte Carlo step needs a random generator")
        return mc_posterior_step(posterior_prev, y, model, cfg or MCConfig(), rng, k=k)
    raise ValueError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# relatedness cancellation and the projection-based engine
# --------------------------------------------------------------------------


def pb_filter_step(constraints: PolytopeH, y, k: int, model: AugmentedModel) -> tuple[PolytopeH, Polygon]:
    """Add the step-k measurement slab (in initial-state coordinates) and project.

    Returns the updated constraint polytope over ``z0`` and the posterior
    polygon of the original state at step k.
    """
    P = model.power(k)
    H = model.Cbar @ P
    Dv = model.D @ model.v_range.vertices().T
    y = np.atleast_1d(np.asarray(y, dtype=float))
    lo, hi = y - Dv.max(axis=1), y - Dv.min(axis=1)
    for row, a, b in zip(H, lo, hi):
        constraints = constraints.add_strip(row, a, b)
    return constraints, _project(constraints, P, model.n_x)


def _project(constraints: PolytopeH, P: np.ndarray, n_x: int, vertices: Optional[np.ndarray] = None) -> Polygon:
    if vertices is None:
        vertices = geom.vertex_enumerate(constraints, check_bounded=False)
    if len(vertices) == 0:
        return Polygon.empty()
    return geom.project_to_plane(geom.linear_image(P, vertices), tuple(range(n_x)))


def _run_pb(model: LinearModel, measurements: Sequence) -> FilterTrace:
    if model.n != 2:
        raise ValueError("the projection-based engine is implemented for two-dimensional states")
    aug = augment(model)
    cons = aug.initial_polytope()
    initial = model.x0.to_polygon()
    trace = FilterTrace("pb", initial)
    for k, y in enumerate(measurements):
        prior = _project(cons, aug.power(k), aug.n_x)
        cons, post = pb_filter_step(cons, y, k, aug)
        trace.steps.append(StepRecord(k, y, prior, post))
        if post.is_empty:
            raise InconsistentMeasurement(k, trace)
    return trace


# --------------------------------------------------------------------------
# driver
# --------------------------------------------------------------------------


def run_filter(
    model,
    measurements: Sequence,
    engine: str = "classical",
    *,
    method: str = "sweep",
    cfg: Optional[MCConfig] = None,
    rng: Optional[np.random.Generator] = None,
) -> FilterTrace:
    """Run one engine over a measurement sequence starting from the initial range.

    Raises :class:`InconsistentMeasurement` (carrying the partial trace) as
    soon as a posterior is empty.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")
    if isinstance(model, LinearModel) and engine in ("optimal", "pb"):
        return _run_pb(model, measurements)
    if engine == "pb":
        raise ValueError("the projection-based engine needs a LinearModel")
    if isinstance(model, LinearModel):
        initial = model.x0.axes[0] if model.n == 1 else model.x0.to_polygon()
    else:
        initial = model.x0
    trace = FilterTrace(engine, initial)
    post = None
    for k, y in enumerate(measurements):
        prior = initial if k == 0 else classical_predict(post, model)
        if engine == "optimal" and k > 0:
            post = optimal_step_related(post, float(y), model, k, method=method, cfg=cfg, rng=rng)
        else:
            post = classical_update(prior, y, model)
        trace.steps.append(StepRecord(k, y, prior, post))
        if _is_empty(post):
            raise InconsistentMeasurement(k, trace)
    return trace


def outer_bound_assert(optimal: StateSet, classical: StateSet, tol: float = geom.TOL) -> bool:
    """True when the optimal posterior lies inside the classical one."""
    return geom.contains(classical, optimal, tol)
