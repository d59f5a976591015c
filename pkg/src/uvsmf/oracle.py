"""Ground-truth generators for the filters.

* Monte Carlo rejection sampling of the optimal posterior (an inner
  approximation: every accepted sample is a genuinely feasible state).
* A deterministic grid enumeration of feasible states (an outer bracket).
* An LP support-function oracle for the two-dimensional linear example.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .geom import Interval, EMPTY_INTERVAL
from .models import AugmentedModel, LinearModel, SystemModel
from .rng import uniform


class AcceptanceStarvation(RuntimeError):
    def __init__(self, k: Optional[int], accepted: int, attempts: int):
        self.k, self.accepted, self.attempts = k, accepted, attempts
        rate = accepted / attempts if attempts else 0.0
        where = f" at step {k}" if k is not None else ""
        super().__init__(
            f"acceptance starvation{where}: {accepted} accepted of {attempts} attempts (rate {rate:.3g})"
        )


class GridBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class MCConfig:
    samples: int = 10_000
    seed: int = 0
    max_attempts: Optional[int] = None

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")

    @property
    def attempt_budget(self) -> int:
        return self.max_attempts if self.max_attempts is not None else 1000 * self.samples


@dataclass
class MCSamples:
    """Accepted samples of one step: new state, process noise and implied measurement noise."""

    x: np.ndarray
    w: np.ndarray
    v: np.ndarray
    attempts: int


def mc_posterior_step(
    prev: Interval,
    y: float,
    model: SystemModel,
    cfg: MCConfig,
    rng: np.random.Generator,
    *,
    k: Optional[int] = None,
    keep_samples: bool = False,
):
    """One predict-and-update step by rejection sampling.

    Draws ``x_{k-1}`` uniformly from ``prev`` and ``w_{k-1}`` uniformly from
    the process-noise range, propagates, and keeps ``x_k`` when the
    observation is reachable with a measurement noise in the conditional
    range given ``w_{k-1}``. Stops at ``cfg.samples`` accepted points and
    returns their interval hull (and the samples when ``keep_samples``).
    """
    if prev.is_empty:
        raise ValueError("previous posterior is empty")
    n_target = cfg.samples
    budget = cfg.attempt_budget
    wr = model.w_range
    xs, ws = [], []
    got = attempts = 0
    while got < n_target:
        if attempts >= budget:
            raise AcceptanceStarvation(k, got, attempts)
        need = n_target - got
        rate = got / attempts if attempts else 0.25
        batch = int(min(max(need / max(rate, 1e-4) * 1.1 + 64, 64), 1 << 20, budget - attempts))
        xp = np.minimum(uniform(rng, prev.lo, prev.hi, batch), prev.hi)
        w = np.minimum(uniform(rng, wr.lo, wr.hi, batch), wr.hi)
        xk = model.f(xp, w)
        vlo, vhi = model.v_bounds(w)
        ok = model.accepts(xk, y, vlo, vhi)
        idx = np.flatnonzero(ok)
        if len(idx) > need:
            # stop at the N-th acceptance; later draws of the batch are unused
            idx = idx[:need]
            attempts += int(idx[-1]) + 1
        else:
            attempts += batch
        xs.append(xk[idx])
        ws.append(w[idx])
        got += len(idx)
    x = np.concatenate(xs)
    hull = Interval(float(x.min()), float(x.max()))
    if not keep_samples:
        return hull
    w = np.concatenate(ws)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(x != 0.0, y / np.where(x != 0.0, x, 1.0), np.nan)
    return hull, MCSamples(x, w, v, attempts)


def mc_filter(model: SystemModel, ys: Sequence[float], cfg: MCConfig, rng: np.random.Generator) -> list[Interval]:
    """Full sampled optimal filter: exact update at k=0, sampled steps afterwards."""
    out: list[Interval] = []
    post = model.update(model.x0, ys[0]) if len(ys) else model.x0
    if len(ys):
        out.append(post)
    for k in range(1, len(ys)):
        post = mc_posterior_step(post, ys[k], model, cfg, rng, k=k)
        out.append(post)
    return out


# --------------------------------------------------------------------------
# Grid enumeration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    resolution: float = 1e-3
    tol: float = 1e-6
    max_points: int = 100_000_000

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")


def _cells(iv: Interval, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Partition an interval into cells of width at most h."""
    if iv.hi == iv.lo:
        return np.array([iv.lo]), np.array([iv.hi])
    n = max(1, math.ceil((iv.hi - iv.lo) / h - 1e-9))
    edges = np.linspace(iv.lo, iv.hi, n + 1)
    return edges[:-1], edges[1:]


def _merge(lo: np.ndarray, hi: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Hull together all cells whose lower edge falls in the same grid bin."""
    if len(lo) == 0:
        return lo, hi
    b = np.floor(lo / h)
    order = np.argsort(b, kind="stable")
    b, lo, hi = b[order], lo[order], hi[order]
    starts = np.flatnonzero(np.r_[True, b[1:] != b[:-1]])
    return np.minimum.reduceat(lo, starts), np.maximum.reduceat(hi, starts)


@dataclass
class GridCells:
    """Union of state cells ``[lo_i, hi_i]`` covering the feasible states of one step."""

    lo: np.ndarray
    hi: np.ndarray

    @property
    def hull(self) -> Interval:
        if len(self.lo) == 0:
            return EMPTY_INTERVAL
        return Interval(float(self.lo.min()), float(self.hi.max()))

    def covers(self, x, tol: float = 0.0) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        order = np.argsort(self.lo)
        lo, hi = self.lo[order], np.maximum.accumulate(self.hi[order])
        i = np.searchsorted(lo, x + tol, side="right") - 1
        ok = i >= 0
        return ok & (hi[np.maximum(i, 0)] >= x - tol)


def grid_posterior(model: SystemModel, ys: Sequence[float], spec: GridSpec = GridSpec(), *, cells: bool = False):
    """Grid enumeration of the feasible states at every step.

    The initial range and the process-noise range are cut into cells of
    width ``spec.resolution``. At each step every (state cell, noise cell)
    pair is pushed through the dynamics (corner images, so f must be
    monotone in each argument) and clipped to the states that can produce
    the observation with a measurement noise allowed for that noise cell
    (the conditional noise bounds must be monotone in w). Cells are then
    merged per grid bin. The union of cells always covers the true feasible
    set, so the returned hulls are outer bounds that tighten as the
    resolution shrinks.

    Returns the per-step interval hulls, or the :class:`GridCells` when
    ``cells`` is true.
    """
    h = spec.resolution
    wlo, whi = _cells(model.w_range, h)
    vl_a, vh_a = model.v_bounds(wlo)
    vl_b, vh_b = model.v_bounds(whi)
    cell_vlo, cell_vhi = np.minimum(vl_a, vl_b), np.maximum(vh_a, vh_b)
    lo, hi = _cells(model.x0, h)
    out: list = []

    def clip(a, b, vlo, vhi, y):
        m_lo, m_hi = model.preimage(y, vlo, vhi)
        m_lo = m_lo - spec.tol * np.maximum(1.0, np.abs(m_lo))
        m_hi = m_hi + spec.tol * np.maximum(1.0, np.abs(m_hi))
        return np.maximum(a, m_lo), np.minimum(b, m_hi)

    for k, y in enumerate(ys):
        if k == 0:
            lo, hi = clip(lo, hi, model.v_range.lo, model.v_range.hi, y)
            keep = lo <= hi
            lo, hi = lo[keep], hi[keep]
        else:
            total = len(lo) * len(wlo)
            if total > spec.max_points:
                coarser = h * math.sqrt(total / spec.max_points) * 1.01
                raise GridBudgetExceeded(
                    f"step {k} needs {total} grid points (budget {spec.max_points}); try resolution >= {coarser:.3g}"
                )
            chunk = max(1, 4_000_000 // len(wlo))
            new_lo, new_hi = [], []
            for i in range(0, len(lo), chunk):
                a, b = lo[i : i + chunk, None], hi[i : i + chunk, None]
                corners = [model.f(x, w) for x in (a, b) for w in (wlo[None, :], whi[None, :])]
                img_lo = np.minimum.reduce(corners)
                img_hi = np.maximum.reduce(corners)
                c_lo, c_hi = clip(img_lo, img_hi, cell_vlo[None, :], cell_vhi[None, :], y)
                keep = c_lo <= c_hi
                ml, mh = _merge(c_lo[keep], c_hi[keep], h)
                new_lo.append(ml)
                new_hi.append(mh)
            lo, hi = _merge(np.concatenate(new_lo), np.concatenate(new_hi), h)
        if len(lo) == 0:
            out.extend([GridCells(lo, hi) if cells else EMPTY_INTERVAL] * (len(ys) - k))
            return out
        g = GridCells(lo, hi)
        out.append(g if cells else g.hull)
    return out


# --------------------------------------------------------------------------
# LP support functions for the linear example
# --------------------------------------------------------------------------


def _lp_max(c, A_ub, b_ub) -> float:
    from scipy.optimize import linprog

    res = linprog(-np.asarray(c), A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * len(c), method="highs")
    if res.status != 0:
        raise RuntimeError(f"support LP failed: {res.message}")
    return -float(res.fun)


def _box_rows(lo, hi):
    n = len(lo)
    eye = np.eye(n)
    return np.vstack([eye, -eye]), np.concatenate([hi, -np.asarray(lo)])


def support_constant_noise(model: AugmentedModel, ys: Sequence[float], k: int, directions: np.ndarray) -> np.ndarray:
    """Support function of the projected augmented posterior at step k.

    Decision variable is the initial augmented state z0; every measurement
    up to k constrains ``Cbar Abar^j z0``.
    """
    lo = [a.lo for a in model.z0.axes]
    hi = [a.hi for a in model.z0.axes]
    A_ub, b_ub = _box_rows(lo, hi)
    Dv = model.D @ model.v_range.vertices().T
    rows, rhs = [A_ub], [b_ub]
    for j in range(k + 1):
        H = model.Cbar @ model.power(j)
        y = np.atleast_1d(np.asarray(ys[j], dtype=float))
        rows += [H, -H]
        rhs += [y - Dv.min(axis=1), -(y - Dv.max(axis=1))]
    A_all, b_all = np.vstack(rows), np.concatenate(rhs)
    P = model.power(k)[: model.n_x]
    return np.array([_lp_max(d @ P, A_all, b_all) for d in directions])


def support_fresh_noise(model: LinearModel, ys: Sequence[float], k: int, directions: np.ndarray) -> np.ndarray:
    """Support function of the posterior when every step draws fresh process noise.

    Decision variables are x0 and w_0..w_{k-1}; x_j is affine in them.
    """
    n, p = model.B.shape
    nv = n + k * p
    lo = [a.lo for a in model.x0.axes] + [a.lo for _ in range(k) for a in model.w_range.axes]
    hi = [a.hi for a in model.x0.axes] + [a.hi for _ in range(k) for a in model.w_range.axes]
    rows, rhs = [], []
    Ab, bb = _box_rows(lo, hi)
    rows.append(Ab)
    rhs.append(bb)
    T = np.zeros((n, nv))  # x_j = T @ vars
    T[:, :n] = np.eye(n)
    for j in range(k + 1):
        if j > 0:
            T = model.A @ T
            T[:, n + (j - 1) * p : n + j * p] += model.B
        clo, chi = model.measurement_bounds(ys[j])
        H = model.C @ T
        rows += [H, -H]
        rhs += [chi, -clo]
    A_all, b_all = np.vstack(rows), np.concatenate(rhs)
    return np.array([_lp_max(d @ T, A_all, b_all) for d in directions])


def unit_directions(count: int) -> np.ndarray:
    t = np.linspace(0.0, 2 * np.pi, count, endpoint=False)
    return np.column_stack([np.cos(t), np.sin(t)])
