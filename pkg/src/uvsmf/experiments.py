"""Seeded reproduction runs for the two benchmark systems.

Example A is the scalar nonlinear system with related process and
measurement noise; example B is the double-integrator-like linear system
whose process noise is a single constant draw. Every run derives its own
seed from the base seed and run index, so results do not depend on the
number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import geom
from .geom import Box
from .models import NonlinearModel, example_b_model, simulate_linear_constant_noise, simulate_scalar
from .oracle import MCConfig, mc_posterior_step
from .rng import STREAM_MC, STREAM_TRAJECTORY, generator
from .smf import InconsistentMeasurement, optimal_sweep, run_filter

ENGINES_A = ("classical", "optimal", "sweep")
ENGINES_B = ("classical", "optimal")
DEFAULT_SEED_B = 1


@dataclass
class RunDescriptor:
    example: str
    steps: int = 20
    runs: Optional[int] = None
    samples: int = 10_000
    seed: Optional[int] = None
    engines: Optional[list[str]] = None
    out: str = "out"
    related: bool = True
    zero_noise: bool = False
    dump_samples: bool = False

    def __post_init__(self):
        if self.example not in ("a", "b"):
            raise ValueError("example must be 'a' or 'b'")
        if self.runs is None:
            self.runs = 10_000 if self.example == "a" else 1
        if self.seed is None:
            self.seed = 0 if self.example == "a" else DEFAULT_SEED_B
        if self.engines is None:
            self.engines = ["classical", "optimal"]
        allowed = ENGINES_A if self.example == "a" else ENGINES_B
        bad = [e for e in self.engines if e not in allowed]
        if bad:
            raise ValueError(f"unknown engines {bad} for example {self.example}; choose from {allowed}")
        if "classical" not in self.engines:
            self.engines = ["classical"] + list(self.engines)
        if self.steps < 0 or self.runs < 1 or self.samples < 1:
            raise ValueError("need steps >= 0, runs >= 1, samples >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def to_json(self) -> dict:
        d = {
            "example": self.example,
            "steps": self.steps,
            "runs": self.runs,
            "samples": self.samples,
            "seed": self.seed,
            "engines": list(self.engines),
        }
        if self.example == "a":
            d["related"] = self.related
        else:
            d["zero_noise"] = self.zero_noise
        return d

    @classmethod
    def from_json(cls, data: dict, **overrides) -> "RunDescriptor":
        keys = {"example", "steps", "runs", "samples", "seed", "engines", "related", "zero_noise"}
        kwargs = {k: v for k, v in data.items() if k in keys}
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kwargs)


def fmt(x) -> str:
    """Fixed 12-significant-digit rendering used in every output file."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x == 0.0:
        return "0"
    return f"{x:.12g}"


def write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if not isinstance(v, str) else v for v in r])
    path.write_text(buf.getvalue(), encoding="utf-8", newline="\n")


def _map_runs(fn, desc: RunDescriptor, workers: int) -> list:
    args = [(desc, r) for r in range(desc.runs)]
    if workers <= 1 or desc.runs == 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args, chunksize=max(1, desc.runs // (4 * workers))))


# --------------------------------------------------------------------------
# example A
# --------------------------------------------------------------------------


@dataclass
class RunA:
    run: int
    diameters: dict
    violations: list
    intervals: dict
    states: list
    samples: Optional[list] = None
    error: Optional[str] = None


def _run_a(args) -> RunA:
    desc, run = args
    model = NonlinearModel.create(desc.related)
    xs, _, _, ys = simulate_scalar(model, desc.steps, generator(desc.seed, run, STREAM_TRAJECTORY))
    classical = run_filter(model, ys, "classical").posteriors
    series = {"classical": classical}
    dumps = [] if desc.dump_samples and run == 0 else None
    if "optimal" in desc.engines:
        rng = generator(desc.seed, run, STREAM_MC)
        cfg = MCConfig(desc.samples, desc.seed)
        post = classical[0]
        out = [post]
        for k in range(1, len(ys)):
            if dumps is not None:
                post, s = mc_posterior_step(post, ys[k], model, cfg, rng, k=k, keep_samples=True)
                dumps.extend((k, a, b, c) for a, b, c in zip(s.x, s.w, s.v))
            else:
                post = mc_posterior_step(post, ys[k], model, cfg, rng, k=k)
            out.append(post)
        series["optimal"] = out
    if "sweep" in desc.engines:
        post = classical[0]
        out = [post]
        for k in range(1, len(ys)):
            post = optimal_sweep(post, ys[k], model)
            out.append(post)
        series["sweep"] = out
    violations = [0] * len(ys)
    for name, s in series.items():
        if name == "classical":
            continue
        for k, (p, c) in enumerate(zip(s, classical)):
            if not c.contains(p, tol=0.0):
                violations[k] = 1
    return RunA(
        run,
        {n: [p.diameter for p in s] for n, s in series.items()},
        violations,
        {n: [(p.lo, p.hi) for p in s] for n, s in series.items()},
        list(xs),
        dumps,
    )


@dataclass
class SummaryA:
    k: list
    avg_diameter: dict
    violations_per_k: list
    runs: list = field(repr=False, default_factory=list)

    @property
    def total_violations(self) -> int:
        return sum(self.violations_per_k)


def example_a(desc: RunDescriptor, workers: int = 1) -> SummaryA:
    results = _map_runs(_run_a, desc, workers)
    results.sort(key=lambda r: r.run)
    K = desc.steps
    engines = [e for e in ("classical", "optimal", "sweep") if e in desc.engines]
    avg = {e: [math.fsum(r.diameters[e][k] for r in results) / len(results) for k in range(K + 1)] for e in engines}
    viol = [sum(r.violations[k] for r in results) for k in range(K + 1)]
    return SummaryA(list(range(K + 1)), avg, viol, results)


def write_example_a(desc: RunDescriptor, summary: SummaryA, out: Path, figures: bool = False) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    engines = list(summary.avg_diameter)
    files = []
    p = out / "example_a.csv"
    write_csv(
        p,
        ["k"] + [f"avg_diam_{e}" for e in engines] + ["containment_violations"],
        ([k] + [summary.avg_diameter[e][k] for e in engines] + [summary.violations_per_k[k]] for k in summary.k),
    )
    files.append(p)
    p = out / "example_a_runs.csv"
    write_csv(p, ["run", "containment_violations", "contained"], ([r.run, sum(r.violations), not any(r.violations)] for r in summary.runs))
    files.append(p)
    first = summary.runs[0]
    p = out / "example_a_trace.csv"
    rows = []
    for k in summary.k:
        for e in engines:
            lo, hi = first.intervals[e][k]
            rows.append([k, e, lo, hi, hi - lo, first.states[k]])
    write_csv(p, ["k", "engine", "lo", "hi", "diameter", "true_state"], rows)
    files.append(p)
    if first.samples is not None:
        p = out / "example_a_samples.csv"
        write_csv(p, ["k", "x", "w", "v"], first.samples)
        files.append(p)
    files.append(_write_descriptor(desc, out))
    if figures:
        from .report import plot_example_a

        files.append(plot_example_a(summary, out / "example_a_diameters.png"))
    return files


# --------------------------------------------------------------------------
# example B
# --------------------------------------------------------------------------


@dataclass
class RunB:
    run: int
    classical: list
    optimal: list
    states: np.ndarray
    w: np.ndarray
    error: Optional[str] = None

    def ratio(self, k: int) -> float:
        return area_ratio(self.optimal[k], self.classical[k])

    def contained(self, k: int, tol: float = geom.TOL) -> bool:
        return geom.contains(self.classical[k], self.optimal[k], tol)

    def truth_in(self, which: str, k: int, tol: float = geom.TOL) -> bool:
        p = self.classical[k] if which == "classical" else self.optimal[k]
        return geom.contains_point(p, self.states[k], tol)


def area_ratio(optimal: geom.Polygon, classical: geom.Polygon) -> float:
    ac, ao = geom.area(classical), geom.area(optimal)
    if ac == 0.0:
        # both collapsed: identical degenerate sets count as ratio one
        return 1.0 if ao == 0.0 else math.inf
    return ao / ac


def _model_b(desc: RunDescriptor):
    model = example_b_model()
    if desc.zero_noise:
        from dataclasses import replace

        model = replace(model, w_range=Box.from_bounds([(0, 0)]), v_range=Box.from_bounds([(0, 0)]))
    return model


def _run_b(args) -> RunB:
    desc, run = args
    model = _model_b(desc)
    xs, w, ys = simulate_linear_constant_noise(model, desc.steps, generator(desc.seed, run, STREAM_TRAJECTORY))
    try:
        c = run_filter(model, ys, "classical").posteriors
        o = run_filter(model, ys, "pb").posteriors
        err = None
    except InconsistentMeasurement as e:
        c = o = []
        err = str(e)
    return RunB(run, c, o, xs, w, err)


def example_b(desc: RunDescriptor, workers: int = 1) -> list[RunB]:
    res = _map_runs(_run_b, desc, workers)
    res.sort(key=lambda r: r.run)
    return res


def write_example_b(desc: RunDescriptor, runs: list[RunB], out: Path, figures: bool = False) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    files = []
    polys, rows, ratios = [], [], []
    for r in runs:
        if r.error:
            ratios.append([r.run, -1, math.nan, math.nan, math.nan, False, False, False])
            continue
        for k in range(len(r.classical)):
            for engine, p in (("classical", r.classical[k]), ("optimal", r.optimal[k])):
                pid = f"r{r.run}-k{k}-{engine}"
                polys.append({"id": pid, "run": r.run, "k": k, "engine": engine, **p.to_json()})
                rows.append([r.run, k, engine, pid, geom.diameter(p), geom.area(p)])
        for k in range(len(r.classical)):
            # ratio and areas from the serialized vertices, so the files agree with each other
            pc = geom.Polygon.from_json(r.classical[k].to_json())
            po = geom.Polygon.from_json(r.optimal[k].to_json())
            ratios.append(
                [r.run, k, geom.area(pc), geom.area(po), area_ratio(po, pc), r.contained(k), r.truth_in("classical", k), r.truth_in("optimal", k)]
            )
    p = out / "example_b.csv"
    write_csv(p, ["run", "k", "engine", "polygon_id", "diameter", "area"], rows)
    files.append(p)
    p = out / "example_b_ratio.csv"
    write_csv(p, ["run", "k", "area_classical", "area_optimal", "ratio", "contained", "truth_in_classical", "truth_in_optimal"], ratios)
    files.append(p)
    p = out / "example_b_polygons.json"
    p.write_text(geom.dumps({"polygons": polys}), encoding="utf-8", newline="\n")
    files.append(p)
    files.append(_write_descriptor(desc, out))
    if figures and runs and not runs[0].error:
        from .report import plot_example_b

        files.append(plot_example_b(runs[0], out / "example_b_polygons.png"))
    return files


def _write_descriptor(desc: RunDescriptor, out: Path) -> Path:
    p = out / f"descriptor_{desc.example}.json"
    p.write_text(json.dumps(desc.to_json(), sort_keys=True, indent=1) + "\n", encoding="utf-8", newline="\n")
    return p
