"""Randomized property suite for the uncertain-variable identities.

Each case draws three variables ``x, y, z`` on a small finite sample space
with a chosen coupling pattern and checks every range identity by exact set
equality. Failures carry a JSON dump of the offending case.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from types import ModuleType, SimpleNamespace

from . import uvar

PATTERNS = ("independent", "diagonal", "functional", "partial")
LEMMAS = (
    "total_range",
    "bayes",
    "posterior_subset",
    "joint_reconstruction",
    "unrelated_equiv",
    "cond_unrelated_equiv",
    "pushforward_commutes",
    "unrelatedness_invariance",
)
MAX_OUTCOMES = 10_000


@dataclass
class Case:
    pattern: str
    space: uvar.SampleSpace
    x: uvar.UncertainVariable
    y: uvar.UncertainVariable
    z: uvar.UncertainVariable

    def to_json(self) -> dict:
        return {
            "pattern": self.pattern,
            "outcomes": [list(o) if isinstance(o, tuple) else o for o in self.space.outcomes],
            "x": self.x.to_json(),
            "y": self.y.to_json(),
            "z": self.z.to_json(),
        }


@dataclass
class LemmaReport:
    iterations: int
    seed: int
    passed: dict = field(default_factory=lambda: {k: 0 for k in LEMMAS})
    checked: dict = field(default_factory=lambda: {k: 0 for k in LEMMAS})
    failures: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "iterations": self.iterations,
            "seed": self.seed,
            "checked": self.checked,
            "passed": self.passed,
            "failures": self.failures,
        }


def _values(rng: random.Random, n: int) -> list[int]:
    return [rng.randint(-3, 3) for _ in range(n)]


def random_case(rng: random.Random, pattern: str | None = None) -> Case:
    pattern = pattern or rng.choice(PATTERNS)
    sizes = [rng.randint(2, 6) for _ in range(3)]
    if pattern == "independent":
        space = uvar.SampleSpace.product(*(range(n) for n in sizes))
        a, b, c = (_values(rng, n) for n in sizes)
        xs = [a[i] for i, _, _ in space.outcomes]
        ys = [b[j] for _, j, _ in space.outcomes]
        zs = [c[k] for _, _, k in space.outcomes]
    elif pattern == "diagonal":
        n = sizes[0]
        space = uvar.SampleSpace.of_size(n)
        xs, ys, zs = _values(rng, n), _values(rng, n), _values(rng, n)
    elif pattern == "functional":
        space = uvar.SampleSpace.product(range(sizes[0]), range(sizes[1]))
        a, c = _values(rng, sizes[0]), _values(rng, sizes[1])
        table = {(p, q): rng.randint(-3, 3) for p in range(-3, 4) for q in range(-3, 4)}
        xs = [a[i] for i, _ in space.outcomes]
        zs = [c[j] for _, j in space.outcomes]
        ys = [table[(xv, zv)] for xv, zv in zip(xs, zs)]
    elif pattern == "partial":
        full = list(uvar.SampleSpace.product(*(range(n) for n in sizes)).outcomes)
        kept = [o for o in full if rng.random() < 0.6] or [rng.choice(full)]
        space = uvar.SampleSpace(tuple(kept))
        a, b, c = (_values(rng, n) for n in sizes)
        xs = [a[i] for i, _, _ in kept]
        ys = [b[j] for _, j, _ in kept]
        zs = [c[k] for _, _, k in kept]
    else:
        raise ValueError(f"unknown coupling pattern {pattern!r}")
    if len(space) > MAX_OUTCOMES:
        raise ValueError("case exceeds the outcome cap")
    return Case(
        pattern,
        space,
        uvar.UncertainVariable(space, xs),
        uvar.UncertainVariable(space, ys),
        uvar.UncertainVariable(space, zs),
    )


def _random_map(rng: random.Random) -> dict:
    # deliberately non-injective: 7 inputs onto at most 4 outputs
    return {v: rng.randint(-2, 1) for v in range(-3, 4)}


def _scan(u, v, v_obs) -> frozenset:
    """Definition-level conditional range, independent of the ops under test."""
    return frozenset(a for a, b in zip(u.values, v.values) if b == v_obs)


def check_case(case: Case, rng: random.Random, ops=uvar) -> dict[str, bool | None]:
    """Evaluate every identity on one case. ``None`` marks a vacuous check."""
    x, y, z = case.x, case.y, case.z
    rx, ry = frozenset(x.values), frozenset(y.values)
    res: dict[str, bool | None] = {}

    res["total_range"] = ops.total_range_union(x, y) == rx and ops.total_range_union(y, x) == ry

    res["bayes"] = all(
        ops.bayes_posterior(ops.range_of(x), lambda a: ops.conditional_range(y, x, a), yo)
        == _scan(x, y, yo)
        for yo in ry
    )

    res["posterior_subset"] = all(ops.conditional_range(x, y, yo) <= rx for yo in ry)

    jr = ops.joint_range(x, y)
    by_y = frozenset((a, yo) for yo in ry for a in _scan(x, y, yo))
    by_x = frozenset((xo, b) for xo in rx for b in _scan(y, x, xo))
    res["joint_reconstruction"] = jr == by_y == by_x

    eq7 = all(_scan(x, y, yo) == rx for yo in ry)
    res["unrelated_equiv"] = ops.check_unrelated([x, y]) == eq7

    yz = uvar.joint(y, z)
    eq8 = all(_scan(x, yz, (b, c)) == _scan(x, z, c) for b, c in frozenset(yz.values))
    res["cond_unrelated_equiv"] = ops.check_conditionally_unrelated([x, y], z) == eq8

    h = _random_map(rng)
    hx = ops.pushforward(h, x)
    res["pushforward_commutes"] = all(
        ops.conditional_range(hx, y, yo) == frozenset(h[a] for a in _scan(x, y, yo)) for yo in ry
    )

    if eq7:
        h1, h2 = _random_map(rng), _random_map(rng)
        res["unrelatedness_invariance"] = ops.check_unrelated([ops.pushforward(h1, x), ops.pushforward(h2, y)])
    else:
        res["unrelatedness_invariance"] = None
    return res


def run_lemma_suite(iterations: int = 1000, seed: int = 0, ops: ModuleType | SimpleNamespace = uvar) -> LemmaReport:
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    rng = random.Random(seed)
    report = LemmaReport(iterations, seed)
    t0 = time.perf_counter()
    for it in range(iterations):
        case = random_case(rng, PATTERNS[it % len(PATTERNS)])
        try:
            results = check_case(case, rng, ops)
        except Exception as err:  # a crashing build counts as a failure of every lemma
            results = {k: False for k in LEMMAS}
            results["error"] = repr(err)  # type: ignore[assignment]
        for name in LEMMAS:
            r = results[name]
            if r is None:
                continue
            report.checked[name] += 1
            if r:
                report.passed[name] += 1
            else:
                report.failures.append({"iteration": it, "lemma": name, "case": case.to_json()})
    report.elapsed = time.perf_counter() - t0
    return report


def format_report(report: LemmaReport) -> str:
    lines = [f"lemma-check: {report.iterations} iterations, seed {report.seed}"]
    for name in LEMMAS:
        lines.append(f"  {name:<26} {report.passed[name]:>6}/{report.checked[name]:<6}")
    lines.append(f"failures: {len(report.failures)}")
    return "\n".join(lines) + "\n"
