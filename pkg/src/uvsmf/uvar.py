"""Uncertain variables over finite sample spaces, with exact values.

An uncertain variable is a total map from a finite sample space to values.
Values must be exact (``int``, ``fractions.Fraction`` or tuples of them), so
every range identity is checked as an exact set equality.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Hashable, Iterable, Mapping, Sequence

ValueSet = frozenset


class UnobservableValue(ValueError):
    """Conditioning on a value the conditioning variable never takes."""


class SpaceMismatch(ValueError):
    pass


@dataclass(frozen=True)
class SampleSpace:
    outcomes: tuple[Hashable, ...]

    def __post_init__(self):
        if len(self.outcomes) == 0:
            raise ValueError("sample space must have at least one outcome")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise ValueError("sample space outcomes must be distinct")

    def __len__(self) -> int:
        return len(self.outcomes)

    @classmethod
    def of_size(cls, n: int) -> "SampleSpace":
        return cls(tuple(range(n)))

    @classmethod
    def product(cls, *factors: Sequence[Hashable]) -> "SampleSpace":
        return cls(tuple(product(*factors)))


def _check_exact(value) -> None:
    if isinstance(value, tuple):
        for v in value:
            _check_exact(v)
    elif isinstance(value, bool) or not isinstance(value, (int, Fraction)):
        raise TypeError(f"uncertain-variable values must be int or Fraction, got {type(value).__name__}")


def _dim(value) -> int:
    return len(value) if isinstance(value, tuple) else 0


class UncertainVariable:
    """Total map outcome -> value on a :class:`SampleSpace`.

    ``values`` is aligned with ``space.outcomes``.
    """

    __slots__ = ("space", "values")

    def __init__(self, space: SampleSpace, values: Sequence | Mapping):
        if isinstance(values, Mapping):
            try:
                values = [values[o] for o in space.outcomes]
            except KeyError as err:
                raise ValueError(f"map is not total: missing outcome {err.args[0]!r}") from None
        values = tuple(values)
        if len(values) != len(space):
            raise ValueError(f"expected {len(space)} values, got {len(values)}")
        dims = set()
        for v in values:
            _check_exact(v)
            dims.add(_dim(v))
        if len(dims) > 1:
            raise ValueError("all values of an uncertain variable must share one dimensionality")
        self.space = space
        self.values = values

    @classmethod
    def from_function(cls, space: SampleSpace, fn: Callable[[Hashable], object]) -> "UncertainVariable":
        return cls(space, [fn(o) for o in space.outcomes])

    def __call__(self, outcome) -> object:
        return self.values[self.space.outcomes.index(outcome)]

    def __repr__(self) -> str:
        return f"UncertainVariable({list(self.values)!r})"

    def to_json(self) -> list:
        return [_json_value(v) for v in self.values]


def _json_value(v):
    if isinstance(v, tuple):
        return [_json_value(x) for x in v]
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    return v


def _same_space(*us: UncertainVariable) -> SampleSpace:
    space = us[0].space
    for u in us[1:]:
        if u.space is not space and u.space != space:
            raise SpaceMismatch("uncertain variables live on different sample spaces")
    return space


def joint(*us: UncertainVariable) -> UncertainVariable:
    """Tuple-valued variable omega -> (u1(omega), ..., ur(omega))."""
    space = _same_space(*us)
    return UncertainVariable(space, list(zip(*(u.values for u in us))))


def range_of(u: UncertainVariable) -> ValueSet:
    return frozenset(u.values)


def joint_range(*us: UncertainVariable) -> ValueSet:
    _same_space(*us)
    return frozenset(zip(*(u.values for u in us)))


def conditional_range(u: UncertainVariable, v: UncertainVariable, v_obs) -> ValueSet:
    """Range of u restricted to outcomes where v equals ``v_obs``."""
    _same_space(u, v)
    out = frozenset(a for a, b in zip(u.values, v.values) if b == v_obs)
    if not out:
        raise UnobservableValue(f"unobservable value {v_obs!r}: not in the range of the conditioning variable")
    return out


def conditional_ranges(u: UncertainVariable, v: UncertainVariable) -> dict:
    """All conditional ranges of u, keyed by each value of v, in one pass."""
    _same_space(u, v)
    groups: dict = defaultdict(set)
    for a, b in zip(u.values, v.values):
        groups[b].add(a)
    return {k: frozenset(s) for k, s in groups.items()}


def bayes_posterior(prior: Iterable, likelihood: Callable | Mapping, y_obs) -> ValueSet:
    """Prior elements whose likelihood range contains the observation.

    ``likelihood`` maps a prior element to the set of measurements it can
    produce. An empty result means the observation is inconsistent.
    """
    lik = likelihood.__getitem__ if isinstance(likelihood, Mapping) else likelihood
    return frozenset(x for x in prior if y_obs in lik(x))


def total_range_union(u: UncertainVariable, v: UncertainVariable) -> ValueSet:
    """Union of the conditional ranges of u over every value of v."""
    out: set = set()
    for s in conditional_ranges(u, v).values():
        out |= s
    return frozenset(out)


def check_unrelated(us: Sequence[UncertainVariable]) -> bool:
    """Joint range equals the Cartesian product of the marginal ranges."""
    if len(us) < 2:
        raise ValueError("unrelatedness needs at least two variables")
    _same_space(*us)
    jr = joint_range(*us)
    size = 1
    for u in us:
        size *= len(range_of(u))
    # jr is always a subset of the product, so equal cardinality suffices
    return len(jr) == size


def check_conditionally_unrelated(us: Sequence[UncertainVariable], given: UncertainVariable) -> bool:
    """Product decomposition of the conditional joint range for every value of ``given``."""
    if len(us) < 2:
        raise ValueError("conditional unrelatedness needs at least two variables")
    _same_space(*us, given)
    j = joint(*us)
    joint_cond = conditional_ranges(j, given)
    marg_cond = [conditional_ranges(u, given) for u in us]
    for g, jr in joint_cond.items():
        size = 1
        for mc in marg_cond:
            size *= len(mc[g])
        if len(jr) != size:
            return False
    return True


def pushforward(h: Callable | Mapping, u: UncertainVariable) -> UncertainVariable:
    fn = h.__getitem__ if isinstance(h, Mapping) else h
    cache: dict = {}
    out = []
    for a in u.values:
        if a not in cache:
            cache[a] = fn(a)
        out.append(cache[a])
    return UncertainVariable(u.space, out)


def cartesian(*sets: Iterable) -> ValueSet:
    return frozenset(product(*sets))


def grid(lo, hi, step) -> list[Fraction]:
    """Exact grid lo, lo+step, ..., hi (hi must be reachable)."""
    lo, hi, step = Fraction(lo), Fraction(hi), Fraction(step)
    n = (hi - lo) / step
    if n.denominator != 1 or n < 0:
        raise ValueError(f"[{lo}, {hi}] is not a whole number of steps of {step}")
    return [lo + i * step for i in range(int(n) + 1)]
