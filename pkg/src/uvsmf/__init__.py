"""Set-membership filtering with uncertain variables.

Submodules:

``uvar``
    exact range calculus on finite sample spaces
``geom``
    intervals, polygons, halfspace polytopes
``models`` / ``smf``
    system models and the classical, optimal and projection-based filters
``oracle``
    Monte Carlo, grid and LP ground truths
``experiments`` / ``cli``
    seeded reproductions of the two benchmark systems
"""

from .geom import Box, Halfspace, Interval, Polygon, PolytopeH
from .models import (
    AugmentedModel,
    LinearModel,
    NonlinearModel,
    ScalarLinearModel,
    SystemModel,
    augment,
    example_b_model,
)
from .smf import FilterTrace, InconsistentMeasurement, outer_bound_assert, run_filter

__version__ = "0.1.0"

__all__ = [
    "AugmentedModel",
    "Box",
    "FilterTrace",
    "Halfspace",
    "InconsistentMeasurement",
    "Interval",
    "LinearModel",
    "NonlinearModel",
    "Polygon",
    "PolytopeH",
    "ScalarLinearModel",
    "SystemModel",
    "augment",
    "example_b_model",
    "outer_bound_assert",
    "run_filter",
]
