"""Propose-execute-filter evolution over shape tuples."""

from .loop import (
    EvolveConfig,
    IterationStats,
    run,
    run_iteration,
    sample_parents,
    validate_child,
)
from .pool import Pool, ShapeTuple
from .retrieve import retrieve_neighbors

__all__ = [
    "EvolveConfig", "IterationStats", "Pool", "ShapeTuple",
    "retrieve_neighbors", "run", "run_iteration", "sample_parents",
    "validate_child",
]
