"""Quality-diversity sampling: CMA-ES search with a novelty archive."""

from .cma import CmaState, cma_step, default_popsize, minimize
from .sampler import (
    Archive,
    DESCRIPTOR_DIM,
    PenaltyConfig,
    SampleResult,
    descriptor,
    penalty,
    sample_generator,
)

__all__ = [
    "Archive", "CmaState", "DESCRIPTOR_DIM", "PenaltyConfig", "SampleResult",
    "cma_step", "default_popsize", "descriptor", "minimize", "penalty",
    "sample_generator",
]
