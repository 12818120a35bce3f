"""Quality-diversity parameter search over a generator's design space.

Candidates are penalized for invalidity, leaving the target size window,
escaping the working cube, and landing too close to already-accepted
samples in descriptor space; CMA-ES minimizes the penalty and restarts
from the defaults after every acceptance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import CadforgeError, EvalError, LoopBoundError
from ..kernel import Aabb, DEFAULT_DOMAIN, try_evaluate
from ..lang import emit
from ..traceslice import to_script, trace
from .cma import CmaState

DESCRIPTOR_DIM = 70
SAMPLER_RESOLUTION = 64


@dataclass
class PenaltyConfig:
    invalid_penalty: float = 1e6
    size_min: float = 60.0
    size_max: float = 200.0
    cube_half: float = 100.0
    w_size: float = 1.0
    w_cube: float = 1.0
    w_novelty: float = 1.0
    epsilon: float = 0.05

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


def descriptor(solid, report) -> np.ndarray:
    """70-dim shape descriptor, deterministic in the voxel solid.

    Layout: normalized AABB extents (3), fill fraction (1), 4x4x4 coarse
    occupancy over the AABB (64), normalized log-volume (1), clipped
    component count (1). Every component lies in [0, 1].
    """
    aabb = report.aabb
    domain = solid.domain
    side = domain.sizes[0]
    extents = np.array(aabb.sizes) / side

    occ = solid.occupancy
    bounds = solid.index_bounds()
    lo = [b[0] for b in bounds]
    hi = [b[1] + 1 for b in bounds]
    crop = occ[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]]
    fill = float(crop.mean())

    coarse = np.zeros((4, 4, 4))
    splits = [np.array_split(np.arange(crop.shape[a]), 4) for a in range(3)]
    for i in range(4):
        for j in range(4):
            for k in range(4):
                block = crop[np.ix_(splits[0][i], splits[1][j], splits[2][k])]
                coarse[i, j, k] = block.mean() if block.size else 0.0

    log_vol = math.log10(max(solid.volume, 1e-9)) / math.log10(side ** 3)
    comp = min(report.solid_count, 8) / 8.0
    return np.concatenate(
        [extents, [fill], coarse.ravel(), [log_vol], [comp]]
    )


@dataclass
class Archive:
    epsilon: float
    entries: list = field(default_factory=list)  # (z, descriptor, script_text)

    def min_distance(self, desc: np.ndarray) -> float:
        if not self.entries:
            return math.inf
        return min(float(np.linalg.norm(desc - e[1])) for e in self.entries)

    def insert(self, z: np.ndarray, desc: np.ndarray, script_text: str):
        if self.min_distance(desc) < self.epsilon:
            raise CadforgeError("archive novelty invariant violated on insert")
        self.entries.append((np.asarray(z, dtype=np.float64).copy(), desc.copy(), script_text))

    def __len__(self):
        return len(self.entries)


def _evaluate_candidate(generator, z_vec, param_names, resolution, domain):
    """Trace + evaluate; returns (solid, report, script) or None on failure."""
    z = {name: float(v) for name, v in zip(param_names, z_vec)}
    try:
        t = trace(generator, z)
    except (EvalError, LoopBoundError):
        return None
    script = to_script(t)
    solid, report = try_evaluate(script, resolution, domain)
    if solid is None or not report.success:
        return None
    return solid, report, script


def penalty(
    generator,
    z_vec,
    archive: Archive,
    cfg: PenaltyConfig = None,
    resolution: int = SAMPLER_RESOLUTION,
    domain: Aabb = DEFAULT_DOMAIN,
) -> float:
    """Scalar fitness: large for invalid, soft size/cube/novelty terms else."""
    cfg = cfg or PenaltyConfig()
    names = [p.name for p in generator.params]
    outcome = _evaluate_candidate(generator, z_vec, names, resolution, domain)
    if outcome is None:
        return cfg.invalid_penalty
    solid, report, _ = outcome
    return _soft_penalty(solid, report, archive, cfg)


def _soft_penalty(solid, report, archive, cfg) -> float:
    aabb = report.aabb
    side = aabb.longest_side
    soft = cfg.w_size * (max(0.0, cfg.size_min - side) + max(0.0, side - cfg.size_max))
    overshoot = 0.0
    for axis in range(3):
        overshoot += max(0.0, aabb.max[axis] - cfg.cube_half)
        overshoot += max(0.0, -cfg.cube_half - aabb.min[axis])
    soft += cfg.w_cube * overshoot
    d_min = archive.min_distance(descriptor(solid, report))
    if math.isfinite(d_min):
        soft += cfg.w_novelty * max(0.0, cfg.epsilon - d_min) / cfg.epsilon
    return soft


@dataclass
class SampleResult:
    archive: Archive
    evals: int = 0
    accepted: int = 0
    zero_accepted: bool = False
    restarts: int = 0


def sample_generator(
    generator,
    n_samples: int = 15,
    cfg: PenaltyConfig = None,
    budget: int = 5000,
    seed: int = 0,
    resolution: int = SAMPLER_RESOLUTION,
    domain: Aabb = DEFAULT_DOMAIN,
) -> SampleResult:
    """Collect up to n_samples valid, mutually novel parameter vectors.

    CMA-ES starts at the declared defaults with per-coordinate scaling
    0.2*|default| + 1 and restarts from the defaults after each acceptance.
    Fully deterministic for a fixed seed.
    """
    cfg = cfg or PenaltyConfig()
    names = [p.name for p in generator.params]
    defaults = np.array([p.default for p in generator.params], dtype=np.float64)
    result = SampleResult(Archive(cfg.epsilon))

    def consider(z_vec) -> float:
        """Evaluate one candidate; accept into the archive on zero penalty."""
        result.evals += 1
        outcome = _evaluate_candidate(generator, z_vec, names, resolution, domain)
        if outcome is None:
            return cfg.invalid_penalty
        solid, report, script = outcome
        value = _soft_penalty(solid, report, archive=result.archive, cfg=cfg)
        if value == 0.0 and len(result.archive) < n_samples:
            result.archive.insert(z_vec, descriptor(solid, report), emit(script))
            result.accepted += 1
        return value

    # The defaults themselves are the first candidate.
    first = consider(defaults)
    if first >= cfg.invalid_penalty:
        result.zero_accepted = True

    scales = 0.2 * np.abs(defaults) + 1.0
    while result.accepted < n_samples and result.evals < budget:
        state = CmaState.init(
            defaults, 1.0,
            seed=int(np.random.default_rng((seed, result.restarts)).integers(2 ** 31)),
            cov=np.diag(scales ** 2),
        )
        result.restarts += 1
        accepted_before = result.accepted
        while result.accepted == accepted_before and result.evals < budget:
            candidates = state.ask()
            values = []
            for cand in candidates:
                if result.evals >= budget or result.accepted > accepted_before:
                    values.append(cfg.invalid_penalty)
                    continue
                values.append(consider(cand))
            state.tell(candidates, values)
            if state.sigma > 1e6 or state.generation > 500:
                break

    result.zero_accepted = result.accepted == 0
    return result
