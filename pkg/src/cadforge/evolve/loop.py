"""The propose-execute-filter loop over shape tuples.

Each iteration samples parents, asks the proposer for child metadata,
synthesizes code with retrieval context, and runs staged validation
(execution, geometry, visual-text agreement) with targeted repair. Only
survivors join the pool. Per-proposal terminal outcomes partition into
invalid / non_novel / accepted / repair_exhausted.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyPoolError, EvalError, OutOfDomainError
from ..kernel import Aabb, DEFAULT_DOMAIN, try_evaluate
from ..lang import parse
from ..propose.base import (
    ChildMeta,
    ProposeRequest,
    RepairRequest,
    SynthesizeRequest,
    VerifyRequest,
)
from ..render import render_grid, write_pgm
from ..traceslice import to_script, trace
from .pool import Pool, ShapeTuple
from .retrieve import retrieve_neighbors

logger = logging.getLogger(__name__)


@dataclass
class EvolveConfig:
    parents_k: int = 3          # K parents sampled per iteration
    children_k: int = 4         # k children proposed
    neighbors_m: int = 3        # retrieval size
    repairs: int = 2
    seed: int = 0
    resolution: int = 128
    domain: Aabb = DEFAULT_DOMAIN
    montage_views: int = 7
    acceptance_floor: float = 0.05
    floor_window: int = 20


@dataclass
class IterationStats:
    iteration: int
    proposed: int = 0
    invalid: int = 0
    non_novel: int = 0
    accepted: int = 0
    repair_exhausted: int = 0
    repairs_used: int = 0

    def partition_holds(self) -> bool:
        return self.proposed == (
            self.invalid + self.non_novel + self.accepted + self.repair_exhausted
        )

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "proposed": self.proposed,
            "invalid": self.invalid,
            "non_novel": self.non_novel,
            "accepted": self.accepted,
            "repair_exhausted": self.repair_exhausted,
            "repairs_used": self.repairs_used,
        }


def sample_parents(pool: Pool, k: int, rng: np.random.Generator):
    """Uniform parent ids; without replacement unless the pool is small."""
    ids = pool.ids()
    if not ids:
        raise EmptyPoolError("cannot sample parents from an empty pool")
    if len(ids) < k:
        picks = rng.integers(0, len(ids), size=k)
        return [ids[int(i)] for i in picks]
    picks = rng.choice(len(ids), size=k, replace=False)
    return [ids[int(i)] for i in picks]


@dataclass
class ValidationOutcome:
    ok: bool
    stage: str = ""
    diagnostic: str = ""
    solid: object = None


def validate_child(code: str, proposer, child: ChildMeta, cfg: EvolveConfig) -> ValidationOutcome:
    """Staged validation: compile+trace on defaults, geometry checks, then
    visual-text agreement on a multi-view montage."""
    try:
        generator = parse(code)
        if not hasattr(generator, "params"):
            raise EvalError("proposals must be parametric generators")
        script = to_script(trace(generator, {}))
    except (Exception,) as err:  # parse/trace failures are execution failures
        return ValidationOutcome(False, "execution", str(err))
    solid, report = try_evaluate(script, cfg.resolution, cfg.domain)
    if solid is None:
        return ValidationOutcome(False, "execution", report.failure_reason or "runtime error")
    if not report.success:
        diag = report.failure_reason or "invalid geometry"
        if report.solid_count != 1:
            diag = f"{report.solid_count} disjoint solids; exactly one required"
        return ValidationOutcome(False, "geometry", diag)
    try:
        montage = write_pgm(render_grid(solid, cfg.montage_views))
    except OutOfDomainError as err:
        return ValidationOutcome(False, "geometry", f"out of working cube: {err}")
    verdict = proposer.verify(VerifyRequest(child, montage))
    if not verdict.agree:
        return ValidationOutcome(False, "agreement", verdict.critique or "verifier disagreed")
    return ValidationOutcome(True, solid=solid)


def run_iteration(pool: Pool, proposer, cfg: EvolveConfig, iteration: int,
                  rng: np.random.Generator):
    """One propose-execute-filter round; mutates the pool only on admission."""
    stats = IterationStats(iteration)
    parent_ids = sample_parents(pool, cfg.parents_k, rng)
    parent_meta = tuple(
        ChildMeta(
            pool.tuples[pid].name,
            pool.tuples[pid].abstract,
            pool.tuples[pid].detailed,
            (),
        )
        for pid in parent_ids
    )
    children = proposer.propose_metadata(ProposeRequest(parent_meta, cfg.children_k))
    known_codes = set(t.code for t in pool.tuples.values())

    for child in children:
        stats.proposed += 1
        neighbor_ids = retrieve_neighbors(pool, child.detailed, cfg.neighbors_m)
        context = tuple(
            [pool.tuples[pid].code for pid in parent_ids]
            + [pool.tuples[nid].code for nid in neighbor_ids if nid not in parent_ids]
        )
        code = proposer.synthesize_code(SynthesizeRequest(child, context))
        if code in known_codes:
            stats.non_novel += 1
            continue

        outcome = validate_child(code, proposer, child, cfg)
        attempts = 0
        while not outcome.ok and attempts < cfg.repairs:
            attempts += 1
            stats.repairs_used += 1
            code = proposer.repair(RepairRequest(code, outcome.stage, outcome.diagnostic))
            if code in known_codes:
                break
            outcome = validate_child(code, proposer, child, cfg)

        if outcome.ok and code not in known_codes:
            name_to_id = {pool.tuples[pid].name: pid for pid in parent_ids}
            parents = [name_to_id[n] for n in child.parents if n in name_to_id]
            pool.add(
                ShapeTuple(child.name, child.abstract, child.detailed, code, parents),
                generation=iteration,
            )
            known_codes.add(code)
            stats.accepted += 1
        elif code in known_codes and not outcome.ok:
            stats.non_novel += 1
        elif outcome.stage == "agreement":
            stats.repair_exhausted += 1
        else:
            stats.invalid += 1
    return pool, stats


def run(pool: Pool, proposer, cfg: EvolveConfig = None, budget_iterations: int = 50,
        accepted_target: int = None):
    """Iterate until the budget, the accepted-count target, or acceptance-rate
    saturation (trailing-window rate below the configured floor)."""
    cfg = cfg or EvolveConfig()
    rng = np.random.default_rng(cfg.seed)
    all_stats = []
    for iteration in range(budget_iterations):
        pool, stats = run_iteration(pool, proposer, cfg, iteration, rng)
        all_stats.append(stats)
        if accepted_target is not None and len(pool) >= accepted_target:
            break
        window = all_stats[-cfg.floor_window:]
        if len(window) == cfg.floor_window:
            proposed = sum(s.proposed for s in window)
            accepted = sum(s.accepted for s in window)
            if proposed > 0 and accepted / proposed < cfg.acceptance_floor:
                logger.info("novelty saturated: acceptance %.1f%%", 100 * accepted / proposed)
                break
    return pool, all_stats
