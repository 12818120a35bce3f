"""Covariance matrix adaptation evolution strategy, (mu/mu_w, lambda) form.

Plain numpy implementation of the standard update equations with
rank-one + rank-mu covariance adaptation and cumulative step-size control.
The covariance keeps an eigenvalue floor so it stays SPD throughout.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

EIGEN_FLOOR = 1e-14


def default_popsize(n: int) -> int:
    return 4 + int(3 * math.log(n))


@dataclass
class CmaState:
    mean: np.ndarray
    sigma: float
    cov: np.ndarray
    p_sigma: np.ndarray
    p_c: np.ndarray
    weights: np.ndarray
    mu: int
    mueff: float
    cc: float
    cs: float
    c1: float
    cmu: float
    damps: float
    chi_n: float
    popsize: int
    generation: int = 0
    evals: int = 0
    rng: np.random.Generator = field(default_factory=np.random.default_rng)
    best_value: float = math.inf
    best_x: np.ndarray = None

    @staticmethod
    def init(mean, sigma: float, seed: int = 0, popsize: int = None, cov=None) -> "CmaState":
        mean = np.asarray(mean, dtype=np.float64).copy()
        n = mean.size
        lam = popsize or default_popsize(n)
        mu = lam // 2
        raw = np.log((lam + 1) / 2.0) - np.log(np.arange(1, mu + 1))
        weights = raw / raw.sum()
        mueff = float(weights.sum() ** 2 / (weights ** 2).sum())
        cc = (4.0 + mueff / n) / (n + 4.0 + 2.0 * mueff / n)
        cs = (mueff + 2.0) / (n + mueff + 5.0)
        c1 = 2.0 / ((n + 1.3) ** 2 + mueff)
        cmu = min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((n + 2.0) ** 2 + mueff))
        damps = 1.0 + 2.0 * max(0.0, math.sqrt((mueff - 1.0) / (n + 1.0)) - 1.0) + cs
        chi_n = math.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))
        cov = np.eye(n) if cov is None else np.asarray(cov, dtype=np.float64).copy()
        return CmaState(
            mean=mean, sigma=float(sigma), cov=cov,
            p_sigma=np.zeros(n), p_c=np.zeros(n),
            weights=weights, mu=mu, mueff=mueff,
            cc=cc, cs=cs, c1=c1, cmu=cmu, damps=damps, chi_n=chi_n,
            popsize=lam, rng=np.random.default_rng(seed),
        )

    @property
    def dim(self) -> int:
        return self.mean.size

    def _decompose(self):
        cov = (self.cov + self.cov.T) / 2.0
        try:
            eigvals, eigvecs = np.linalg.eigh(cov)
        except np.linalg.LinAlgError:
            raise FloatingPointError("covariance eigendecomposition failed")
        if not np.all(np.isfinite(eigvals)):
            raise FloatingPointError("covariance has non-finite eigenvalues")
        # Relative floor: an absolute one drowns in float error once the
        # spectral radius grows (reconstruction noise ~ norm * 1e-16).
        floor = max(EIGEN_FLOOR, float(eigvals[-1]) * EIGEN_FLOOR)
        eigvals = np.maximum(eigvals, floor)
        self.cov = (eigvecs * eigvals) @ eigvecs.T
        return eigvals, eigvecs

    def _reset_degenerate(self):
        logger.warning("degenerate covariance: resetting to identity, halving sigma")
        self.cov = np.eye(self.dim)
        self.p_sigma[:] = 0.0
        self.p_c[:] = 0.0
        self.sigma = max(self.sigma / 2.0, 1e-30)

    def ask(self) -> np.ndarray:
        try:
            eigvals, eigvecs = self._decompose()
        except FloatingPointError:
            self._reset_degenerate()
            eigvals, eigvecs = self._decompose()
        z = self.rng.standard_normal((self.popsize, self.dim))
        y = z * np.sqrt(eigvals) @ eigvecs.T
        return self.mean + self.sigma * y

    def tell(self, candidates: np.ndarray, values):
        values = np.asarray(values, dtype=np.float64)
        order = np.argsort(values, kind="stable")
        best = candidates[order[0]]
        if values[order[0]] < self.best_value:
            self.best_value = float(values[order[0]])
            self.best_x = best.copy()

        n = self.dim
        old_mean = self.mean
        selected = candidates[order[: self.mu]]
        self.mean = self.weights @ selected
        y_w = (self.mean - old_mean) / self.sigma

        eigvals, eigvecs = self._decompose()
        inv_sqrt = (eigvecs / np.sqrt(eigvals)) @ eigvecs.T
        self.p_sigma = (1.0 - self.cs) * self.p_sigma + math.sqrt(
            self.cs * (2.0 - self.cs) * self.mueff
        ) * (inv_sqrt @ y_w)

        self.generation += 1
        self.evals += len(values)
        ps_norm = float(np.linalg.norm(self.p_sigma))
        expo = 2.0 * self.generation
        hsig = ps_norm / math.sqrt(1.0 - (1.0 - self.cs) ** expo) / self.chi_n \
            < 1.4 + 2.0 / (n + 1.0)
        self.p_c = (1.0 - self.cc) * self.p_c + (
            math.sqrt(self.cc * (2.0 - self.cc) * self.mueff) * y_w if hsig else 0.0
        )

        ys = (selected - old_mean) / self.sigma
        rank_mu = (ys.T * self.weights) @ ys
        c1a = self.c1 * (1.0 - (0.0 if hsig else self.cc * (2.0 - self.cc)))
        self.cov = (
            (1.0 - c1a - self.cmu) * self.cov
            + self.c1 * np.outer(self.p_c, self.p_c)
            + self.cmu * rank_mu
        )
        self.sigma *= math.exp(min(1.0, (self.cs / self.damps) * (ps_norm / self.chi_n - 1.0)))
        if not (np.all(np.isfinite(self.cov)) and math.isfinite(self.sigma) and self.sigma > 0):
            self._reset_degenerate()
            return
        # Re-symmetrize and floor so the stored covariance stays SPD.
        try:
            self._decompose()
        except FloatingPointError:
            self._reset_degenerate()


def cma_step(state: CmaState, objective) -> CmaState:
    """One generation: sample, rank by the objective, update in place."""
    candidates = state.ask()
    values = [float(objective(c)) for c in candidates]
    state.tell(candidates, values)
    return state


def minimize(objective, x0, sigma0: float, seed: int = 0, max_generations: int = 1000,
             target: float = None, popsize: int = None) -> CmaState:
    """Run cma_step until the target value or the generation cap."""
    state = CmaState.init(x0, sigma0, seed=seed, popsize=popsize)
    for _ in range(max_generations):
        cma_step(state, objective)
        if target is not None and state.best_value < target:
            break
    return state
