"""Synthetic p-value harness for the sequential hole-count estimator.

Steps ``l <= k*`` carry signal: the test there fails (``p_l >= alpha_l``)
with probability ``eps_l``.  Later steps are pure noise with independent
uniform p-values, so ``P(p_l < alpha_l) = alpha_l`` exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .testing import AlphaSchedule

__all__ = ["FwerScenario", "FwerResult", "fwer_harness", "theory_underestimate", "theory_overestimate"]


@dataclass(frozen=True)
class FwerScenario:
    k_star: int
    eps: Sequence[float]  # miss probability at each signal step, length k_star
    schedule: AlphaSchedule
    K: int = 10
    trials: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.k_star < 0 or self.k_star >= self.K:
            raise ValueError("need 0 <= k_star < K")
        if len(self.eps) != self.k_star:
            raise ValueError("eps must have one entry per signal step")
        if any(not 0 <= e <= 1 for e in self.eps):
            raise ValueError("eps entries must lie in [0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class FwerResult:
    p_under: float
    p_over: float
    se_under: float
    se_over: float
    theory_under: float
    theory_over: float
    n_hat_counts: np.ndarray = field(repr=False)


def simulate_pvalues(scenario: FwerScenario, rng: np.random.Generator) -> np.ndarray:
    K, ks = scenario.K, scenario.k_star
    alphas = scenario.schedule.levels(K)
    u = rng.random((scenario.trials, K))
    p = u.copy()
    for l in range(ks):
        a = alphas[l]
        miss = rng.random(scenario.trials) < scenario.eps[l]
        # uniform on [a, 1) on a miss, on [0, a) otherwise
        p[:, l] = np.where(miss, a + (1 - a) * u[:, l], a * u[:, l])
    return p


def theory_underestimate(eps: Sequence[float]) -> float:
    total, surv = 0.0, 1.0
    for e in eps:
        total += e * surv
        surv *= 1 - e
    return total


def theory_overestimate(eps: Sequence[float], alphas: np.ndarray, k_star: int) -> float:
    """``prod(1 - eps) * P(test k*+1 rejects)``; with independent uniform
    p-values the second factor is ``alpha_{k*+1}``."""
    return float(np.prod(1 - np.asarray(eps, dtype=float))) * float(alphas[k_star])


def fwer_harness(scenario: FwerScenario) -> FwerResult:
    rng = np.random.default_rng(scenario.seed)
    p = simulate_pvalues(scenario, rng)
    alphas = scenario.schedule.levels(scenario.K)
    fails = p >= alphas[None, :]
    n_hat = np.where(fails.any(axis=1), fails.argmax(axis=1), scenario.K)
    n = scenario.trials
    under = float(np.mean(n_hat < scenario.k_star))
    over = float(np.mean(n_hat > scenario.k_star))
    return FwerResult(
        p_under=under,
        p_over=over,
        se_under=float(np.sqrt(under * (1 - under) / n)),
        se_over=float(np.sqrt(over * (1 - over) / n)),
        theory_under=theory_underestimate(scenario.eps),
        theory_over=theory_overestimate(scenario.eps, alphas, scenario.k_star),
        n_hat_counts=np.bincount(n_hat, minlength=scenario.K + 1),
    )
