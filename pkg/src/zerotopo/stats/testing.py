"""α-schedules, the simultaneous and sequential multiple tests, and reports."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "AlphaSchedule",
    "alpha_at",
    "simultaneous_test",
    "sequential_hole_count",
    "TestReport",
]

RULES = ("bonferroni", "polynomial", "geometric")


@dataclass(frozen=True)
class AlphaSchedule:
    """Per-test levels: bonferroni α/K, polynomial α/k^m, geometric α β^k."""

    alpha: float = 0.05
    rule: str = "bonferroni"
    K: Optional[int] = None
    m: float = 1.0
    beta: float = 0.5

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.rule not in RULES:
            raise ValueError(f"unknown schedule {self.rule!r}; expected one of {RULES}")
        if self.rule == "bonferroni" and (self.K is None or self.K < 1):
            raise ValueError("bonferroni schedule needs K >= 1")
        if self.rule == "polynomial" and self.m < 0:
            raise ValueError("polynomial exponent m must be >= 0")
        if self.rule == "geometric" and not 0 < self.beta < 1:
            raise ValueError("geometric beta must lie in (0, 1)")

    def levels(self, K: int) -> np.ndarray:
        return np.array([alpha_at(self, k) for k in range(1, K + 1)])

    def to_dict(self) -> dict:
        d = {"alpha": self.alpha, "rule": self.rule}
        if self.rule == "bonferroni":
            d["K"] = self.K
        elif self.rule == "polynomial":
            d["m"] = self.m
        else:
            d["beta"] = self.beta
        return d


def alpha_at(schedule: AlphaSchedule, k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    a = schedule.alpha
    if schedule.rule == "bonferroni":
        return a / schedule.K
    if schedule.rule == "polynomial":
        return a / k ** schedule.m
    return a * schedule.beta ** k


def simultaneous_test(pvals: Sequence[float], schedule: AlphaSchedule) -> bool:
    """Detect iff ``p_k < alpha_k`` for some k."""
    p = np.asarray(pvals, dtype=float)
    return bool(np.any(p < schedule.levels(len(p))))


def sequential_hole_count(pvals: Sequence[float], schedule: AlphaSchedule) -> Tuple[int, np.ndarray]:
    """``n = min{k >= 0 : p_{k+1} >= alpha_{k+1}}``, or K if every test rejects.

    Returns ``(n, alphas)``.
    """
    p = np.asarray(pvals, dtype=float)
    alphas = schedule.levels(len(p))
    fails = np.nonzero(p >= alphas)[0]
    n = int(fails[0]) if len(fails) else len(p)
    return n, alphas


@dataclass
class TestReport:
    __test__ = False  # keep pytest from collecting this class

    pvalues: List[float]
    alphas: List[float]
    decision: str  # "detected" | "not-detected"
    n_holes: int
    schedule: dict
    statistic: str
    components: List[dict] = field(default_factory=list)

    @property
    def detected(self) -> bool:
        return self.decision == "detected"

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)
