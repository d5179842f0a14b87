"""Accumulated persistence function and the Monte Carlo global envelope test."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

__all__ = ["APFCurve", "apf", "apf_statistics", "apf_envelope_test"]


@dataclass(frozen=True)
class APFCurve:
    """Right-continuous step function ``m -> sum_i l_i 1(m_i <= m)``."""

    knots: np.ndarray  # sorted half-lives m_i (distinct)
    values: np.ndarray  # cumulative total life at each knot

    def __call__(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        idx = np.searchsorted(self.knots, m, side="right") - 1
        out = np.where(idx >= 0, self.values[np.maximum(idx, 0)], 0.0) if len(self.knots) else np.zeros_like(m)
        return out

    @property
    def total(self) -> float:
        return float(self.values[-1]) if len(self.values) else 0.0

    def shifted(self, c: float) -> "APFCurve":
        return APFCurve(self.knots, self.values + c)


def _as_bd(pairs, dim: Optional[int]) -> np.ndarray:
    if len(pairs) and hasattr(pairs[0], "birth"):
        rows = [(p.birth, p.death) for p in pairs if dim is None or p.dim == dim]
    else:
        rows = [tuple(p) for p in pairs]
    bd = np.asarray(rows, dtype=float).reshape(-1, 2)
    return bd[np.isfinite(bd[:, 1])]


def apf(pairs, dim: Optional[int] = None) -> APFCurve:
    """APF of a diagram given as PersistencePairs or ``(birth, death)`` rows.
    Infinite deaths are dropped."""
    bd = _as_bd(pairs, dim)
    mid = (bd[:, 0] + bd[:, 1]) / 2
    life = bd[:, 1] - bd[:, 0]
    knots, inv = np.unique(mid, return_inverse=True)
    jumps = np.bincount(inv.ravel(), weights=life, minlength=len(knots))
    return APFCurve(knots, np.cumsum(jumps))


def apf_statistics(curves: Sequence[APFCurve]) -> np.ndarray:
    """``t_l = max_m (APF_l(m) - mean APF(m))`` over the union of knots,
    the mean taken over all given curves."""
    knots = [c.knots for c in curves if len(c.knots)]
    grid = np.unique(np.concatenate(knots + [np.zeros(1)]))
    vals = np.stack([c(grid) for c in curves])
    return np.max(vals - vals.mean(axis=0), axis=1)


def apf_envelope_test(
    obs_curve: APFCurve,
    L: int,
    alpha: float,
    null_sampler: Union[Callable[[], APFCurve], Sequence[APFCurve]],
    literal: bool = False,
) -> bool:
    """Global envelope test; True means reject.

    ``null_sampler`` is a callable drawing one null curve, or a sequence of
    L null curves.  By default the null is rejected when ``t_0`` is among
    the ``alpha (L + 1)`` largest of ``t_0..t_L`` (ties counted against
    rejection).  ``literal=True`` sorts ``t_1..t_L`` ascending and rejects
    when ``t_0 >= t_(alpha (L + 1))``.
    """
    ell = alpha * (L + 1)
    k = int(round(ell))
    if L < 1 or not 0 < alpha < 1 or abs(ell - k) > 1e-9 or k < 1:
        raise ValueError("alpha * (L + 1) must be a positive integer")
    if callable(null_sampler):
        sims = [null_sampler() for _ in range(L)]
    else:
        sims = list(null_sampler)
        if len(sims) != L:
            raise ValueError(f"expected {L} null curves, got {len(sims)}")
    t = apf_statistics([obs_curve] + sims)
    if literal:
        return bool(t[0] >= np.sort(t[1:])[k - 1])
    return bool(np.count_nonzero(t >= t[0]) <= k)
