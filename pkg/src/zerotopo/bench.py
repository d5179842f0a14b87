"""Detection-power and reconstruction benchmarks with exact binomial CIs.

Seeds: noise reference replicate j uses ``NoiseModel(seed=root + j)`` on
stream 0; trial i uses ``NoiseModel(seed=root + i)`` on stream 1, shared
across SNRs.  Streams are independent, so trials never reuse reference
noise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.stats import beta

from .pipeline import AnalysisConfig, analyze
from .reconstruct import denoise_analysis
from .signal import NoiseModel, mix_at_snr, qrf, synth, white_noise
from .stats import (
    AlphaSchedule,
    analysis_statistics,
    apf,
    apf_envelope_test,
    build_noise_references,
    p_values,
    simultaneous_test,
)

__all__ = [
    "clopper_pearson",
    "POWER_METHODS",
    "BenchScenario",
    "power_bench",
    "reconstruction_bench",
    "rows_to_csv",
]

TRIAL_STREAM = 1

# method -> (statistic, test); "first" tests p_1 < alpha alone
POWER_METHODS: Dict[str, Tuple[str, str]] = {
    "first-dist": ("dist", "first"),
    "bonferroni-dist": ("dist", "bonferroni"),
    "first-energy-mv": ("energy_mv", "first"),
    "bonferroni-energy-mv": ("energy_mv", "bonferroni"),
    "first-energy-sv": ("energy_sv", "first"),
    "bonferroni-energy-sv": ("energy_sv", "bonferroni"),
    "apf": ("apf", "envelope"),
}


def clopper_pearson(k: int, n: int, conf: float = 0.95) -> Tuple[float, float]:
    """Exact binomial interval from Beta quantiles."""
    if n < 1 or not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n and n >= 1")
    a = 1.0 - conf
    lo = 0.0 if k == 0 else float(beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


@dataclass(frozen=True)
class BenchScenario:
    snrs: Sequence[float] = (-5.0, 0.0, 5.0, 10.0)
    trials: int = 200
    signal: str = "chirp"
    methods: Sequence[str] = tuple(POWER_METHODS)
    N: int = 1024
    B: int = 200
    K: int = 5
    alpha: float = 0.05
    L: int = 99
    seed: int = 0
    config: AnalysisConfig = field(default_factory=AnalysisConfig)
    cache_dir: str = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not len(self.snrs):
            raise ValueError("SNR grid must be nonempty")
        for m in self.methods:
            if m not in POWER_METHODS:
                raise ValueError(f"unknown method {m!r}")


def _null_apf_curves(sc: BenchScenario):
    # null diagrams on their own stream so they do not repeat reference noise
    curves = []
    for j in range(1, sc.L + 1):
        x = white_noise(sc.N, NoiseModel("real", 1.0, sc.seed + j), stream=2)
        curves.append(apf(analyze(x, sc.config).pairs))
    return curves


def power_bench(sc: BenchScenario) -> List[dict]:
    """One row per (method, SNR) with the detection rate and its 95% CI."""
    kinds = sorted({POWER_METHODS[m][0] for m in sc.methods} - {"apf"})
    refs = build_noise_references(sc.N, sc.config, sc.B, sc.K, kinds, sc.seed, cache_dir=sc.cache_dir)
    null_curves = _null_apf_curves(sc) if "apf" in sc.methods else None
    bonf = AlphaSchedule(sc.alpha, "bonferroni", K=sc.K)
    f = synth(sc.signal, sc.N)
    hits = {(m, s): 0 for m in sc.methods for s in sc.snrs}
    for snr in sc.snrs:
        for i in range(sc.trials):
            h = mix_at_snr(f, NoiseModel("real", 1.0, sc.seed + i), snr, stream=TRIAL_STREAM)
            an = analyze(h, sc.config)
            stats = analysis_statistics(an, kinds, sc.K)
            pv = {k: p_values(stats[k], refs[k]) for k in kinds}
            for m in sc.methods:
                kind, test = POWER_METHODS[m]
                if test == "first":
                    hit = pv[kind][0] < sc.alpha
                elif test == "bonferroni":
                    hit = simultaneous_test(pv[kind], bonf)
                else:
                    hit = apf_envelope_test(apf(an.pairs), sc.L, sc.alpha, null_curves)
                hits[(m, snr)] += int(hit)
    rows = []
    for m in sc.methods:
        for snr in sc.snrs:
            k = hits[(m, snr)]
            lo, hi = clopper_pearson(k, sc.trials)
            rows.append({"method": m, "snr": snr, "detections": k, "trials": sc.trials,
                         "power": k / sc.trials, "ci_low": lo, "ci_high": hi})
    return rows


def reconstruction_bench(
    sc: BenchScenario,
    alphas: Sequence[float] = (0.05, 0.15),
    volume_kinds: Sequence[str] = ("mv", "sv"),
    statistic: str = "energy_sv",
) -> List[dict]:
    """Mean QRF and QRF - SNR gain per (volume kind, alpha, SNR), with a
    normal 95% CI on the mean gain."""
    ref = build_noise_references(sc.N, sc.config, sc.B, sc.K, (statistic,), sc.seed, cache_dir=sc.cache_dir)[statistic]
    f = synth(sc.signal, sc.N)
    res = {(v, a, s): [] for v in volume_kinds for a in alphas for s in sc.snrs}
    holes = {key: [] for key in res}
    for snr in sc.snrs:
        for i in range(sc.trials):
            h = mix_at_snr(f, NoiseModel("real", 1.0, sc.seed + i), snr, stream=TRIAL_STREAM)
            an = analyze(h, sc.config)
            for v in volume_kinds:
                for a in alphas:
                    sched = AlphaSchedule(a, "polynomial", m=1.0)
                    out, rep = denoise_analysis(an, ref, statistic, sched, v)
                    res[(v, a, snr)].append(qrf(f, out))
                    holes[(v, a, snr)].append(rep.n_holes)
    rows = []
    for (v, a, snr), q in res.items():
        q = np.asarray(q)
        gain = q - snr
        se = gain.std(ddof=1) / np.sqrt(len(gain)) if len(gain) > 1 else 0.0
        rows.append({"volumes": v, "alpha": a, "snr": snr, "trials": len(q),
                     "mean_qrf": float(q.mean()), "mean_gain": float(gain.mean()),
                     "ci_low": float(gain.mean() - 1.96 * se), "ci_high": float(gain.mean() + 1.96 * se),
                     "mean_n_holes": float(np.mean(holes[(v, a, snr)]))})
    return rows


def rows_to_csv(rows: List[dict]) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c]) for c in cols))
    return "\n".join(lines) + "\n"
