"""Signal-domain estimation and masked inverse STFT."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.ndimage import binary_dilation

from .errors import StageError
from .pipeline import Analysis, AnalysisConfig, analyze, volume_for
from .signal import SpectrogramGrid, StftGrid, TimeSeries
from .stats import (
    AlphaSchedule,
    NoiseReference,
    TestReport,
    build_noise_reference,
    mask_energy,
    p_values,
    sequential_hole_count,
    statistic_vector,
)
from .tda import Volume, rasterize_volume

__all__ = ["DomainMask", "estimate_domain", "reconstruct_signal", "denoise_pipeline", "denoise_analysis"]


@dataclass(frozen=True)
class DomainMask:
    mask: np.ndarray  # (M, N) bool
    provenance: List[Tuple[int, int, str]] = field(default_factory=list)  # (birth edge, death triangle, kind)

    @property
    def shape(self) -> tuple:
        return self.mask.shape

    @property
    def area(self) -> int:
        return int(self.mask.sum())


def estimate_domain(
    volumes: Sequence[Volume], grid: SpectrogramGrid, dilate: bool = False
) -> DomainMask:
    """Cellwise union of the rasterized volumes; ``dilate`` grows it by one cell."""
    mask = np.zeros(grid.shape, dtype=bool)
    u_max, v_max = grid.extent
    prov = []
    for vol in volumes:
        if len(vol):
            pts = vol.vertices().reshape(-1, 2)
            if pts.min() < -1e-6 or pts[:, 0].max() > u_max + 1e-6 or pts[:, 1].max() > v_max + 1e-6:
                raise ValueError("volume lies outside the spectrogram grid")
        mask |= rasterize_volume(vol, grid)
        prov.append((int(vol.pair.birth_simplex), int(vol.pair.death_simplex), vol.kind))
    if dilate:
        mask = binary_dilation(mask, structure=np.ones((3, 3), dtype=bool))
    return DomainMask(mask, prov)


def reconstruct_signal(grid: StftGrid, mask) -> TimeSeries:
    """Invert the masked STFT.

    With ``hop = 1`` each sample is the frequency sum of its own column,
    divided by the window center value.  Coarser hops fall back to
    least-squares overlap-add with the analysis window.  One-sided grids
    (real input) return a real signal.
    """
    m = mask.mask if isinstance(mask, DomainMask) else np.asarray(mask, dtype=bool)
    if m.shape != grid.shape:
        raise ValueError(f"mask shape {m.shape} does not match grid {grid.shape}")
    V = np.where(m, grid.values, 0)
    n_fft, hop, N = grid.n_fft, grid.hop, grid.n_samples
    w = grid.window
    c = len(w) // 2
    # column j, row t: n_fft * inverse DFT, i.e. sum_m V[m, j] exp(2i pi m t / n_fft)
    if grid.onesided:
        frames = np.fft.irfft(V, n=n_fft, axis=0) * n_fft
    else:
        frames = np.fft.ifft(V, n=n_fft, axis=0) * n_fft
    frames = frames / np.sqrt(hop / n_fft) / n_fft  # windowed segments x[t] w[t - p + c]
    positions = np.arange(0, N, hop)
    if hop == 1:
        out = frames[positions % n_fft, np.arange(len(positions))] / w[c]
    else:
        num = np.zeros(N, dtype=frames.dtype)
        den = np.zeros(N)
        k = np.arange(len(w))
        for j, p in enumerate(positions.tolist()):
            t = p - c + k
            ok = (t >= 0) & (t < N)
            tt = t[ok]
            num[tt] += w[ok] * frames[tt % n_fft, j]
            den[tt] += w[ok] ** 2
        out = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return TimeSeries(out)


def denoise_pipeline(
    h: TimeSeries,
    alpha: float = 0.05,
    statistic: str = "energy_sv",
    schedule: Optional[AlphaSchedule] = None,
    volume_kind: str = "sv",
    K: int = 5,
    reference: Optional[NoiseReference] = None,
    B: int = 200,
    seed: int = 0,
    config: AnalysisConfig = AnalysisConfig(),
    cache_dir=None,
    dilate: bool = False,
    with_mask: bool = False,
):
    """Detect, count and reconstruct the components of ``h``.

    The default schedule is polynomial with m = 1, so the first test runs at
    level ``alpha``.  Without ``reference`` one is built (or loaded from the
    cache) for the length of ``h``.
    """
    if schedule is None:
        schedule = AlphaSchedule(alpha, "polynomial", m=1.0)
    if reference is None:
        try:
            reference = build_noise_reference(
                len(h), config, B, K, statistic, seed,
                noise_kind="real" if h.is_real else "complex", cache_dir=cache_dir,
            )
        except Exception as exc:
            raise StageError("noise-reference", exc) from exc
    an = analyze(h, config)
    return denoise_analysis(an, reference, statistic, schedule, volume_kind, dilate, with_mask)


def denoise_analysis(
    an: Analysis,
    reference: NoiseReference,
    statistic: str = "energy_sv",
    schedule: Optional[AlphaSchedule] = None,
    volume_kind: str = "sv",
    dilate: bool = False,
    with_mask: bool = False,
):
    """Steps after the analysis: test, count, volumes, mask, inversion.

    Returns ``(estimate, report)``, plus the DomainMask when ``with_mask``.
    """
    if schedule is None:
        schedule = AlphaSchedule(0.05, "polynomial", m=1.0)
    h = an.signal
    K = reference.K
    config = an.config
    try:
        obs = statistic_vector(
            an.spec, an.tree, an.pairs, statistic, K,
            non_overlapping=config.non_overlapping, eps_max=config.eps_max,
        )
        pv = p_values(obs, reference)
        n_hat, alphas = sequential_hole_count(pv, schedule)
    except Exception as exc:
        raise StageError("test", exc) from exc
    comps = an.components(K)[:n_hat]
    try:
        vols = [volume_for(an, p, volume_kind) for p in comps]
        domain = estimate_domain(vols, an.spec, dilate=dilate)
    except Exception as exc:
        raise StageError("volumes", exc) from exc
    components = []
    for i, (p, vol) in enumerate(zip(comps, vols)):
        components.append(
            {
                "birth": p.birth,
                "death": p.death,
                "distance": p.distance,
                "energy": mask_energy(rasterize_volume(vol, an.spec), an.spec),
                "mask_ref": i,
                "triangles": int(len(vol)),
                "epsilon": vol.epsilon,
            }
        )
    if n_hat == 0:
        out = TimeSeries(np.zeros(len(h), dtype=h.samples.dtype), h.sample_rate)
    else:
        try:
            rec = reconstruct_signal(an.grid, domain)
        except Exception as exc:
            raise StageError("reconstruct", exc) from exc
        out = TimeSeries(rec.samples, h.sample_rate)
    report = TestReport(
        pvalues=[float(x) for x in pv],
        alphas=[float(x) for x in alphas],
        decision="detected" if n_hat > 0 else "not-detected",
        n_holes=int(n_hat),
        schedule=schedule.to_dict(),
        statistic=statistic,
        components=components,
    )
    if with_mask:
        return out, report, domain
    return out, report
