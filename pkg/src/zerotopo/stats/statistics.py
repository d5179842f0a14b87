"""Test statistics, Monte Carlo noise references and empirical p-values."""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from ..pipeline import Analysis, AnalysisConfig, analyze
from ..signal import NoiseModel, SpectrogramGrid, white_noise
from ..tda import (
    PersistencePair,
    PersistenceTree,
    minimum_volume,
    rasterize_volume,
    stable_volume,
    top_components,
    tune_epsilon,
)
from ..tda.volumes import EPS_MAX

__all__ = [
    "STAT_KINDS",
    "StatisticVector",
    "NoiseReference",
    "statistic_vector",
    "analysis_statistics",
    "mask_energy",
    "build_noise_reference",
    "build_noise_references",
    "p_values",
    "CACHE_ENV",
]

STAT_KINDS = ("dist", "energy_mv", "energy_sv")
CACHE_ENV = "ZEROTOPO_CACHE"
CACHE_VERSION = 2


@dataclass(frozen=True)
class StatisticVector:
    kind: str
    values: np.ndarray  # X_(1) >= ... for dist; ranked by distance for energies

    def __post_init__(self):
        if self.kind not in STAT_KINDS:
            raise ValueError(f"unknown statistic kind {self.kind!r}")
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("statistics must be a finite nonnegative vector")
        object.__setattr__(self, "values", v)

    @property
    def K(self) -> int:
        return len(self.values)


def mask_energy(mask: np.ndarray, spec: SpectrogramGrid) -> float:
    """Fraction of the spectrogram energy inside ``mask``."""
    if mask.shape != spec.shape:
        raise ValueError("mask and spectrogram shapes differ")
    total = float(spec.s.sum())
    if total == 0:
        return 0.0
    return float(spec.s[mask].sum()) / total


def _padded(values: List[float], K: int) -> np.ndarray:
    out = np.zeros(K)
    out[: len(values)] = values
    return out


def statistic_vector(
    spec: Optional[SpectrogramGrid],
    tree: Optional[PersistenceTree],
    pairs: Sequence[PersistencePair],
    kind: str,
    K: int,
    eps_policy: Union[str, float] = "tune",
    non_overlapping: bool = False,
    eps_max: float = EPS_MAX,
) -> StatisticVector:
    """Top-K statistics of one diagram; missing components count as 0.

    Energies follow the distance ranking.  ``eps_policy`` is ``"tune"`` or a
    fixed ε for ``energy_sv``.
    """
    if kind not in STAT_KINDS:
        raise ValueError(f"unknown statistic kind {kind!r}")
    comps = top_components(pairs, K, non_overlapping)
    if kind == "dist":
        return StatisticVector(kind, _padded([p.distance for p in comps], K))
    if comps and (spec is None or tree is None):
        raise ValueError("energy statistics need the spectrogram and the tree")
    if comps and np.any(tree.filtration.points.max(axis=0) > np.asarray(spec.extent) + 1e-6):
        raise ValueError("tree and spectrogram come from different grids")
    out = []
    for p in comps:
        if kind == "energy_mv":
            vol = minimum_volume(tree, p)
        else:
            eps = tune_epsilon(tree, p, eps_max) if eps_policy == "tune" else float(eps_policy)
            vol = stable_volume(tree, p, eps)
        out.append(mask_energy(rasterize_volume(vol, spec), spec))
    return StatisticVector(kind, _padded(out, K))


def analysis_statistics(analysis: Analysis, kinds: Iterable[str], K: int) -> Dict[str, StatisticVector]:
    cfg = analysis.config
    return {
        k: statistic_vector(
            analysis.spec, analysis.tree, analysis.pairs, k, K,
            non_overlapping=cfg.non_overlapping, eps_max=cfg.eps_max,
        )
        for k in kinds
    }


@dataclass(frozen=True)
class NoiseReference:
    """``matrix[j, k]``: statistic k of the noise replicate with seed ``seed + 1 + j``."""

    kind: str
    matrix: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def B(self) -> int:
        return self.matrix.shape[0]

    @property
    def K(self) -> int:
        return self.matrix.shape[1]


def _params(N, config: AnalysisConfig, B, K, kind, seed, noise_kind) -> dict:
    return {
        "version": CACHE_VERSION,
        "N": int(N),
        "config": config.to_dict(),
        "B": int(B),
        "K": int(K),
        "kind": kind,
        "seed": int(seed),
        "noise": noise_kind,
    }


def _param_hash(params: dict) -> str:
    return hashlib.sha256(json.dumps(params, sort_keys=True).encode()).hexdigest()


def _replicate(args) -> Dict[str, np.ndarray]:
    N, config, K, kinds, seed, noise_kind = args
    x = white_noise(N, NoiseModel(noise_kind, 1.0, seed))
    stats = analysis_statistics(analyze(x, config), kinds, K)
    return {k: v.values for k, v in stats.items()}


def _cache_dir(cache_dir) -> Optional[Path]:
    if cache_dir is None:
        cache_dir = os.environ.get(CACHE_ENV)
    return Path(cache_dir) if cache_dir else None


def _load(path: Path, digest: str) -> Optional[np.ndarray]:
    if not path.exists():
        return None
    try:
        with np.load(path, allow_pickle=False) as data:
            if str(data["hash"]) != digest:
                return None
            return data["matrix"].copy()
    except (OSError, ValueError, KeyError) as exc:
        raise OSError(f"unreadable noise reference cache {path}: {exc}") from exc


def _store(path: Path, digest: str, params: dict, matrix: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            np.savez(fh, matrix=matrix, hash=np.array(digest), params=np.array(json.dumps(params)))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_noise_references(
    N: int,
    config: AnalysisConfig = AnalysisConfig(),
    B: int = 200,
    K: int = 5,
    kinds: Sequence[str] = STAT_KINDS,
    seed: int = 0,
    noise_kind: str = "real",
    cache_dir=None,
    workers: int = 1,
) -> Dict[str, NoiseReference]:
    """References for several statistic kinds from one shared set of B runs.

    Replicate j uses noise seed ``seed + j`` for j = 1..B.  With a cache
    directory (argument or ``$ZEROTOPO_CACHE``), each kind is stored under a
    hash of every parameter and regenerated on mismatch.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    if K < 1:
        raise ValueError("K must be >= 1")
    for k in kinds:
        if k not in STAT_KINDS:
            raise ValueError(f"unknown statistic kind {k!r}")
    root = _cache_dir(cache_dir)
    out: Dict[str, NoiseReference] = {}
    todo = []
    for k in kinds:
        params = _params(N, config, B, K, k, seed, noise_kind)
        digest = _param_hash(params)
        path = root / f"noiseref-{k}-{digest[:16]}.npz" if root else None
        matrix = _load(path, digest) if path else None
        if matrix is not None:
            out[k] = NoiseReference(k, matrix, dict(params, hash=digest, cached=True))
        else:
            todo.append((k, params, digest, path))
    if todo:
        need = tuple(k for k, *_ in todo)
        jobs = [(N, config, K, need, seed + j, noise_kind) for j in range(1, B + 1)]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                rows = list(ex.map(_replicate, jobs, chunksize=max(1, B // (4 * workers))))
        else:
            rows = [_replicate(j) for j in jobs]
        for k, params, digest, path in todo:
            matrix = np.array([r[k] for r in rows])
            if path is not None:
                _store(path, digest, params, matrix)
            out[k] = NoiseReference(k, matrix, dict(params, hash=digest, cached=False))
    return {k: out[k] for k in kinds}


def build_noise_reference(
    N: int,
    config: AnalysisConfig = AnalysisConfig(),
    B: int = 200,
    K: int = 5,
    kind: str = "dist",
    seed: int = 0,
    **kwargs,
) -> NoiseReference:
    return build_noise_references(N, config, B, K, (kind,), seed, **kwargs)[kind]


def p_values(obs: StatisticVector, ref: NoiseReference) -> np.ndarray:
    """``p_k = (1/B) #{j : X_(k),j > X_(k),obs}``; ties do not count."""
    if obs.kind != ref.kind:
        raise ValueError(f"statistic kind {obs.kind!r} does not match reference {ref.kind!r}")
    if obs.K != ref.K:
        raise ValueError(f"K={obs.K} does not match reference K={ref.K}")
    return np.mean(ref.matrix > obs.values[None, :], axis=0)
