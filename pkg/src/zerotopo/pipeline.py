"""Signal -> spectrogram -> zeros -> filtration -> persistence tree, in one call.

Each stage failure is re-raised as :class:`StageError` naming the stage.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import List, Optional

from .errors import DegenerateInputError, StageError
from .signal import SpectrogramGrid, StftGrid, TimeSeries, ZeroSet, find_zeros, stft
from .tda import (
    PersistencePair,
    PersistenceTree,
    Volume,
    alpha_filtration,
    build_persistence_tree,
    diagram_h1,
    minimum_volume,
    stable_volume,
    top_components,
    tune_epsilon,
)
from .tda.volumes import EPS_MAX

__all__ = ["AnalysisConfig", "Analysis", "analyze", "volume_for"]


@dataclass(frozen=True)
class AnalysisConfig:
    n_fft: int = 512
    hop: int = 1
    margin: float = 2.0
    eps_max: float = EPS_MAX
    non_overlapping: bool = False
    jitter_seed: int = 0

    def __post_init__(self):
        if self.n_fft < 1 or self.hop < 1:
            raise ValueError("n_fft and hop must be positive")
        if self.margin < 0:
            raise ValueError("margin must be nonnegative")
        if not self.eps_max > 0:
            raise ValueError("eps_max must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Analysis:
    signal: TimeSeries
    config: AnalysisConfig
    grid: StftGrid
    spec: SpectrogramGrid
    zeros: ZeroSet
    tree: Optional[PersistenceTree]  # None when the zero set cannot be triangulated
    pairs: List[PersistencePair] = field(default_factory=list)

    def components(self, K: int) -> List[PersistencePair]:
        return top_components(self.pairs, K, self.config.non_overlapping)


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def analyze(signal: TimeSeries, config: AnalysisConfig = AnalysisConfig()) -> Analysis:
    grid = _stage("stft", stft, signal, hop=config.hop, n_fft=config.n_fft)
    spec = grid.spectrogram()
    zeros = _stage("zeros", find_zeros, spec, config.margin)
    tree = None
    pairs: List[PersistencePair] = []
    try:
        filt = alpha_filtration(zeros.points, jitter_seed=config.jitter_seed)
    except DegenerateInputError:
        # too few zeros for a triangle: no holes at all
        filt = None
    except Exception as exc:
        raise StageError("filtration", exc) from exc
    if filt is not None:
        tree = _stage("persistence", build_persistence_tree, filt)
        pairs = diagram_h1(tree)
    return Analysis(signal, config, grid, spec, zeros, tree, pairs)


def volume_for(analysis: Analysis, pair: PersistencePair, kind: str = "mv", epsilon=None) -> Volume:
    """``kind`` is ``"mv"`` or ``"sv"``; for ``"sv"`` a missing ``epsilon`` is tuned."""
    tree = analysis.tree
    if kind == "mv":
        return minimum_volume(tree, pair)
    if kind == "sv":
        if epsilon is None:
            epsilon = tune_epsilon(tree, pair, analysis.config.eps_max)
        return stable_volume(tree, pair, epsilon)
    raise ValueError(f"unknown volume kind {kind!r}")
