"""Signal detection and reconstruction from the topology of spectrogram zeros."""
from .errors import DegenerateInputError, InvariantError, StageError
from .pipeline import Analysis, AnalysisConfig, analyze, volume_for
from .reconstruct import DomainMask, denoise_pipeline, estimate_domain, reconstruct_signal
from .signal import (
    NoiseModel,
    SpectrogramGrid,
    StftGrid,
    TimeSeries,
    ZeroSet,
    find_zeros,
    mix_at_snr,
    qrf,
    spectrogram,
    stft,
    synth,
    white_noise,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateInputError",
    "InvariantError",
    "StageError",
    "Analysis",
    "AnalysisConfig",
    "analyze",
    "volume_for",
    "DomainMask",
    "denoise_pipeline",
    "estimate_domain",
    "reconstruct_signal",
    "NoiseModel",
    "SpectrogramGrid",
    "StftGrid",
    "TimeSeries",
    "ZeroSet",
    "find_zeros",
    "mix_at_snr",
    "qrf",
    "spectrogram",
    "stft",
    "synth",
    "white_noise",
]
