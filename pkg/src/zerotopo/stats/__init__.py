"""Statistics, Monte Carlo references and multiple testing."""
from .apf import APFCurve, apf, apf_envelope_test, apf_statistics
from .fwer import FwerResult, FwerScenario, fwer_harness
from .statistics import (
    CACHE_ENV,
    STAT_KINDS,
    NoiseReference,
    StatisticVector,
    analysis_statistics,
    build_noise_reference,
    build_noise_references,
    mask_energy,
    p_values,
    statistic_vector,
)
from .testing import AlphaSchedule, TestReport, alpha_at, sequential_hole_count, simultaneous_test

__all__ = [
    "APFCurve",
    "apf",
    "apf_envelope_test",
    "apf_statistics",
    "FwerResult",
    "FwerScenario",
    "fwer_harness",
    "CACHE_ENV",
    "STAT_KINDS",
    "NoiseReference",
    "StatisticVector",
    "analysis_statistics",
    "build_noise_reference",
    "build_noise_references",
    "mask_energy",
    "p_values",
    "statistic_vector",
    "AlphaSchedule",
    "TestReport",
    "alpha_at",
    "sequential_hole_count",
    "simultaneous_test",
]
