import os

import numpy as np
import pytest

from zerotopo.pipeline import AnalysisConfig
from zerotopo.stats import CACHE_ENV, build_noise_references

_LINES = pytest.StashKey()


def random_cloud(seed, n=None, lo=10, hi=40):
    rng = np.random.default_rng(seed)
    if n is None:
        n = int(rng.integers(lo, hi + 1))
    return rng.uniform(0.0, 1.0, size=(n, 2))


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    """$ZEROTOPO_CACHE when set, so expensive references survive between runs."""
    return os.environ.get(CACHE_ENV) or tmp_path_factory.mktemp("noiseref")


@pytest.fixture(scope="session")
def small_refs(cache_dir):
    """B=40 references for N=1024, all three statistic kinds."""
    return build_noise_references(1024, AnalysisConfig(), B=40, K=5, seed=0, cache_dir=cache_dir)


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture
def verdict(request):
    """``verdict(n, ok, detail)`` records one acceptance line and prints it."""
    lines = request.config.stash[_LINES]

    def record(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
