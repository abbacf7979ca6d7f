import numpy as np
import pytest

from beamspace_lab.array_core import ArrayConfig
from beamspace_lab.stochastic import estimate_mean_interference

N_LIST = (32, 64, 128, 256)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(scope="session")
def model_128_guard2():
    """Mean interference model at N=128, W=5, 2-bin guard, quarter-bin offset."""
    return estimate_mean_interference(2 * np.pi * 0.25 / 128, ArrayConfig(128), 5, 2.0,
                                      np.random.default_rng(11), 200_000)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(label: str, ok: bool, detail: str):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
