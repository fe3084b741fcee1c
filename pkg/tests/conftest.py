import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from spdmean.spd_core import MatrixSet, random_spd

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def spd3():
    return [random_spd(3, s, 1e3) for s in range(4)]


@pytest.fixture
def set3():
    return MatrixSet.random(3, 3, 5, 1e3)
