from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from empchoice.harness import data_path
from empchoice.protocol import load_protocol

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def table1():
    return load_protocol(data_path("table1.csv"))


@pytest.fixture(scope="session")
def prompting():
    return load_protocol(data_path("prompting.csv"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
