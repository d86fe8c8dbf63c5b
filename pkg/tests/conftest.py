import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from sasaki_t11.coords import ChartDomain, sample_array  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def points():
    return sample_array(ChartDomain(), 100, 2024)


@pytest.fixture(scope="session")
def few_points():
    return sample_array(ChartDomain(), 20, 7)


@pytest.fixture
def acceptance():
    """``record(n, title, ok, measured)`` logs one criterion line and prints it."""

    def record(n, title, ok, measured):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title} | measured {measured}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
