import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rwcalc import build_nested

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def nested8():
    """Nested walks up to level 8 on [0, 1] for a fixed seed."""
    return build_nested(2024, 8, 1.0)


@pytest.fixture(scope="session")
def nested_seeds():
    """Level-7 nested walks for a handful of seeds."""
    return {s: build_nested(s, 7, 1.0) for s in (1, 2, 3, 5, 8)}


def brute_positions(increments, start=0):
    pos = [start]
    for x in increments:
        pos.append(pos[-1] + int(x))
    return np.array(pos)


ACCEPTANCE_LINES = []


def record_acceptance(number, name, passed, detail):
    """Store and print one pass/fail line for an acceptance criterion."""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2} {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
