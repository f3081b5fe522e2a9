import os

import pytest
from hypothesis import HealthCheck, settings

from qfc.params import steady_state

settings.register_profile("qfc", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "qfc"))

_LINES = []


@pytest.fixture(scope="session")
def gapped():
    """mu = 5, Delta = -1: every mode propagating, gap sqrt(11)."""
    return steady_state(5.0, -1.0)


@pytest.fixture(scope="session")
def ring():
    """mu = 0.4, Delta = 3: a diffusive ring around k ~ 2.28."""
    return steady_state(0.4, 3.0)


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion.

    Call ``verdict(label, ok, detail)`` before asserting; the line is printed
    at once and repeated in the terminal summary.
    """
    def record(label, ok, detail=""):
        line = f"CRITERION {label}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        _LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
