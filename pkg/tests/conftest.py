import os

import pytest
from hypothesis import HealthCheck, settings

from docross.model import ModelParams

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=300, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def unit():
    """Omega = delta = sqrt(beta) = 1, infinite window."""
    return ModelParams.symmetric(1.0)


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def report(request, capsys):
    """Record one PASS/FAIL line for an acceptance criterion and echo it."""
    lines = request.config.stash[_ACCEPTANCE]

    def emit(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines.append(line)
        with capsys.disabled():
            print(f"\n{line}")

    return emit


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
