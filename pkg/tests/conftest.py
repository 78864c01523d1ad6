import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fspn.fixtures import four_variable_example

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def fig_model():
    return four_variable_example()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_CRITERIA] = {}


@pytest.fixture
def criterion(request):
    """``criterion(n, ok, detail)`` records one acceptance line for the terminal summary."""
    table = request.config.stash[_CRITERIA]

    def record(n, ok, detail):
        status = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
        table[n] = f"criterion {n}: {status} - {detail}"
        print(table[n])

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    table = config.stash.get(_CRITERIA, {})
    if table:
        terminalreporter.section("acceptance criteria")
        for n in sorted(table):
            terminalreporter.write_line(table[n])
