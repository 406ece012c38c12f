import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from projlab.linalg_core import as_generator

settings.register_profile("projlab", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=300,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("PROJLAB_HYPOTHESIS_PROFILE", "projlab"))


@pytest.fixture
def rng():
    return as_generator(20240611)


@pytest.fixture(scope="session")
def free_half():
    from projlab.two_projection_model import free_pair_state
    return free_pair_state(0.5, 0.5, 4000)


def max_abs(A):
    return float(np.max(np.abs(A)))



def pytest_terminal_summary(terminalreporter):
    mods = [m for name, m in sys.modules.items() if name.rsplit(".", 1)[-1] == "test_acceptance"]
    lines = getattr(mods[0], "RESULTS", None) if mods else None
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
