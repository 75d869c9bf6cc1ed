import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wallstate.frame import FrameProblem, FrameSearchConfig, find_wall_frame
from wallstate.models import central_spin, spin_lattice5, toy_regularization_model, transversal_ising3

settings.register_profile(
    "default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def ising3():
    return transversal_ising3()


@pytest.fixture(scope="session")
def toy():
    return toy_regularization_model()


@pytest.fixture(scope="session")
def lattice():
    return spin_lattice5()


@pytest.fixture(scope="session")
def central():
    return central_spin()


@pytest.fixture(scope="session")
def toy_frame(toy):
    prob = FrameProblem(toy.H, toy.dims, 0.01)
    return prob, find_wall_frame(prob, FrameSearchConfig(), seed=0)


@pytest.fixture(scope="session")
def lattice_frame(lattice):
    prob = FrameProblem(lattice.H, lattice.dims, 0.01)
    return prob, find_wall_frame(prob, FrameSearchConfig(), seed=0)


@pytest.fixture(scope="session")
def central_frame(central):
    prob = FrameProblem(central.H, central.dims, 0.01)
    return prob, find_wall_frame(prob, FrameSearchConfig(), seed=0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
