import numpy as np
import pytest

from cwtoolkit.meta import find_warfare_equilibrium
from cwtoolkit.scenario import builtin


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def small():
    return builtin("redcyber-small")


@pytest.fixture(scope="session")
def small_eq(small):
    return find_warfare_equilibrium(small, damping=0.5, tolerance=1e-6, max_iter=200)


@pytest.fixture(scope="session")
def decoy():
    return builtin("decoy-sacrifice")


@pytest.fixture(scope="session")
def decoy_eq(decoy):
    return find_warfare_equilibrium(decoy)


@pytest.fixture(scope="session")
def strategic_test():
    return builtin("strategic-test")


@pytest.fixture(scope="session")
def strategic_eq(strategic_test):
    return find_warfare_equilibrium(strategic_test)
