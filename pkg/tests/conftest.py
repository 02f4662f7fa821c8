import numpy as np
import pytest
from hypothesis import settings

from selfsim import euler_system, psystem, sector_layout

settings.register_profile("selfsim", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("selfsim")


@pytest.fixture(scope="session")
def euler():
    """Euler at Mach 2, gamma 1.4, eps 0.05, with calibrated delta_L."""
    return euler_system(mach=2.0, epsilon=0.05)


@pytest.fixture(scope="session")
def layout(euler):
    return sector_layout(euler)


@pytest.fixture(scope="session")
def psys():
    return psystem(epsilon=0.05)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
