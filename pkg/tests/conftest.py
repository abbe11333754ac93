import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from multisio import Gaussian, Harmonic, make_grid, make_sphere, sample

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid1():
    return make_grid(1, 64, 8.0)


@pytest.fixture(scope="session")
def pair_inputs(grid1):
    return [sample(Gaussian(0.0, 1.0), grid1), sample(Gaussian(0.5, 1.5), grid1)]


@pytest.fixture(scope="session")
def harmonic1():
    return make_sphere(2, 64, Harmonic(1))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
