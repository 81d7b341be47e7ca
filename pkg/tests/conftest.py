import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gibbslab.group import ball, bend, fuchsian

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def B11():
    return ball(11)


@pytest.fixture(scope="session")
def rep():
    return fuchsian()


@pytest.fixture(scope="session")
def bent():
    return bend(fuchsian(), 0.3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
