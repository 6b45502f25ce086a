import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ntnsim import build_config

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def default_cfg():
    return build_config({})


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)


def approx_rel(actual, expected, rel):
    return abs(actual - expected) <= rel * abs(expected)
