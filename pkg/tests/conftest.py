import math

import pytest
from hypothesis import HealthCheck, settings

from photonic_fmcw.chirp import ChirpParams

settings.register_profile("repo", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

V_PI = 4.0


def volts(m):
    """Drive amplitude giving modulation index ``m`` at the default half-wave voltage."""
    return m * V_PI / math.pi


@pytest.fixture
def chirp():
    return ChirpParams(10.5e9, 2e13, 1e-4, amplitude=volts(0.25))
