import numpy as np
import pytest

from hnelab._accel import NUMBA_AVAILABLE
from hnelab.simulator import SimConfig

BACKENDS = ["numpy"] + (["numba"] if NUMBA_AVAILABLE else [])

needs_numba = pytest.mark.skipif(not NUMBA_AVAILABLE, reason="numba unavailable or disabled")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def small_cfg():
    return SimConfig(speeds_kmh=(3.6, 17.6, 49.6, 99.6), trials_per_speed=300, seed=7)
