import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hnelab.errors import DomainError
from hnelab.radio import (
    RadioModel,
    estimate_distance,
    estimate_distance_window,
    mean_rss,
    radius_to_threshold,
    sample_rss,
    threshold_to_radius,
    unbiased_squared_distance,
)

MODEL = RadioModel()


def test_defaults():
    assert MODEL.tx_power_dbm == 20.0
    assert MODEL.ref_path_loss_db == 40.0
    assert MODEL.path_loss_exponent == 3.5
    assert MODEL.shadow_sigma_db == 4.3
    assert MODEL.ref_rss_dbm == -20.0


def test_mean_rss_derived_values():
    # -20 - 35 log10(d)
    assert mean_rss(MODEL, 150.0) == pytest.approx(-96.163194, abs=1e-6)
    assert mean_rss(MODEL, 120.0) == pytest.approx(-92.771344, abs=1e-6)
    assert mean_rss(MODEL, 1.0) == pytest.approx(-20.0)
    assert mean_rss(MODEL, 10.0) == pytest.approx(-55.0)


def test_mean_rss_rejects_short_distance():
    with pytest.raises(DomainError):
        mean_rss(MODEL, 0.5)
    with pytest.raises(DomainError):
        mean_rss(MODEL, np.array([10.0, 0.0]))


@given(st.floats(1.0, 1e4))
def test_inversion_round_trip(d):
    assert estimate_distance(MODEL, mean_rss(MODEL, d)) == pytest.approx(d, rel=1e-9)


@given(st.floats(1.0, 500.0), st.floats(1.0, 500.0))
def test_mean_rss_strictly_decreasing(a, b):
    if a < b:
        assert mean_rss(MODEL, a) > mean_rss(MODEL, b)


def test_threshold_radius_pair():
    thr = radius_to_threshold(MODEL, 150.0)
    assert thr == pytest.approx(-96.163194, abs=1e-6)
    assert threshold_to_radius(MODEL, thr) == pytest.approx(150.0, rel=1e-12)
    with pytest.raises(DomainError):
        radius_to_threshold(MODEL, 0.1)


def test_model_validation():
    with pytest.raises(DomainError):
        RadioModel(path_loss_exponent=0.0)
    with pytest.raises(DomainError):
        RadioModel(shadow_sigma_db=-1.0)
    with pytest.raises(DomainError):
        RadioModel(ref_distance_m=0.0)


def test_sample_rss_statistics(rng):
    x = sample_rss(MODEL, np.full(200_000, 50.0), rng)
    assert x.mean() == pytest.approx(float(mean_rss(MODEL, 50.0)), abs=0.05)
    assert x.std() == pytest.approx(4.3, rel=0.01)


def test_sample_rss_noise_free(rng):
    m = RadioModel(shadow_sigma_db=0.0)
    assert sample_rss(m, 50.0, rng) == pytest.approx(float(mean_rss(m, 50.0)))


def test_window_estimate_is_mean_in_db():
    rss = np.array([-80.0, -90.0])
    assert estimate_distance_window(MODEL, rss) == pytest.approx(float(estimate_distance(MODEL, -85.0)))
    with pytest.raises(DomainError):
        estimate_distance_window(MODEL, np.array([]))


def test_unbiased_squared_distance(rng):
    d = 80.0
    rss = sample_rss(MODEL, np.full(400_000, d), rng)
    est = unbiased_squared_distance(MODEL, rss)
    assert est.mean() == pytest.approx(d * d, rel=0.01)
    s = 4.3 * math.log(10) / 35.0
    assert MODEL.log_sigma == pytest.approx(s)
