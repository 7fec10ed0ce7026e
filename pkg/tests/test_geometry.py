import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from hnelab.errors import DomainError
from hnelab.geometry import (
    CellGeometry,
    ChordTrajectory,
    angle_cdf,
    angle_pdf,
    angles_from_uniforms,
    chord_length,
    chord_offset,
    distance_to_ap,
    dwell_time,
    dwell_time_cdf,
    dwell_time_pdf,
    fold_angle,
    sample_central_angles,
    sample_chord,
)

CELL = CellGeometry(150.0)
angles = st.floats(0.0, 2 * math.pi, allow_nan=False)


def test_cell_rejects_nonpositive_radius():
    with pytest.raises(DomainError):
        CellGeometry(0.0)
    with pytest.raises(DomainError):
        CellGeometry(-5.0)


def test_max_dwell():
    assert CELL.max_dwell_s(20.0) == pytest.approx(15.0)


def test_chord_length_known_values():
    assert chord_length(CELL, 0.0) == 0.0
    assert chord_length(CELL, math.pi) == pytest.approx(300.0)
    assert chord_length(CELL, math.pi / 3) == pytest.approx(150.0)  # equilateral triangle
    assert chord_length(CELL, math.pi / 2) == pytest.approx(150.0 * math.sqrt(2))


def test_chord_length_domain():
    for bad in (-0.1, 2 * math.pi + 1e-6, float("nan")):
        with pytest.raises(DomainError):
            chord_length(CELL, bad)


@given(angles)
def test_chord_length_symmetric_under_fold(theta):
    a = chord_length(CELL, theta)
    b = chord_length(CELL, 2 * math.pi - theta)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


@given(angles)
def test_chord_length_matches_law_of_cosines(theta):
    law = math.sqrt(max(2 * 150.0**2 * (1 - math.cos(theta)), 0.0))
    assert chord_length(CELL, theta) == pytest.approx(law, rel=1e-9, abs=1e-6)


@given(angles)
def test_offset_and_half_chord_are_pythagorean(theta):
    half = 0.5 * chord_length(CELL, theta)
    h = chord_offset(CELL, theta)
    assert half**2 + h**2 == pytest.approx(150.0**2, rel=1e-12)


def test_fold_angle():
    assert fold_angle(1.0) == 1.0
    assert fold_angle(2 * math.pi - 1.0) == pytest.approx(1.0)
    np.testing.assert_allclose(fold_angle(np.array([0.0, math.pi, 2 * math.pi])), [0.0, math.pi, 0.0])


def test_trajectory_validation():
    with pytest.raises(DomainError):
        ChordTrajectory(0.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        ChordTrajectory(0.0, -1.0, 1.0)
    t = ChordTrajectory(6.0, 1.0, 2.0)
    assert t.exit_angle_rad == pytest.approx(7.0 - 2 * math.pi)


@given(st.floats(0.01, math.pi), st.floats(0.5, 40.0), st.floats(0.0, 1.0))
def test_distance_to_ap_endpoints_and_bounds(theta, v, frac):
    traj = ChordTrajectory(0.3, theta, v, entry_time_s=5.0)
    T = dwell_time(traj, CELL)
    assert distance_to_ap(traj, CELL, 5.0) == pytest.approx(150.0, rel=1e-9)
    assert distance_to_ap(traj, CELL, 5.0 + T) == pytest.approx(150.0, rel=1e-9)
    d = distance_to_ap(traj, CELL, 5.0 + frac * T)
    assert chord_offset(CELL, theta) - 1e-9 <= d <= 150.0 + 1e-9


def test_distance_to_ap_outside_interval():
    traj = ChordTrajectory(0.0, math.pi, 10.0)
    with pytest.raises(DomainError):
        distance_to_ap(traj, CELL, -1.0)
    with pytest.raises(DomainError):
        distance_to_ap(traj, CELL, 31.0)
    assert distance_to_ap(traj, CELL, 15.0) == pytest.approx(0.0, abs=1e-9)


def test_sample_chord_rejects_bad_speed(rng):
    with pytest.raises(DomainError):
        sample_chord(rng, CELL, 0.0)


def test_unknown_construction():
    with pytest.raises(ValueError):
        angles_from_uniforms(np.zeros((1, 2)), "bogus")


@pytest.mark.parametrize("construction", ["direction", "endpoints"])
def test_central_angle_uniform(rng, construction):
    _, central = sample_central_angles(rng, 50_000, construction)
    assert central.min() >= 0 and central.max() <= math.pi
    assert stats.kstest(central, stats.uniform(0, math.pi).cdf).statistic < 0.01


def test_angle_pdf_integrates_and_matches_cdf():
    total, _ = integrate.quad(angle_pdf, 0, 2 * math.pi)
    assert total == pytest.approx(1.0, abs=1e-12)
    for x in (0.3, 1.7, 4.0):
        part, _ = integrate.quad(angle_pdf, 0, x)
        assert angle_cdf(x) == pytest.approx(part, abs=1e-12)
    assert angle_pdf(-1.0) == 0.0 and angle_pdf(7.0) == 0.0


def test_angle_pdf_is_law_of_unfolded_difference(rng):
    a, b = rng.random((2, 100_000)) * 2 * math.pi
    assert stats.kstest(np.abs(a - b), angle_cdf).statistic < 0.01


@pytest.mark.parametrize("v", [1.0, 20.0, 27.7])
def test_dwell_pdf_integrates_to_one(v):
    hi = CELL.max_dwell_s(v)
    # integrable inverse-square-root singularity at the upper end
    total, err = integrate.quad(lambda T: dwell_time_pdf(T, CELL, v), 0.0, hi, limit=200)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_dwell_pdf_derived_value():
    # 2v / (pi * 2R) at T=0
    assert dwell_time_pdf(0.0, CELL, 20.0) == pytest.approx(40.0 / (math.pi * 300.0))
    assert dwell_time_pdf(0.0, CELL, 20.0) == pytest.approx(0.0424413, abs=1e-7)
    assert dwell_time_pdf(-1.0, CELL, 20.0) == 0.0
    assert dwell_time_pdf(15.0, CELL, 20.0) == 0.0


@given(st.floats(0.5, 40.0), st.floats(0.0, 1.0))
@settings(max_examples=60)
def test_dwell_cdf_is_integral_of_pdf(v, frac):
    T = frac * CELL.max_dwell_s(v)
    part, _ = integrate.quad(lambda x: dwell_time_pdf(x, CELL, v), 0.0, T, limit=200)
    assert dwell_time_cdf(T, CELL, v) == pytest.approx(part, abs=1e-7)


def test_dwell_cdf_monotone_and_clipped():
    T = np.linspace(-2, 20, 500)
    F = dwell_time_cdf(T, CELL, 20.0)
    assert np.all(np.diff(F) >= 0)
    assert F[0] == 0.0 and F[-1] == 1.0


def test_speed_must_be_positive():
    with pytest.raises(DomainError):
        dwell_time_pdf(1.0, CELL, 0.0)
    with pytest.raises(DomainError):
        dwell_time_cdf(1.0, CELL, -1.0)


def test_sampled_dwell_matches_arcsine_law(rng):
    v = 12.0
    dwell = np.array([dwell_time(sample_chord(rng, CELL, v), CELL) for _ in range(5000)])
    assert stats.kstest(dwell, lambda T: dwell_time_cdf(T, CELL, v)).statistic < 0.03


def test_dwell_cdf_median_and_endpoint():
    v = 20.0
    assert dwell_time_cdf(math.sqrt(2) * 150.0 / v, CELL, v) == pytest.approx(0.5, abs=1e-9)
    assert dwell_time_cdf(CELL.max_dwell_s(v), CELL, v) == pytest.approx(1.0, abs=1e-9)
    # the midpoint of [0, 2R/v] carries a third of the mass
    assert dwell_time_cdf(150.0 / v, CELL, v) == pytest.approx(1.0 / 3.0, abs=1e-12)
