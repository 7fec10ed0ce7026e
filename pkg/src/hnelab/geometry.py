"""Chord model of straight-line crossings through a circular WLAN cell.

A trajectory enters the cell at a point on the boundary circle and leaves
at another; the segment between them is a chord.  Everything in the
analytic layer follows from the law of the central angle the chord
subtends, so both samplers here are built to produce a central angle that
is uniform on ``[0, pi]``.

Units: radians, meters, seconds.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi

# slack on the in-cell time interval, absorbs rounding in dwell = chord / speed
_TIME_SLACK_S = 1e-9


@dataclass(frozen=True)
class CellGeometry:
    radius_m: float = 150.0

    def __post_init__(self):
        if not (self.radius_m > 0 and math.isfinite(self.radius_m)):
            raise DomainError(f"cell radius must be positive and finite, got {self.radius_m!r}")

    def max_dwell_s(self, speed_mps):
        return 2.0 * self.radius_m / speed_mps


@dataclass(frozen=True)
class ChordTrajectory:
    """One crossing of the cell.

    ``entry_angle_rad`` locates the entry point on the circle and
    ``central_angle_rad`` is the angle the chord subtends at the AP, folded
    into ``[0, pi]``.
    """

    entry_angle_rad: float
    central_angle_rad: float
    speed_mps: float
    entry_time_s: float = 0.0

    def __post_init__(self):
        if not (self.speed_mps > 0 and math.isfinite(self.speed_mps)):
            raise DomainError(f"speed must be positive and finite, got {self.speed_mps!r}")
        if not 0.0 <= self.central_angle_rad <= math.pi:
            raise DomainError(f"central angle must lie in [0, pi], got {self.central_angle_rad!r}")
        if not 0.0 <= self.entry_angle_rad < TWO_PI:
            raise DomainError(f"entry angle must lie in [0, 2pi), got {self.entry_angle_rad!r}")

    @property
    def exit_angle_rad(self):
        return (self.entry_angle_rad + self.central_angle_rad) % TWO_PI


def fold_angle(theta):
    """Map a central angle in ``[0, 2pi]`` onto the equivalent one in ``[0, pi]``."""
    theta = np.asarray(theta, dtype=float)
    out = np.where(theta > math.pi, TWO_PI - theta, theta)
    return out[()] if out.ndim == 0 else out


def sample_central_angles(rng, size, construction="direction"):
    """Draw ``size`` (entry angle, central angle) pairs.

    ``construction="direction"`` picks a uniform entry point and a uniform
    heading over the inward half-plane; by the inscribed-angle theorem a
    heading ``alpha`` off the inward normal subtends ``pi - 2|alpha|``.
    ``construction="endpoints"`` picks entry and exit points independently
    and folds their angular separation.  Both give a central angle uniform
    on ``[0, pi]``.
    """
    return angles_from_uniforms(rng.random((size, 2)), construction)


def angles_from_uniforms(u, construction="direction"):
    """Map an ``(n, 2)`` array of U[0, 1) variates to (entry angle, central angle)."""
    u = np.asarray(u, dtype=float).reshape(-1, 2)
    entry = TWO_PI * u[:, 0]
    if construction == "direction":
        heading = math.pi * (u[:, 1] - 0.5)
        central = math.pi - 2.0 * np.abs(heading)
    elif construction == "endpoints":
        central = fold_angle(np.abs(entry - TWO_PI * u[:, 1]))
    else:
        raise ValueError(f"unknown chord construction {construction!r}")
    return entry, central


def sample_chord(rng, cell, speed_mps, entry_time_s=0.0, construction="direction"):
    if not speed_mps > 0:
        raise DomainError(f"speed must be positive, got {speed_mps!r}")
    entry, central = sample_central_angles(rng, 1, construction)
    return ChordTrajectory(float(entry[0]), float(central[0]), float(speed_mps), entry_time_s)


def chord_length(cell, central_angle_rad):
    """Length of the chord subtending ``central_angle_rad`` (law of cosines, half-angle form)."""
    theta = np.asarray(central_angle_rad, dtype=float)
    if np.any((theta < 0) | (theta > TWO_PI)) or np.any(np.isnan(theta)):
        raise DomainError("central angle must lie in [0, 2pi]")
    out = 2.0 * cell.radius_m * np.sin(0.5 * fold_angle(theta))
    return out[()] if np.ndim(out) == 0 else out


def chord_offset(cell, central_angle_rad):
    """Perpendicular distance from the AP to the chord."""
    theta = fold_angle(central_angle_rad)
    return cell.radius_m * np.cos(0.5 * theta)


def dwell_time(trajectory, cell):
    return float(chord_length(cell, trajectory.central_angle_rad)) / trajectory.speed_mps


def distance_to_ap(trajectory, cell, t):
    """Distance between the MT and the AP at absolute time ``t`` while inside the cell."""
    elapsed = t - trajectory.entry_time_s
    dwell = dwell_time(trajectory, cell)
    if elapsed < -_TIME_SLACK_S or elapsed > dwell + _TIME_SLACK_S:
        raise DomainError(
            f"t={t!r} is outside the in-cell interval "
            f"[{trajectory.entry_time_s!r}, {trajectory.entry_time_s + dwell!r}]"
        )
    half = 0.5 * float(chord_length(cell, trajectory.central_angle_rad))
    offset = float(chord_offset(cell, trajectory.central_angle_rad))
    along = half - trajectory.speed_mps * elapsed
    return math.hypot(offset, along)


def angle_pdf(theta):
    """Density of the unfolded separation ``|theta_i - theta_o|`` of two uniform boundary points."""
    theta = np.asarray(theta, dtype=float)
    inside = (theta >= 0) & (theta <= TWO_PI)
    out = np.where(inside, (1.0 - theta / TWO_PI) / math.pi, 0.0)
    return out[()] if out.ndim == 0 else out


def angle_cdf(theta):
    theta = np.clip(np.asarray(theta, dtype=float), 0.0, TWO_PI)
    out = theta / math.pi - theta**2 / (4.0 * math.pi**2)
    return out[()] if out.ndim == 0 else out


def dwell_time_pdf(T, cell, v):
    """Density of the in-cell dwell time, ``2v / (pi sqrt(4R^2 - v^2 T^2))`` on ``[0, 2R/v)``."""
    if not v > 0:
        raise DomainError(f"speed must be positive, got {v!r}")
    T = np.asarray(T, dtype=float)
    diameter = 2.0 * cell.radius_m
    inside = (T >= 0) & (v * T < diameter)
    with np.errstate(invalid="ignore", divide="ignore"):
        dens = 2.0 * v / (math.pi * np.sqrt(diameter**2 - (v * T) ** 2))
    out = np.where(inside, dens, 0.0)
    return out[()] if out.ndim == 0 else out


def dwell_time_cdf(T, cell, v):
    """``P(dwell <= T) = (2/pi) arcsin(vT / 2R)``, clipped to ``[0, 1]`` outside the support."""
    if not v > 0:
        raise DomainError(f"speed must be positive, got {v!r}")
    T = np.asarray(T, dtype=float)
    x = np.clip(v * T / (2.0 * cell.radius_m), 0.0, 1.0)
    out = (2.0 / math.pi) * np.arcsin(x)
    return out[()] if out.ndim == 0 else out
