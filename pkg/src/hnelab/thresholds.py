"""Closed-form time thresholds and handover probabilities under the chord model.

All probabilities here are unconditional over chords of the relevant
circle: e.g. the failure probability for a time threshold ``T`` is
``P(T <= dwell < tau_i)``.
"""

import math
from dataclasses import dataclass

from .errors import DomainError

#: Threshold value meaning "never trigger": every crossing is shorter than the latency.
NEVER_TRIGGER = math.inf


@dataclass(frozen=True)
class HandoverLatencies:
    into_wlan_s: float = 2.0
    out_of_wlan_s: float = 2.0

    def __post_init__(self):
        if not (self.into_wlan_s >= 0 and self.out_of_wlan_s >= 0):
            raise DomainError("handover latencies must be non-negative")

    @property
    def round_trip_s(self):
        return self.into_wlan_s + self.out_of_wlan_s


@dataclass(frozen=True)
class ToleranceTargets:
    max_failure_prob: float = 0.02
    max_unnecessary_prob: float = 0.04

    def __post_init__(self):
        for name in ("max_failure_prob", "max_unnecessary_prob"):
            p = getattr(self, name)
            if not 0.0 < p < 1.0:
                raise DomainError(f"{name} must lie in the open interval (0, 1), got {p!r}")


@dataclass(frozen=True)
class ThresholdResult:
    t1_s: float
    t2_s: float

    @property
    def decision_threshold_s(self):
        """Threshold HNE compares against: exceeding the larger one satisfies both targets."""
        return max(self.t1_s, self.t2_s)

    @property
    def never_triggers(self):
        return math.isinf(self.decision_threshold_s)


def _check_speed_radius(radius_m, v):
    if not v > 0:
        raise DomainError(f"speed must be positive, got {v!r}")
    if not radius_m > 0:
        raise DomainError(f"radius must be positive, got {radius_m!r}")


def time_threshold(radius_m, v, latency_s, tolerance):
    """Smallest dwell threshold keeping ``P(threshold <= dwell < latency)`` at ``tolerance``.

    Returns 0 when the tolerance is loose enough that no threshold is
    needed and :data:`NEVER_TRIGGER` when ``v * latency`` exceeds the
    cell diameter.
    """
    _check_speed_radius(radius_m, v)
    if not latency_s >= 0:
        raise DomainError(f"latency must be non-negative, got {latency_s!r}")
    if not 0.0 < tolerance < 1.0:
        raise DomainError(f"tolerance must lie in the open interval (0, 1), got {tolerance!r}")
    diameter = 2.0 * radius_m
    if v * latency_s > diameter:
        return NEVER_TRIGGER
    arg = math.asin(v * latency_s / diameter) - 0.5 * math.pi * tolerance
    if arg <= 0.0:
        return 0.0
    return min(diameter / v * math.sin(arg), diameter / v)


def time_threshold_t1(radius_m, v, latencies, targets):
    return time_threshold(radius_m, v, latencies.into_wlan_s, targets.max_failure_prob)


def time_threshold_t2(radius_m, v, latencies, targets):
    return time_threshold(radius_m, v, latencies.round_trip_s, targets.max_unnecessary_prob)


def compute_thresholds(radius_m, v, latencies, targets):
    return ThresholdResult(
        time_threshold_t1(radius_m, v, latencies, targets),
        time_threshold_t2(radius_m, v, latencies, targets),
    )


def _band_probability(radius_m, v, latency_s, threshold_s, what):
    _check_speed_radius(radius_m, v)
    diameter = 2.0 * radius_m
    if v * latency_s > diameter:
        raise DomainError(
            f"{what}: v*latency = {v * latency_s:.6g} m exceeds the cell diameter {diameter:.6g} m; "
            "arcsin argument out of range"
        )
    if not threshold_s >= 0:
        raise DomainError(f"{what}: threshold must be non-negative, got {threshold_s!r}")
    if threshold_s > latency_s:
        return 0.0
    p = (2.0 / math.pi) * (math.asin(v * latency_s / diameter) - math.asin(v * threshold_s / diameter))
    return min(max(p, 0.0), 1.0)


def failure_prob_for_t1(radius_m, v, tau_in_s, t1_s):
    """``P(T1 <= dwell < tau_i)``: triggered handovers that cannot finish before the MT leaves."""
    return _band_probability(radius_m, v, tau_in_s, t1_s, "failure probability")


def unnecessary_prob_for_t2(radius_m, v, tau_in_s, tau_out_s, t2_s):
    """``P(T2 <= dwell < tau_i + tau_o)``; the band includes the failures."""
    return _band_probability(radius_m, v, tau_in_s + tau_out_s, t2_s, "unnecessary probability")


def _saturating_arcsine(v, latency_s, radius_m):
    if not v > 0:
        raise DomainError(f"speed must be positive, got {v!r}")
    if not radius_m > 0:
        raise DomainError(f"trigger radius must be positive, got {radius_m!r}")
    x = v * latency_s / (2.0 * radius_m)
    if x > 1.0:
        return 1.0
    return (2.0 / math.pi) * math.asin(x)


def failure_prob_baseline(v, tau_in_s, trigger_radius_m):
    """Failure probability when every crossing of the trigger circle hands over on entry."""
    return _saturating_arcsine(v, tau_in_s, trigger_radius_m)


def unnecessary_prob_baseline(v, tau_in_s, tau_out_s, trigger_radius_m):
    return _saturating_arcsine(v, tau_in_s + tau_out_s, trigger_radius_m)
