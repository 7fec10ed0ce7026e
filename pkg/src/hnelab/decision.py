"""Handover-into-WLAN decision strategies.

Three strategies share one calling convention, ``decide(ctx) -> Decision``:

* HNE estimates how long the MT will stay in the cell from a short window
  of RSS samples and hands over only if the remaining stay clears the time
  threshold ``max(T1, T2)``.
* Fixed RSS hands over at the first sample at or above a fixed threshold.
* Hysteresis is the same rule with a deeper threshold (smaller radius).
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .geometry import CellGeometry
from .radio import RadioModel, RssSample, estimate_distance_window, unbiased_squared_distance
from .thresholds import HandoverLatencies, ToleranceTargets, compute_thresholds

DEFAULT_WINDOW = 10
ESTIMATORS = ("fit", "mean_db")


class Verdict(enum.Enum):
    TRIGGER = "trigger"
    WAIT = "wait"
    NEVER = "never"


class Method(str, enum.Enum):
    HNE = "hne"
    FIXED_RSS = "fixed_rss"
    HYSTERESIS = "hysteresis"


@dataclass(frozen=True)
class Decision:
    verdict: Verdict
    estimated_dwell_s: float | None = None
    threshold_s: float | None = None
    decided_at_s: float | None = None

    @property
    def triggered(self):
        return self.verdict is Verdict.TRIGGER


@dataclass(frozen=True)
class DecisionContext:
    """Everything a strategy may look at for one crossing.

    ``rss_samples`` are the readings taken since entry, oldest first.
    ``trajectory_complete`` tells threshold strategies that no further
    samples will arrive, turning a pending decision into ``NEVER``.
    """

    speed_mps: float
    rss_samples: tuple = ()
    entry_time_s: float = 0.0
    cell: CellGeometry = field(default_factory=CellGeometry)
    radio: RadioModel = field(default_factory=RadioModel)
    latencies: HandoverLatencies = field(default_factory=HandoverLatencies)
    targets: ToleranceTargets = field(default_factory=ToleranceTargets)
    trajectory_complete: bool = False

    def __post_init__(self):
        samples = tuple(RssSample(*s) for s in self.rss_samples)
        object.__setattr__(self, "rss_samples", samples)
        if not self.speed_mps > 0:
            raise DomainError(f"speed must be positive, got {self.speed_mps!r}")
        last = self.entry_time_s
        for s in samples:
            if not s.time_s > last:
                raise DomainError("RSS samples must be strictly time-ordered and taken after entry")
            last = s.time_s


def hne_estimate_dwell(radius_m, l_os_m, v, t_s, t_in):
    """Total in-cell time from one AP-distance reading ``l_os_m`` taken at ``t_s``.

    With the MT at distance ``d = v (t_s - t_in)`` along a chord of length
    ``L``, the AP distance satisfies ``l^2 = R^2 - L d + d^2``; solving for
    ``L / v`` gives the estimate.  Exact for exact ``l_os_m``.
    """
    if not v > 0:
        raise DomainError(f"speed must be positive, got {v!r}")
    elapsed = t_s - t_in
    if not elapsed > 0:
        raise DomainError("sample time must be strictly after the entry time")
    if l_os_m < 0:
        raise DomainError(f"distance must be non-negative, got {l_os_m!r}")
    l_os_m = min(l_os_m, radius_m)
    return (radius_m**2 - l_os_m**2 + (v * elapsed) ** 2) / (v**2 * elapsed)


def fit_dwell(radius_m, v, t_in, times_s, squared_distances):
    """Least-squares chord fit over several (time, squared AP distance) readings.

    Each reading satisfies ``R^2 + d_k^2 - l_k^2 = L d_k`` with
    ``d_k = v (t_k - t_in)``; the fitted ``L / v`` reduces to
    :func:`hne_estimate_dwell` for a single reading.
    """
    d = v * (np.asarray(times_s, dtype=float) - t_in)
    y = radius_m**2 + d * d - np.asarray(squared_distances, dtype=float)
    return float(np.dot(d, y) / np.dot(d, d)) / v


def estimate_window_dwell(ctx, samples, estimator="fit"):
    times = np.array([s.time_s for s in samples])
    rss = np.array([s.rss_dbm for s in samples])
    R, v = ctx.cell.radius_m, ctx.speed_mps
    if estimator == "fit":
        return fit_dwell(R, v, ctx.entry_time_s, times, unbiased_squared_distance(ctx.radio, rss))
    if estimator == "mean_db":
        l_os = estimate_distance_window(ctx.radio, rss)
        return hne_estimate_dwell(R, l_os, v, times[-1], ctx.entry_time_s)
    raise ValueError(f"unknown estimator {estimator!r}; expected one of {ESTIMATORS}")


def hne_decide(ctx, window=DEFAULT_WINDOW, estimator="fit"):
    if window < 1:
        raise ValueError("window must hold at least one sample")
    R, v = ctx.cell.radius_m, ctx.speed_mps
    threshold = compute_thresholds(R, v, ctx.latencies, ctx.targets).decision_threshold_s
    if math.isinf(threshold):
        return Decision(Verdict.NEVER, threshold_s=threshold)
    if len(ctx.rss_samples) < window:
        verdict = Verdict.NEVER if ctx.trajectory_complete else Verdict.WAIT
        return Decision(verdict, threshold_s=threshold)
    samples = ctx.rss_samples[:window]
    t_s = samples[-1].time_s
    elapsed = t_s - ctx.entry_time_s
    # the MT is still inside at t_s, so the total stay is at least `elapsed`
    total = min(max(estimate_window_dwell(ctx, samples, estimator), elapsed), 2.0 * R / v)
    verdict = Verdict.TRIGGER if total - elapsed >= threshold else Verdict.NEVER
    return Decision(verdict, estimated_dwell_s=total, threshold_s=threshold, decided_at_s=t_s)


def fixed_rss_decide(ctx, rss_threshold_dbm):
    for s in ctx.rss_samples:
        if s.rss_dbm >= rss_threshold_dbm:
            return Decision(Verdict.TRIGGER, decided_at_s=s.time_s)
    return Decision(Verdict.NEVER if ctx.trajectory_complete else Verdict.WAIT)


def hysteresis_decide(ctx, rss_threshold_dbm):
    # entry-side hysteresis is a deeper fixed threshold; only the trigger point differs
    return fixed_rss_decide(ctx, rss_threshold_dbm)


@dataclass(frozen=True)
class HneStrategy:
    window: int = DEFAULT_WINDOW
    estimator: str = "fit"
    method = Method.HNE

    def decide(self, ctx):
        return hne_decide(ctx, self.window, self.estimator)


@dataclass(frozen=True)
class FixedRssStrategy:
    rss_threshold_dbm: float
    method = Method.FIXED_RSS

    def decide(self, ctx):
        return fixed_rss_decide(ctx, self.rss_threshold_dbm)


@dataclass(frozen=True)
class HysteresisStrategy:
    rss_threshold_dbm: float
    method = Method.HYSTERESIS

    def decide(self, ctx):
        return hysteresis_decide(ctx, self.rss_threshold_dbm)
