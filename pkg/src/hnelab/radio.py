"""Log-distance path loss with i.i.d. log-normal shadowing."""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class RadioModel:
    tx_power_dbm: float = 20.0
    ref_distance_m: float = 1.0
    ref_path_loss_db: float = 40.0
    path_loss_exponent: float = 3.5
    shadow_sigma_db: float = 4.3

    def __post_init__(self):
        if not self.ref_distance_m > 0:
            raise DomainError(f"reference distance must be positive, got {self.ref_distance_m!r}")
        if not self.path_loss_exponent > 0:
            raise DomainError(f"path loss exponent must be positive, got {self.path_loss_exponent!r}")
        if not self.shadow_sigma_db >= 0:
            raise DomainError(f"shadowing sigma must be non-negative, got {self.shadow_sigma_db!r}")

    @property
    def ref_rss_dbm(self):
        """Mean RSS at the reference distance (transmit power minus reference loss)."""
        return self.tx_power_dbm - self.ref_path_loss_db

    @property
    def log_sigma(self):
        """Shadowing standard deviation expressed on the natural-log distance scale."""
        return self.shadow_sigma_db * math.log(10.0) / (10.0 * self.path_loss_exponent)


class RssSample(NamedTuple):
    time_s: float
    rss_dbm: float


def _check_distance(model, distance_m):
    d = np.asarray(distance_m, dtype=float)
    if np.any(~(d >= model.ref_distance_m)):
        raise DomainError(
            f"distance must be at least the reference distance {model.ref_distance_m} m"
        )
    return d


def mean_rss(model, distance_m):
    d = _check_distance(model, distance_m)
    out = model.ref_rss_dbm - 10.0 * model.path_loss_exponent * np.log10(d / model.ref_distance_m)
    return out[()] if out.ndim == 0 else out


def sample_rss(model, distance_m, rng):
    mean = np.asarray(mean_rss(model, distance_m))
    if model.shadow_sigma_db == 0:
        out = mean
    else:
        out = mean + model.shadow_sigma_db * rng.standard_normal(mean.shape)
    return out[()] if np.ndim(out) == 0 else out


def estimate_distance(model, rss_dbm):
    """Invert the mean path-loss curve: the distance at which the mean RSS equals ``rss_dbm``."""
    rss = np.asarray(rss_dbm, dtype=float)
    out = model.ref_distance_m * 10.0 ** (
        (model.ref_rss_dbm - rss) / (10.0 * model.path_loss_exponent)
    )
    return out[()] if out.ndim == 0 else out


def threshold_to_radius(model, rss_threshold_dbm):
    """Radius of the circle on which the mean RSS equals a decision threshold."""
    return estimate_distance(model, rss_threshold_dbm)


def radius_to_threshold(model, radius_m):
    if not radius_m >= model.ref_distance_m:
        raise DomainError(f"radius must be at least the reference distance, got {radius_m!r}")
    return float(mean_rss(model, radius_m))


def estimate_distance_window(model, rss_dbm):
    """Average a window of RSS readings in dB, then invert once."""
    rss = np.asarray(rss_dbm, dtype=float)
    if rss.size == 0:
        raise DomainError("cannot estimate a distance from an empty window")
    return float(estimate_distance(model, rss.mean()))


def unbiased_squared_distance(model, rss_dbm):
    """Per-sample estimate of the squared AP distance with the log-normal bias removed.

    Under Gaussian dB shadowing the inverted distance is ``d * exp(-s Z)``
    with ``s = log_sigma``, so its square overshoots ``d^2`` by
    ``exp(2 s^2)`` on average.
    """
    d = estimate_distance(model, rss_dbm)
    return d * d * math.exp(-2.0 * model.log_sigma**2)
