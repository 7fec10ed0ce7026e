"""Replay kernels for blocks of Monte Carlo trials.

A block is a batch of chords at one speed plus, for every chord, the
standard-normal shadowing draws for its RSS samples, stored flat
(CSR-style: ``starts[i]:starts[i+1]`` belongs to trial ``i``).  The kernel
synthesises RSS along each chord, replays all three strategies and
classifies each outcome.

Two implementations compute the same thing: an explicit loop compiled with
numba when available, and a vectorised numpy version.  The loop is also
valid (slow) pure Python.
"""

import math

import numpy as np

from ._accel import njit, resolve_backend

NO_HANDOVER = 0
SUCCESS = 1
FAILURE = 2
UNNECESSARY = 3

HNE, FIXED, HYST = 0, 1, 2
N_METHODS = 3

ESTIMATOR_FIT = 0
ESTIMATOR_MEAN_DB = 1
RESIDUAL_CELL = 0
RESIDUAL_CIRCLE = 1

# layout of the float parameter vector
(
    P_SPEED,
    P_DT,
    P_RADIUS,
    P_REF_RSS,
    P_SLOPE,  # 10 * path loss exponent
    P_REF_DIST,
    P_SIGMA,
    P_L2_CORR,
    P_HNE_THRESHOLD,
    P_THR_FIXED,
    P_THR_HYST,
    P_R1_FIXED,
    P_R1_HYST,
    P_TAU_IN,
    P_TAU_OUT,
) = range(15)
N_PARAMS = 15


def pack_params(
    speed, dt, radius, ref_rss, slope, ref_dist, sigma, l2_corr, hne_threshold,
    thr_fixed, thr_hyst, r1_fixed, r1_hyst, tau_in, tau_out,
):
    return np.array(
        [speed, dt, radius, ref_rss, slope, ref_dist, sigma, l2_corr, hne_threshold,
         thr_fixed, thr_hyst, r1_fixed, r1_hyst, tau_in, tau_out],
        dtype=np.float64,
    )


def sample_counts(dwell, dt):
    """Number of RSS samples taken at ``dt, 2dt, ...`` before the MT leaves."""
    return np.floor(dwell / dt + 1e-9).astype(np.int64)


@njit
def _classify(residual, tau_in, tau_out):
    if residual < tau_in:
        return FAILURE
    if residual < tau_in + tau_out:
        return UNNECESSARY
    return SUCCESS


@njit
def _circle_exit(half, offset, dwell, speed, r1):
    # time at which the straight path leaves the trigger circle, capped at the cell exit
    if offset >= r1:
        return -1.0
    t = (half + math.sqrt(r1 * r1 - offset * offset)) / speed
    return min(t, dwell)


@njit
def replay_block_loop(half, offset, dwell, counts, starts, noise, params, window,
                      estimator, residual_mode, baselines):
    n = half.shape[0]
    out = np.zeros((n, N_METHODS), dtype=np.int8)
    v = params[P_SPEED]
    dt = params[P_DT]
    R = params[P_RADIUS]
    ref_rss = params[P_REF_RSS]
    slope = params[P_SLOPE]
    d_ref = params[P_REF_DIST]
    sigma = params[P_SIGMA]
    l2_corr = params[P_L2_CORR]
    hne_thr = params[P_HNE_THRESHOLD]
    tau_in = params[P_TAU_IN]
    tau_out = params[P_TAU_OUT]
    max_dwell = 2.0 * R / v
    for i in range(n):
        m = counts[i]
        base = starts[i]
        a = half[i]
        h = offset[i]

        # HNE: one decision after `window` samples
        if m >= window:
            sxy = 0.0
            sxx = 0.0
            rss_sum = 0.0
            for k in range(window):
                tau = (k + 1) * dt
                along = a - v * tau
                dist = max(math.sqrt(h * h + along * along), d_ref)
                rss = ref_rss - slope * math.log10(dist / d_ref) + sigma * noise[base + k]
                if estimator == ESTIMATOR_FIT:
                    lh = d_ref * 10.0 ** ((ref_rss - rss) / slope)
                    d = v * tau
                    sxy += d * (R * R + d * d - lh * lh * l2_corr)
                    sxx += d * d
                else:
                    rss_sum += rss
            elapsed = window * dt
            if estimator == ESTIMATOR_FIT:
                total = sxy / sxx / v
            else:
                lh = min(d_ref * 10.0 ** ((ref_rss - rss_sum / window) / slope), R)
                total = (R * R - lh * lh + (v * elapsed) * (v * elapsed)) / (v * v * elapsed)
            total = min(max(total, elapsed), max_dwell)
            if total - elapsed >= hne_thr:
                out[i, HNE] = _classify(dwell[i] - elapsed, tau_in, tau_out)

        if not baselines:
            continue
        # fixed RSS and hysteresis: first sample at or above the threshold
        for j in range(1, N_METHODS):
            thr = params[P_THR_FIXED] if j == FIXED else params[P_THR_HYST]
            r1 = params[P_R1_FIXED] if j == FIXED else params[P_R1_HYST]
            for k in range(m):
                tau = (k + 1) * dt
                along = a - v * tau
                dist = max(math.sqrt(h * h + along * along), d_ref)
                rss = ref_rss - slope * math.log10(dist / d_ref) + sigma * noise[base + k]
                if rss >= thr:
                    if residual_mode == RESIDUAL_CELL:
                        residual = dwell[i] - tau
                    else:
                        residual = max(_circle_exit(a, h, dwell[i], v, r1) - tau, 0.0)
                    out[i, j] = _classify(residual, tau_in, tau_out)
                    break
    return out


def _classify_array(residual, tau_in, tau_out):
    return np.where(
        residual < tau_in, FAILURE, np.where(residual < tau_in + tau_out, UNNECESSARY, SUCCESS)
    ).astype(np.int8)


def replay_block_numpy(half, offset, dwell, counts, starts, noise, params, window,
                       estimator, residual_mode, baselines):
    n = half.shape[0]
    out = np.zeros((n, N_METHODS), dtype=np.int8)
    v = params[P_SPEED]
    dt = params[P_DT]
    R = params[P_RADIUS]
    ref_rss = params[P_REF_RSS]
    slope = params[P_SLOPE]
    d_ref = params[P_REF_DIST]
    sigma = params[P_SIGMA]
    tau_in = params[P_TAU_IN]
    tau_out = params[P_TAU_OUT]

    lengths = np.diff(starts)
    trial = np.repeat(np.arange(n), lengths)
    k = np.arange(starts[-1]) - np.repeat(starts[:-1], lengths)
    tau = (k + 1) * dt
    along = half[trial] - v * tau
    h = offset[trial]
    dist = np.maximum(np.sqrt(h * h + along * along), d_ref)
    rss = ref_rss - slope * np.log10(dist / d_ref) + sigma * noise

    # HNE
    decided = counts >= window
    win = (k < window) & decided[trial]
    elapsed = window * dt
    if estimator == ESTIMATOR_FIT:
        lh = d_ref * 10.0 ** ((ref_rss - rss[win]) / slope)
        d = v * tau[win]
        sxy = np.bincount(trial[win], weights=d * (R * R + d * d - lh * lh * params[P_L2_CORR]),
                          minlength=n)
        sxx = np.bincount(trial[win], weights=d * d, minlength=n)
        with np.errstate(invalid="ignore", divide="ignore"):
            total = sxy / sxx / v
    else:
        rss_sum = np.bincount(trial[win], weights=rss[win], minlength=n)
        lh = np.minimum(d_ref * 10.0 ** ((ref_rss - rss_sum / window) / slope), R)
        total = (R * R - lh * lh + (v * elapsed) * (v * elapsed)) / (v * v * elapsed)
    total = np.minimum(np.maximum(total, elapsed), 2.0 * R / v)
    trig = decided & (total - elapsed >= params[P_HNE_THRESHOLD])
    out[trig, HNE] = _classify_array(dwell[trig] - elapsed, tau_in, tau_out)

    if not baselines:
        return out
    for j, thr_key, r1_key in ((FIXED, P_THR_FIXED, P_R1_FIXED), (HYST, P_THR_HYST, P_R1_HYST)):
        hit = np.flatnonzero(rss >= params[thr_key])
        if hit.size == 0:
            continue
        first = hit[np.r_[True, trial[hit[1:]] != trial[hit[:-1]]]]
        idx = trial[first]
        t_trig = tau[first]
        if residual_mode == RESIDUAL_CELL:
            residual = dwell[idx] - t_trig
        else:
            r1 = params[r1_key]
            a, o = half[idx], offset[idx]
            with np.errstate(invalid="ignore"):
                exit_t = np.minimum((a + np.sqrt(r1 * r1 - o * o)) / v, dwell[idx])
            exit_t = np.where(o < r1, exit_t, -1.0)
            residual = np.maximum(exit_t - t_trig, 0.0)
        out[idx, j] = _classify_array(residual, tau_in, tau_out)
    return out


def replay_block(half, offset, dwell, counts, starts, noise, params, window=10,
                 estimator=ESTIMATOR_FIT, residual_mode=RESIDUAL_CELL, baselines=True,
                 backend=None):
    """Outcome codes, shape ``(n_trials, 3)``, columns HNE / fixed RSS / hysteresis."""
    backend = resolve_backend(backend)
    fn = replay_block_loop if backend == "numba" else replay_block_numpy
    return fn(
        np.ascontiguousarray(half, dtype=np.float64),
        np.ascontiguousarray(offset, dtype=np.float64),
        np.ascontiguousarray(dwell, dtype=np.float64),
        np.ascontiguousarray(counts, dtype=np.int64),
        np.ascontiguousarray(starts, dtype=np.int64),
        np.ascontiguousarray(noise, dtype=np.float64),
        np.ascontiguousarray(params, dtype=np.float64),
        int(window), int(estimator), int(residual_mode), bool(baselines),
    )
