"""Monte Carlo sweep over MT speed for the three handover strategies.

Every trial owns a random stream derived from the master seed and its
position in the sweep (``speed_index * trials_per_speed + trial_index``),
so results do not depend on how trials are batched or parallelised.
"""

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._accel import resolve_backend
from .decision import (
    ESTIMATORS,
    DecisionContext,
    FixedRssStrategy,
    HneStrategy,
    HysteresisStrategy,
    Method,
)
from .errors import ConfigError
from .geometry import (
    CellGeometry,
    ChordTrajectory,
    angles_from_uniforms,
    chord_length,
    chord_offset,
    distance_to_ap,
    dwell_time,
    sample_central_angles,
)
from .radio import RadioModel, RssSample, radius_to_threshold, threshold_to_radius
from .thresholds import (
    HandoverLatencies,
    ToleranceTargets,
    compute_thresholds,
    failure_prob_baseline,
    failure_prob_for_t1,
    unnecessary_prob_baseline,
    unnecessary_prob_for_t2,
)

KMH_PER_MPS = 3.6
RESIDUAL_MODES = ("cell", "circle")
BLOCK_SIZE = 1000


def kmh_to_mps(speed_kmh):
    return speed_kmh / KMH_PER_MPS


def default_speeds_kmh():
    """3.6 km/h to 100 km/h in 2 km/h steps (49 speeds, last one 99.6 km/h)."""
    n = int(math.floor((100.0 - 3.6) / 2.0)) + 1
    return tuple(round(3.6 + 2.0 * k, 10) for k in range(n))


class TrialOutcome(enum.IntEnum):
    NO_HANDOVER = kernels.NO_HANDOVER
    SUCCESS = kernels.SUCCESS
    FAILURE = kernels.FAILURE
    UNNECESSARY = kernels.UNNECESSARY


ALL_METHODS = (Method.HNE, Method.FIXED_RSS, Method.HYSTERESIS)
_KERNEL_COLUMN = {Method.HNE: kernels.HNE, Method.FIXED_RSS: kernels.FIXED, Method.HYSTERESIS: kernels.HYST}


@dataclass(frozen=True)
class SimConfig:
    cell: CellGeometry = field(default_factory=CellGeometry)
    radio: RadioModel = field(default_factory=RadioModel)
    latencies: HandoverLatencies = field(default_factory=HandoverLatencies)
    targets: ToleranceTargets = field(default_factory=ToleranceTargets)
    speeds_kmh: tuple = field(default_factory=default_speeds_kmh)
    trials_per_speed: int = 10000
    seed: int = 1
    methods: tuple = ALL_METHODS
    fixed_radius_m: float = 150.0
    hysteresis_radius_m: float = 120.0
    fixed_threshold_dbm: float | None = None
    hysteresis_threshold_dbm: float | None = None
    sample_interval_s: float = 0.1
    hne_window: int = 10
    hne_estimator: str = "fit"
    residual_mode: str = "cell"

    def __post_init__(self):
        object.__setattr__(self, "speeds_kmh", tuple(float(s) for s in self.speeds_kmh))
        object.__setattr__(self, "methods", tuple(Method(m) for m in self.methods))
        if int(self.trials_per_speed) != self.trials_per_speed or self.trials_per_speed < 1:
            raise ConfigError("trials_per_speed must be a positive integer", "sweep.trials")
        if not self.speeds_kmh:
            raise ConfigError("at least one speed is required", "sweep.speeds")
        if any(not (s > 0 and math.isfinite(s)) for s in self.speeds_kmh):
            raise ConfigError("speeds must be positive", "sweep.speeds")
        if any(b <= a for a, b in zip(self.speeds_kmh, self.speeds_kmh[1:])):
            raise ConfigError("speeds must be strictly increasing", "sweep.speeds")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer", "sweep.seed")
        if not self.methods or len(set(self.methods)) != len(self.methods):
            raise ConfigError("methods must be a non-empty list without repeats", "sweep.methods")
        for key, r in (("baseline.fixed_radius_m", self.fixed_radius_m),
                       ("baseline.hysteresis_radius_m", self.hysteresis_radius_m)):
            if not r >= self.radio.ref_distance_m:
                raise ConfigError("trigger radius must be at least the reference distance", key)
        if not self.sample_interval_s > 0:
            raise ConfigError("sampling interval must be positive", "sampling.interval_s")
        if int(self.hne_window) != self.hne_window or self.hne_window < 1:
            raise ConfigError("HNE window must be a positive integer", "hne.window")
        if self.hne_estimator not in ESTIMATORS:
            raise ConfigError(f"estimator must be one of {ESTIMATORS}", "hne.estimator")
        if self.residual_mode not in RESIDUAL_MODES:
            raise ConfigError(f"residual mode must be one of {RESIDUAL_MODES}", "sweep.residual_mode")

    @property
    def fixed_threshold(self):
        if self.fixed_threshold_dbm is not None:
            return self.fixed_threshold_dbm
        return radius_to_threshold(self.radio, self.fixed_radius_m)

    @property
    def hysteresis_threshold(self):
        if self.hysteresis_threshold_dbm is not None:
            return self.hysteresis_threshold_dbm
        return radius_to_threshold(self.radio, self.hysteresis_radius_m)

    def strategy(self, method):
        method = Method(method)
        if method is Method.HNE:
            return HneStrategy(self.hne_window, self.hne_estimator)
        if method is Method.FIXED_RSS:
            return FixedRssStrategy(self.fixed_threshold)
        return HysteresisStrategy(self.hysteresis_threshold)

    def trigger_radius(self, method):
        method = Method(method)
        if method is Method.HNE:
            return self.cell.radius_m
        return self.fixed_radius_m if method is Method.FIXED_RSS else self.hysteresis_radius_m

    def nominal_radius(self, method):
        """Trigger radius implied by the configured RSS threshold through the path-loss model."""
        method = Method(method)
        if method is Method.HNE:
            return self.cell.radius_m
        thr = self.fixed_threshold if method is Method.FIXED_RSS else self.hysteresis_threshold
        return float(threshold_to_radius(self.radio, thr))


# --------------------------------------------------------------------------- streams


def _stream_key(seed):
    return np.random.SeedSequence(seed).generate_state(2, dtype=np.uint64)


def trial_rng(seed, stream_id, _key=None):
    """Independent generator for one trial: Philox keyed by the seed, counter offset by the stream id."""
    key = _stream_key(seed) if _key is None else _key
    counter = np.array([0, 0, stream_id, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def stream_id(cfg, speed_index, trial_index):
    return speed_index * cfg.trials_per_speed + trial_index


# --------------------------------------------------------------------------- trials


def classify_outcome(triggered, trigger_time_s, residual_dwell_s, latencies):
    if not triggered:
        return TrialOutcome.NO_HANDOVER
    if residual_dwell_s < 0:
        raise ValueError(f"negative residual dwell {residual_dwell_s!r} at t={trigger_time_s!r}")
    if residual_dwell_s < latencies.into_wlan_s:
        return TrialOutcome.FAILURE
    if residual_dwell_s < latencies.round_trip_s:
        return TrialOutcome.UNNECESSARY
    return TrialOutcome.SUCCESS


def _residual(cfg, method, trajectory, trigger_elapsed):
    dwell = dwell_time(trajectory, cfg.cell)
    if method is Method.HNE or cfg.residual_mode == "cell":
        return max(dwell - trigger_elapsed, 0.0)
    r1 = cfg.trigger_radius(method)
    half = 0.5 * float(chord_length(cfg.cell, trajectory.central_angle_rad))
    offset = float(chord_offset(cfg.cell, trajectory.central_angle_rad))
    if offset >= r1:
        return 0.0
    exit_t = min((half + math.sqrt(r1 * r1 - offset * offset)) / trajectory.speed_mps, dwell)
    return max(exit_t - trigger_elapsed, 0.0)


def synthesize_samples(cfg, trajectory, noise):
    """RSS samples every ``sample_interval_s`` from entry until the MT leaves."""
    dt = cfg.sample_interval_s
    radio = cfg.radio
    out = []
    for k, z in enumerate(noise):
        t = (k + 1) * dt
        dist = max(distance_to_ap(trajectory, cfg.cell, trajectory.entry_time_s + t), radio.ref_distance_m)
        rss = (radio.ref_rss_dbm - 10.0 * radio.path_loss_exponent * math.log10(dist / radio.ref_distance_m)
               + radio.shadow_sigma_db * z)
        out.append(RssSample(trajectory.entry_time_s + t, rss))
    return out


def draw_trajectory(cfg, speed_mps, rng):
    entry, central = angles_from_uniforms(rng.random(2))
    traj = ChordTrajectory(float(entry[0]), float(central[0]), float(speed_mps))
    n = int(kernels.sample_counts(np.array([dwell_time(traj, cfg.cell)]), cfg.sample_interval_s)[0])
    return traj, n


def run_trial(method, cfg, speed_mps, rng):
    """Reference single-trial path through the decision module.

    Uses the same draw order as the block kernels, so a generator from
    :func:`trial_rng` reproduces the sweep's outcome for that trial.
    """
    method = Method(method)
    traj, n = draw_trajectory(cfg, speed_mps, rng)
    noise = rng.standard_normal(n)
    ctx = DecisionContext(
        speed_mps=speed_mps,
        rss_samples=tuple(synthesize_samples(cfg, traj, noise)),
        entry_time_s=traj.entry_time_s,
        cell=cfg.cell,
        radio=cfg.radio,
        latencies=cfg.latencies,
        targets=cfg.targets,
        trajectory_complete=True,
    )
    decision = cfg.strategy(method).decide(ctx)
    if not decision.triggered:
        return TrialOutcome.NO_HANDOVER
    elapsed = decision.decided_at_s - traj.entry_time_s
    return classify_outcome(True, decision.decided_at_s, _residual(cfg, method, traj, elapsed), cfg.latencies)


# --------------------------------------------------------------------------- blocks


@dataclass
class BlockInputs:
    half: np.ndarray
    offset: np.ndarray
    dwell: np.ndarray
    counts: np.ndarray
    starts: np.ndarray
    noise: np.ndarray


def draw_block(cfg, speed_index, start, stop, baselines=True):
    """Chords and shadowing draws for trials ``start:stop`` at one speed."""
    v = kmh_to_mps(cfg.speeds_kmh[speed_index])
    key = _stream_key(cfg.seed)
    gens = [trial_rng(cfg.seed, stream_id(cfg, speed_index, i), key) for i in range(start, stop)]
    u = np.array([g.random(2) for g in gens]).reshape(-1, 2)
    _, central = angles_from_uniforms(u)
    length = chord_length(cfg.cell, central)
    dwell = length / v
    counts = kernels.sample_counts(dwell, cfg.sample_interval_s)
    n_noise = counts if baselines else np.minimum(counts, cfg.hne_window)
    starts = np.zeros(len(gens) + 1, dtype=np.int64)
    np.cumsum(n_noise, out=starts[1:])
    noise = np.empty(starts[-1])
    for g, a, b in zip(gens, starts[:-1], starts[1:]):
        g.standard_normal(out=noise[a:b])
    return BlockInputs(0.5 * length, chord_offset(cfg.cell, central), dwell, counts, starts, noise)


def block_params(cfg, speed_mps):
    radio = cfg.radio
    threshold = compute_thresholds(cfg.cell.radius_m, speed_mps, cfg.latencies, cfg.targets)
    return kernels.pack_params(
        speed_mps, cfg.sample_interval_s, cfg.cell.radius_m, radio.ref_rss_dbm,
        10.0 * radio.path_loss_exponent, radio.ref_distance_m, radio.shadow_sigma_db,
        math.exp(-2.0 * radio.log_sigma**2), threshold.decision_threshold_s,
        cfg.fixed_threshold, cfg.hysteresis_threshold, cfg.fixed_radius_m, cfg.hysteresis_radius_m,
        cfg.latencies.into_wlan_s, cfg.latencies.out_of_wlan_s,
    )


def simulate_block(cfg, speed_index, start, stop, backend=None):
    """Outcome codes ``(stop - start, 3)`` for a contiguous range of trials at one speed."""
    baselines = any(m is not Method.HNE for m in cfg.methods)
    inputs = draw_block(cfg, speed_index, start, stop, baselines)
    params = block_params(cfg, kmh_to_mps(cfg.speeds_kmh[speed_index]))
    return kernels.replay_block(
        inputs.half, inputs.offset, inputs.dwell, inputs.counts, inputs.starts, inputs.noise, params,
        window=cfg.hne_window,
        estimator=kernels.ESTIMATOR_FIT if cfg.hne_estimator == "fit" else kernels.ESTIMATOR_MEAN_DB,
        residual_mode=kernels.RESIDUAL_CELL if cfg.residual_mode == "cell" else kernels.RESIDUAL_CIRCLE,
        baselines=baselines,
        backend=backend,
    )


def _block_task(args):
    cfg, speed_index, start, stop, backend = args
    codes = simulate_block(cfg, speed_index, start, stop, backend)
    counts = np.stack([np.bincount(codes[:, j], minlength=4) for j in range(kernels.N_METHODS)])
    return speed_index, counts


# --------------------------------------------------------------------------- sweep


@dataclass(frozen=True)
class SweepRow:
    speed_kmh: float
    method: Method
    trials: int
    triggers: int
    failures: int
    unnecessary: int
    successes: int
    no_handover: int
    empirical_failure_prob: float
    analytic_failure_prob: float
    empirical_unnecessary_prob: float
    analytic_unnecessary_prob: float

    @property
    def speed_mps(self):
        return kmh_to_mps(self.speed_kmh)


@dataclass(frozen=True)
class SweepResult:
    config: SimConfig
    rows: tuple
    backend: str

    def row(self, speed_kmh, method):
        method = Method(method)
        for r in self.rows:
            if r.method is method and math.isclose(r.speed_kmh, speed_kmh, rel_tol=0, abs_tol=1e-9):
                return r
        raise KeyError((speed_kmh, method))

    def series(self, method, column):
        method = Method(method)
        return np.array([getattr(r, column) for r in self.rows if r.method is method])


def analytic_probabilities(cfg, method, speed_mps):
    """Closed-form (failure, unnecessary) probabilities for one method at one speed.

    The unnecessary figure counts every handover whose stay is shorter than
    the round-trip latency, failures included.
    """
    method = Method(method)
    lat = cfg.latencies
    if method is Method.HNE:
        R = cfg.cell.radius_m
        thr = compute_thresholds(R, speed_mps, lat, cfg.targets).decision_threshold_s
        # a latency longer than any crossing makes the threshold infinite: no triggers
        if math.isinf(thr):
            return 0.0, 0.0
        return (
            failure_prob_for_t1(R, speed_mps, lat.into_wlan_s, thr),
            unnecessary_prob_for_t2(R, speed_mps, lat.into_wlan_s, lat.out_of_wlan_s, thr),
        )
    r1 = cfg.nominal_radius(method)
    return (
        failure_prob_baseline(speed_mps, lat.into_wlan_s, r1),
        unnecessary_prob_baseline(speed_mps, lat.into_wlan_s, lat.out_of_wlan_s, r1),
    )


def _make_row(cfg, speed_kmh, method, counts):
    none, ok, fail, unn = (int(c) for c in counts)
    trials = none + ok + fail + unn
    triggers = trials - none
    pf, pu = analytic_probabilities(cfg, method, kmh_to_mps(speed_kmh))
    emp_f = fail / triggers if triggers else math.nan
    emp_u = (fail + unn) / triggers if triggers else math.nan
    return SweepRow(speed_kmh, method, trials, triggers, fail, unn, ok, none, emp_f, pf, emp_u, pu)


def iter_tasks(cfg, backend, block_size=BLOCK_SIZE):
    for si in range(len(cfg.speeds_kmh)):
        for start in range(0, cfg.trials_per_speed, block_size):
            yield cfg, si, start, min(start + block_size, cfg.trials_per_speed), backend


def run_sweep(cfg, workers=1, backend=None, block_size=BLOCK_SIZE, progress=None):
    """Run every configured speed and method; results are independent of ``workers``."""
    backend = resolve_backend(backend)
    totals = np.zeros((len(cfg.speeds_kmh), kernels.N_METHODS, 4), dtype=np.int64)
    tasks = list(iter_tasks(cfg, backend, block_size))
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_block_task, tasks)
            for si, counts in results:
                totals[si] += counts
                if progress:
                    progress(si)
    else:
        for task in tasks:
            si, counts = _block_task(task)
            totals[si] += counts
            if progress:
                progress(si)
    rows = []
    for si, speed in enumerate(cfg.speeds_kmh):
        for method in cfg.methods:
            rows.append(_make_row(cfg, speed, method, totals[si, _KERNEL_COLUMN[method]]))
    return SweepResult(cfg, tuple(rows), backend)


# --------------------------------------------------------------------------- oracle check


@dataclass(frozen=True)
class VerificationCell:
    method: Method
    speed_kmh: float
    metric: str
    empirical: float
    analytic: float
    bound: float

    @property
    def deviation(self):
        return abs(self.empirical - self.analytic)

    @property
    def passed(self):
        return self.deviation <= self.bound


@dataclass(frozen=True)
class VerificationReport:
    samples: int
    cells: tuple

    @property
    def passed(self):
        return all(c.passed for c in self.cells)

    def failures(self):
        return [c for c in self.cells if not c.passed]


def binomial_bound(p, n, k=3.0):
    return k * math.sqrt(max(p * (1.0 - p), 0.0) / n)


def verify_analytic(cfg, samples=100_000, speeds_kmh=(10.0, 50.0, 100.0), methods=None):
    """Check the closed forms against chords drawn directly on each decision circle.

    Noise-free, with exact distances: HNE chords live on the cell and are
    judged by the dwell estimate from one exact AP-distance reading at a
    random point of the chord; baseline chords live on the configured
    trigger circle and hand over on entry.  Each empirical frequency must
    sit within three binomial standard deviations of its closed form.
    """
    if samples < 10_000:
        raise ValueError("verification needs at least 10^4 samples per cell")
    methods = cfg.methods if methods is None else tuple(Method(m) for m in methods)
    lat = cfg.latencies
    cells = []
    for mi, method in enumerate(ALL_METHODS):
        if method not in methods:
            continue
        for si, speed_kmh in enumerate(speeds_kmh):
            v = kmh_to_mps(speed_kmh)
            rng = np.random.default_rng([cfg.seed, 0x5EED, mi, si])
            circle = CellGeometry(cfg.trigger_radius(method))
            _, central = sample_central_angles(rng, samples)
            length = chord_length(circle, central)
            dwell = length / v
            if method is Method.HNE:
                R = circle.radius_m
                thr = compute_thresholds(R, v, lat, cfg.targets).decision_threshold_s
                # exact AP distance at a uniform point of the chord (never exactly at entry)
                elapsed = (1.0 - rng.random(samples)) * dwell
                along = 0.5 * length - v * elapsed
                l_os = np.minimum(np.hypot(chord_offset(circle, central), along), R)
                with np.errstate(invalid="ignore", divide="ignore"):
                    est = (R * R - l_os * l_os + (v * elapsed) ** 2) / (v * v * elapsed)
                est = np.where(dwell > 0, est, 0.0)
                triggered = est >= thr
            else:
                triggered = np.ones(samples, dtype=bool)
            emp_f = np.count_nonzero(triggered & (dwell < lat.into_wlan_s)) / samples
            emp_u = np.count_nonzero(triggered & (dwell < lat.round_trip_s)) / samples
            pf, pu = analytic_probabilities(cfg, method, v)
            cells.append(VerificationCell(method, speed_kmh, "failure", emp_f, pf, binomial_bound(pf, samples)))
            cells.append(VerificationCell(method, speed_kmh, "unnecessary", emp_u, pu, binomial_bound(pu, samples)))
    return VerificationReport(samples, tuple(cells))
