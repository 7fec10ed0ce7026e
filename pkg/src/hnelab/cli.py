"""Command-line front end: ``hnelab sweep | thresholds | verify | pdf``.

Exit codes: 0 success, 1 configuration/argument error, 2 I/O error,
3 threshold domain violation (cell too small for the speed), 4 analytic
verification mismatch.
"""

import argparse
import csv
import io
import json
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import config_to_dict, config_to_text, load_config
from .errors import ConfigError, DomainError
from .geometry import CellGeometry, dwell_time_cdf, dwell_time_pdf
from .simulator import ALL_METHODS, kmh_to_mps, run_sweep, verify_analytic
from .thresholds import (
    HandoverLatencies,
    ToleranceTargets,
    compute_thresholds,
    failure_prob_for_t1,
    unnecessary_prob_for_t2,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_DOMAIN = 3
EXIT_VERIFY = 4

SWEEP_COLUMNS = (
    "speed_kmh",
    "method",
    "trials",
    "triggers",
    "failures",
    "unnecessary",
    "successes",
    "no_handover",
    "empirical_failure_prob",
    "analytic_failure_prob",
    "empirical_unnecessary_prob",
    "analytic_unnecessary_prob",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _fmt_prob(p):
    return f"{p:.6f}"


def _fmt_speed(s):
    return format(s, ".10g")


def _fmt_threshold(t):
    return "never (inf)" if math.isinf(t) else f"{t:.5g} s"


def _err(msg):
    print(msg, file=sys.stderr)


# --------------------------------------------------------------------------- output


def sweep_csv(result):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in result.rows:
        w.writerow([
            _fmt_speed(r.speed_kmh), r.method.value, r.trials, r.triggers, r.failures, r.unnecessary,
            r.successes, r.no_handover, _fmt_prob(r.empirical_failure_prob), _fmt_prob(r.analytic_failure_prob),
            _fmt_prob(r.empirical_unnecessary_prob), _fmt_prob(r.analytic_unnecessary_prob),
        ])
    return buf.getvalue()


def metric_csv(result, column):
    """Wide table, one row per speed and one count column per method (plot-ready)."""
    methods = result.config.methods
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["speed_kmh", *(m.value for m in methods)])
    for speed in result.config.speeds_kmh:
        w.writerow([_fmt_speed(speed), *(getattr(result.row(speed, m), column) for m in methods)])
    return buf.getvalue()


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


# --------------------------------------------------------------------------- commands


def _overrides(args):
    values = {}
    for item in args.set or ():
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        values[key.strip()] = value.strip()
    if getattr(args, "seed", None) is not None:
        values["sweep.seed"] = str(args.seed)
    if getattr(args, "speeds", None) is not None:
        values["sweep.speeds"] = args.speeds
    if getattr(args, "trials", None) is not None:
        values["sweep.trials"] = str(args.trials)
    if getattr(args, "method", None):
        values["sweep.methods"] = ",".join(args.method)
    return values


def cmd_sweep(args):
    started = datetime.now(timezone.utc)
    cfg = load_config(args.config, _overrides(args))
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        _err(f"cannot create output directory {out}: {exc}")
        return EXIT_IO
    t0 = time.perf_counter()
    result = run_sweep(cfg, workers=args.workers, backend=args.backend)
    elapsed = time.perf_counter() - t0
    try:
        outputs = {
            "sweep": _write(out / "sweep.csv", sweep_csv(result)),
            "failures": _write(out / "failures.csv", metric_csv(result, "failures")),
            "unnecessary": _write(out / "unnecessary.csv", metric_csv(result, "unnecessary")),
            "config": _write(out / "config.resolved.cfg", config_to_text(cfg)),
        }
        manifest = {
            "tool": "hnelab",
            "version": __version__,
            "command": "sweep",
            "argv": sys.argv[1:],
            "seed": cfg.seed,
            "config": config_to_dict(cfg),
            "speeds_kmh": list(cfg.speeds_kmh),
            "speeds_mps": [kmh_to_mps(s) for s in cfg.speeds_kmh],
            "backend": result.backend,
            "workers": args.workers,
            "started_at": started.isoformat(),
            "finished_at": datetime.now(timezone.utc).isoformat(),
            "elapsed_s": round(elapsed, 3),
            "outputs": outputs,
            "replay": f"hnelab sweep --config {outputs['config']} --out {out}",
        }
        outputs["manifest"] = str(out / "manifest.json")
        _write(out / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    except OSError as exc:
        _err(f"cannot write results to {out}: {exc}")
        return EXIT_IO
    _err(f"sweep: {len(cfg.speeds_kmh)} speeds x {cfg.trials_per_speed} trials in {elapsed:.1f} s "
         f"[{result.backend}] -> {out}")
    return EXIT_OK


def _speed_arg(args):
    if args.speed_kmh is not None:
        return kmh_to_mps(args.speed_kmh)
    return args.speed


def cmd_thresholds(args):
    v = _speed_arg(args)
    if not (v > 0 and args.radius > 0):
        raise ConfigError("speed and radius must be positive")
    latencies = HandoverLatencies(args.tau_in, args.tau_out)
    targets = ToleranceTargets(args.pf, args.pu)
    res = compute_thresholds(args.radius, v, latencies, targets)
    diameter = 2.0 * args.radius
    if v * latencies.into_wlan_s > diameter or v * latencies.round_trip_s > diameter:
        print(f"T1 = {_fmt_threshold(res.t1_s)}")
        print(f"T2 = {_fmt_threshold(res.t2_s)}")
        _err(f"cell too small at this speed: the longest crossing lasts {diameter / v:.5g} s, "
             f"shorter than the handover latency; handover should never trigger")
        return EXIT_DOMAIN
    pf = failure_prob_for_t1(args.radius, v, latencies.into_wlan_s, res.t1_s)
    pu = unnecessary_prob_for_t2(args.radius, v, latencies.into_wlan_s, latencies.out_of_wlan_s, res.t2_s)
    print(f"T1 = {_fmt_threshold(res.t1_s)}")
    print(f"T2 = {_fmt_threshold(res.t2_s)}")
    print(f"decision threshold = {_fmt_threshold(res.decision_threshold_s)}")
    print(f"recovered P_f = {_fmt_prob(pf)}")
    print(f"recovered P_u = {_fmt_prob(pu)}")
    return EXIT_OK


def cmd_verify(args):
    overrides = _overrides(args)
    overrides.pop("sweep.speeds", None)
    cfg = load_config(args.config, overrides)
    speeds = tuple(float(s) for s in args.speeds.split(",")) if args.speeds else (10.0, 50.0, 100.0)
    report = verify_analytic(cfg, samples=args.samples, speeds_kmh=speeds)
    print(f"{'method':<11} {'km/h':>6} {'metric':<11} {'empirical':>10} {'analytic':>10} "
          f"{'deviation':>10} {'bound':>10}  result")
    for c in report.cells:
        print(f"{c.method.value:<11} {_fmt_speed(c.speed_kmh):>6} {c.metric:<11} {c.empirical:10.6f} "
              f"{c.analytic:10.6f} {c.deviation:10.6f} {c.bound:10.6f}  {'pass' if c.passed else 'FAIL'}")
    bad = report.failures()
    print(f"{len(report.cells) - len(bad)}/{len(report.cells)} cells within the 3-sigma binomial bound "
          f"({report.samples} samples per cell)")
    return EXIT_OK if not bad else EXIT_VERIFY


def cmd_pdf(args):
    v = _speed_arg(args)
    if args.points < 2 or not (v > 0 and args.radius > 0):
        raise ConfigError("pdf grid needs at least 2 points and positive radius and speed")
    cell = CellGeometry(args.radius)
    T = np.linspace(0.0, cell.max_dwell_s(v), args.points)
    pdf = dwell_time_pdf(T, cell, v)
    cdf = dwell_time_cdf(T, cell, v)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["T_s", "pdf", "cdf"])
    for row in zip(T, pdf, cdf):
        w.writerow([repr(float(x)) for x in row])
    if args.out:
        try:
            Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
        except OSError as exc:
            _err(f"cannot write {args.out}: {exc}")
            return EXIT_IO
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


# --------------------------------------------------------------------------- parser


def _add_sim_options(p):
    p.add_argument("--config", help="key = value configuration file (defaults: reference parameters)")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--speeds", help="speeds in km/h: 'start:stop:step' or comma list")
    p.add_argument("--trials", type=int, help="trials per speed")
    p.add_argument("--method", action="append", choices=[m.value for m in ALL_METHODS],
                   help="restrict to a method (repeatable)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key (repeatable)")


def build_parser():
    parser = _Parser(prog="hnelab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hnelab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sweep", help="Monte Carlo sweep over speed; writes CSV files and a manifest")
    _add_sim_options(p)
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")
    p.add_argument("--backend", choices=("numba", "numpy"), help="kernel implementation")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("thresholds", help="time thresholds T1/T2 and their round-trip probabilities")
    p.add_argument("--radius", type=float, default=150.0, help="cell radius, m")
    speed = p.add_mutually_exclusive_group()
    speed.add_argument("--speed", type=float, default=20.0, help="MT speed, m/s")
    speed.add_argument("--speed-kmh", type=float, help="MT speed, km/h")
    p.add_argument("--tau-in", type=float, default=2.0, help="cellular-to-WLAN handover delay, s")
    p.add_argument("--tau-out", type=float, default=2.0, help="WLAN-to-cellular handover delay, s")
    p.add_argument("--pf", type=float, default=0.02, help="tolerable failure probability, in (0, 1)")
    p.add_argument("--pu", type=float, default=0.04, help="tolerable unnecessary-handover probability, in (0, 1)")
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("verify", help="closed forms vs. noise-free chord sampling (3-sigma binomial bound)")
    _add_sim_options(p)
    p.add_argument("--samples", type=int, default=100_000, help="chords per cell (>= 10000)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pdf", help="dwell-time density and distribution on an even grid, as CSV")
    p.add_argument("--radius", type=float, default=150.0, help="cell radius, m")
    speed = p.add_mutually_exclusive_group()
    speed.add_argument("--speed", type=float, default=10.0, help="MT speed, m/s")
    speed.add_argument("--speed-kmh", type=float, help="MT speed, km/h")
    p.add_argument("--points", type=int, default=101, help="grid points over [0, 2R/v]")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_pdf)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    except DomainError as exc:
        _err(f"invalid argument: {exc}")
        return EXIT_CONFIG
    except ValueError as exc:
        _err(f"invalid argument: {exc}")
        return EXIT_CONFIG
    except OSError as exc:
        _err(f"I/O error: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
