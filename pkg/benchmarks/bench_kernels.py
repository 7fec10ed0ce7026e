"""Compare the numba and numpy replay kernels.

Times the kernel alone on pre-drawn blocks (random draws excluded) at a
slow, a medium and a fast speed, then a complete reference sweep per
backend.  Both backends must produce identical outcome codes; the script
exits non-zero otherwise.

    python3 benchmarks/bench_kernels.py [--trials 10000] [--repeat 5] [--no-sweep]
"""

import argparse
import sys
import time

import numpy as np

from hnelab import kernels
from hnelab._accel import NUMBA_AVAILABLE
from hnelab.simulator import SimConfig, block_params, draw_block, kmh_to_mps, run_sweep


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_kernel(cfg, speed_index, backend, repeat):
    block = draw_block(cfg, speed_index, 0, cfg.trials_per_speed)
    params = block_params(cfg, kmh_to_mps(cfg.speeds_kmh[speed_index]))

    def call():
        return kernels.replay_block(block.half, block.offset, block.dwell, block.counts, block.starts,
                                    block.noise, params, window=cfg.hne_window, backend=backend)

    call()  # JIT warm-up for numba, cache warm-up for both
    return best_of(call, repeat), block.noise.size


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-sweep", action="store_true", help="skip the full-sweep comparison")
    args = ap.parse_args(argv)

    if not NUMBA_AVAILABLE:
        print("numba unavailable (or HNELAB_DISABLE_NUMBA set); nothing to compare", file=sys.stderr)
        return 1

    cfg = SimConfig(speeds_kmh=(5.6, 49.6, 99.6), trials_per_speed=args.trials)
    print(f"kernel only, {args.trials} trials per block, best of {args.repeat}")
    print(f"{'km/h':>6} {'samples':>9} {'numba ms':>9} {'numpy ms':>9} {'speedup':>8}")
    mismatch = False
    for si, speed in enumerate(cfg.speeds_kmh):
        (t_nb, codes_nb), n = bench_kernel(cfg, si, "numba", args.repeat)
        (t_np, codes_np), _ = bench_kernel(cfg, si, "numpy", args.repeat)
        mismatch |= not np.array_equal(codes_nb, codes_np)
        print(f"{speed:6g} {n:9d} {1e3 * t_nb:9.2f} {1e3 * t_np:9.2f} {t_np / t_nb:7.1f}x")

    if not args.no_sweep:
        full = SimConfig(trials_per_speed=args.trials)
        print(f"\nfull sweep, {len(full.speeds_kmh)} speeds x {args.trials} trials, serial")
        results = {}
        for backend in ("numba", "numpy"):
            t, results[backend] = best_of(lambda: run_sweep(full, backend=backend), 1)
            print(f"{backend:>6}: {t:6.2f} s")
        mismatch |= results["numba"].rows != results["numpy"].rows

    if mismatch:
        print("MISMATCH between backends", file=sys.stderr)
        return 2
    print("\nbackends agree")
    return 0


if __name__ == "__main__":
    sys.exit(main())
