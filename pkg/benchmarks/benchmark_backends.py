"""Throughput comparison of the compiled and pure-Python path loops.

Runs the same ensemble workload on every available backend, reports
steps/second and the speedup, and verifies that both backends produced
bitwise-identical trajectories.

    python benchmarks/benchmark_backends.py [--trajectories N] [--steps K]
                                            [--workers W]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from blochfb import (
    BlochState,
    IntegratorConfig,
    Mode,
    ReservoirParams,
    build_coefficient_table,
)
from blochfb.backend import available_backends, set_backend
from blochfb.control import OCConfig, feedback_policy, forward_backward_sweep
from blochfb.ensemble import run_ensemble


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trajectories", type=int, default=64)
    ap.add_argument("--steps", type=int, default=15000)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=12345)
    args = ap.parse_args()

    p = ReservoirParams.from_ratio(0.5, kBT=10.0)
    s0 = BlochState(math.sqrt(2) / 4, math.sqrt(2) / 4, math.sqrt(3) / 2)
    dt = 1e-3
    t_max = args.steps * dt
    table = build_coefficient_table(p, t_max, 0.01)
    cfg = IntegratorConfig(dt=dt, t_max=t_max, master_seed=args.seed)

    oc = OCConfig(dt=0.005, t_max=t_max)
    policy = feedback_policy(forward_backward_sweep(p, table, s0, oc))
    total_steps = args.trajectories * args.steps

    results = {}
    stats = {}
    for name in available_backends():
        set_backend(name)
        # pure Python is slow; scale its workload down and extrapolate
        n_traj = args.trajectories if name == "compiled" else max(2, args.trajectories // 16)
        t0 = time.perf_counter()
        s = run_ensemble(
            p, table, cfg, policy, n_traj, Mode.NONMARKOVIAN, s0,
            workers=args.workers,
        )
        elapsed = time.perf_counter() - t0
        rate = n_traj * args.steps / elapsed
        results[name] = rate
        stats[name] = s
        print(
            f"{name:9s}: {n_traj:4d} trajectories x {args.steps} steps "
            f"in {elapsed:7.2f} s -> {rate/1e6:8.3f} Msteps/s"
        )

    if len(results) == 2:
        print(f"speedup (compiled/pure): {results['compiled']/results['pure']:.1f}x")
        # parity on a small shared workload
        set_backend("pure")
        a = run_ensemble(p, table, cfg, policy, 2, Mode.NONMARKOVIAN, s0)
        set_backend("compiled")
        b = run_ensemble(p, table, cfg, policy, 2, Mode.NONMARKOVIAN, s0)
        same = all(
            np.array_equal(getattr(a, f), getattr(b, f))
            for f in ("mean_lambda", "var_lambda", "mean_x", "mean_y", "mean_z")
        )
        print(f"bitwise parity on shared workload: {same}")
    else:
        print("compiled backend unavailable; nothing to compare")
    print(f"workload: {total_steps} steps total at dt={dt}")


if __name__ == "__main__":
    main()
