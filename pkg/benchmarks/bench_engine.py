#!/usr/bin/env python3
"""Benchmark the day-simulation kernel: numba JIT vs pure-Python fallback.

The kernel mode is fixed at import time by the CCSIM_JIT environment
variable, so the comparison re-executes this script in a subprocess per
mode. Run directly for the two-mode comparison, or with --mode to time just
the current interpreter's mode.
"""

import argparse
import json
import os
import subprocess
import sys
import time


def build_inputs(n_calls_per_interval: int, n_intervals: int, agents: int):
    import datetime as dt

    from ccsim.ingest import DayScenario
    from ccsim.sim import SimContext

    sc = DayScenario(
        date=dt.date(2014, 1, 6), interval_length=1800, n_intervals=n_intervals,
        opening=dt.time(8, 0), skills=["a", "b"],
        arrivals_exact={"a": [], "b": []},
        arrival_counts={"a": [n_calls_per_interval] * n_intervals,
                        "b": [n_calls_per_interval // 2] * n_intervals},
        groups={"ga": ["a"], "gab": ["a", "b"]},
        staffing={"ga": [agents] * n_intervals, "gab": [agents // 2 + 1] * n_intervals},
        staffing_no_breaks={"ga": [agents] * n_intervals,
                            "gab": [agents // 2 + 1] * n_intervals},
        ht_samples_day={"a": [], "b": []},
        ht_mean_day={"a": 180.0, "b": 240.0},
        wrapup_mean=3.3,
        patience_observations={"a": [], "b": []},
    )
    ctx = SimContext(patience_means={"a": 120.0, "b": 150.0})
    return sc, ctx


def run_once(reps: int, calls: int, agents: int) -> dict:
    from ccsim.models import ModelConfig
    from ccsim.rng import substream
    from ccsim.sim import run_day
    from ccsim.sim.engine import JIT_ENABLED

    sc, ctx = build_inputs(calls, 24, agents)
    cfg = ModelConfig("ipp", "exp", "yes", "yes", "exp", "yes")

    run_day(sc, cfg, substream(0, "warmup"), ctx)  # compile before timing
    t0 = time.perf_counter()
    total_offered = 0
    for i in range(reps):
        m = run_day(sc, cfg, substream(1, "bench", i), ctx)
        total_offered += m.offered
    elapsed = time.perf_counter() - t0
    return {
        "mode": "numba" if JIT_ENABLED else "python",
        "reps": reps,
        "offered_total": total_offered,
        "seconds": elapsed,
        "reps_per_second": reps / elapsed,
    }


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--calls", type=int, default=60, help="arrivals per 30-min interval")
    ap.add_argument("--agents", type=int, default=10)
    ap.add_argument("--mode", choices=("numba", "python"),
                    help="time only this mode in-process")
    args = ap.parse_args()

    if args.mode:
        os.environ.setdefault("CCSIM_JIT", "1" if args.mode == "numba" else "0")
        result = run_once(args.reps, args.calls, args.agents)
        print(json.dumps(result))
        return 0

    results = {}
    for mode, flag in (("python", "0"), ("numba", "1")):
        env = dict(os.environ, CCSIM_JIT=flag)
        reps = args.reps if mode == "numba" else max(args.reps // 10, 5)
        cmd = [sys.executable, __file__, "--mode", mode, "--reps", str(reps),
               "--calls", str(args.calls), "--agents", str(args.agents)]
        out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
        results[mode] = json.loads(out.stdout.strip().splitlines()[-1])

    py, nb = results["python"], results["numba"]
    print(f"python fallback: {py['reps_per_second']:8.1f} reps/s  ({py['reps']} reps)")
    print(f"numba kernel:    {nb['reps_per_second']:8.1f} reps/s  ({nb['reps']} reps)")
    print(f"speedup:         {nb['reps_per_second'] / py['reps_per_second']:8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
