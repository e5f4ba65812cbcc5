"""Benchmark the compiled kernels against the pure-Python lane.

Runs each hot kernel on both backends, checks the outputs are
bit-identical (same Philox streams, same draw order), and prints the
timing ratio.  Usage:

    python benchmarks/bench_kernels.py [--reps 2000] [--n 4000] [--seed 1]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ulamadd import backends


def _time(fn, repeat: int = 3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=2000)
    ap.add_argument("--n", type=int, default=4000)
    ap.add_argument("--t-max", type=float, default=2000.0)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    if "compiled" not in backends.available_backends():
        print("compiled kernels unavailable; nothing to compare")
        return 1

    grid = np.array([args.n // 4, args.n // 2, args.n], dtype=np.int64)
    t_grid = [args.t_max / 4, args.t_max / 2, args.t_max]
    unit = (0.0, 1.0, 1.0, 1.0)
    cases = [
        (
            "discrete_path (p=1)",
            lambda k: k.discrete_path((1.0,), 1.0, 1.0, 1.0, args.n, args.seed, 0),
        ),
        (
            "discrete_path (p=0.3)",
            lambda k: k.discrete_path((1.0,), 0.3, 1.0, 1.0, args.n, args.seed, 0),
        ),
        (
            f"ensemble_snapshots ({args.reps} reps)",
            lambda k: k.discrete_ensemble_snapshots(
                (1.0,), 1.0, 1.0, 1.0, grid, args.reps, args.seed, 0
            ),
        ),
        (
            "second_moment_forward (n=1e6)",
            lambda k: k.second_moment_forward((1.0,), 0.5, [1000000]),
        ),
        (
            "continuized_path",
            lambda k: k.continuized_path(
                (0.0,), (1.0,), 0.0, args.t_max, 1.0, 1.0, unit, unit, args.seed, 0
            ),
        ),
        (
            f"continuized_snapshots ({args.reps} reps)",
            lambda k: k.continuized_ensemble_snapshots(
                (0.0,), (1.0,), 0.0, args.t_max, 1.0, 1.0, unit, unit,
                t_grid, args.reps, args.seed, 0
            ),
        ),
    ]

    print(f"{'kernel':38s} {'python':>10s} {'compiled':>10s} {'speedup':>8s}  identical")
    for name, call in cases:
        with backends.use_backend("python"):
            t_py, out_py = _time(lambda: call(backends.kernels()))
        with backends.use_backend("compiled"):
            t_cy, out_cy = _time(lambda: call(backends.kernels()))
        same = all(
            np.array_equal(np.asarray(a), np.asarray(b), equal_nan=True)
            for a, b in zip(np.atleast_1d(out_py), np.atleast_1d(out_cy))
        ) if isinstance(out_py, tuple) else np.array_equal(
            np.asarray(out_py), np.asarray(out_cy), equal_nan=True
        )
        print(
            f"{name:38s} {t_py:9.4f}s {t_cy:9.4f}s {t_py / t_cy:7.1f}x  {same}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
