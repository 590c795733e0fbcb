"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat 3]

Numba timings exclude the first (compiling) call.
"""

import argparse
import math
import time

import numpy as np

from se2geodesics import kernels
from se2geodesics.flow import natural_grid


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    s0 = np.array([0.6, 0.8, 1.0, 0.0, 0.0, 0.0])
    grid = natural_grid(90, 24, 4.0)
    S = np.zeros((grid.shape[0], 6))
    S[:, :3] = grid
    h, n = 5e-3, 1200
    path = kernels.nb_rk4_path(s0, h, n)
    nth = int(2 * math.pi / 2e-2)
    keys, order = kernels.nb_build_index(path, 2e-2, nth)
    steps = np.full(S.shape[0], n, dtype=np.int64)
    hs = np.full(S.shape[0], h)
    scan_args = (path, S, h, 2e-2, 0.1, 0.5, keys, order, 2e-2, nth)
    return {
        "rk4_path (20000 steps)": (
            lambda: kernels.nb_rk4_path(s0, 1e-3, 20000),
            lambda: kernels.np_rk4_path(s0, 1e-3, 20000),
        ),
        f"rk4_endpoints ({S.shape[0]} x {n})": (
            lambda: kernels.nb_rk4_endpoints(S, hs, steps),
            lambda: kernels.np_rk4_endpoints(S, hs, steps),
        ),
        f"scan ({S.shape[0]} covectors x {n} steps)": (
            lambda: kernels.nb_scan(*scan_args),
            lambda: kernels.np_scan(*scan_args),
        ),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not kernels.USE_NUMBA:
        print("numba disabled or missing; both columns run numpy code")
    print(f"{'kernel':44s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}")
    for name, (nb, py) in cases().items():
        nb()  # compile
        t_nb = best_of(nb, args.repeat)
        t_np = best_of(py, args.repeat)
        print(f"{name:44s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f}")


if __name__ == "__main__":
    main()
