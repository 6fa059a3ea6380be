"""Time the compiled and pure-Python kernel backends on the same inputs.

    python3 benchmarks/bench_kernels.py [--sizes 512,2048,8192] [--repeat 3]

Reports the best-of-``repeat`` wall time for the exact pair sum, the sorted
window (fast) pair sum and the cross sum, plus the speed-up and the largest
difference between the two backends.
"""

import argparse
import time

import numpy as np

from entroplin._backend import BACKENDS
from entroplin.estimate import EstimatorConfig, bandwidth_for, cross_kernel_sum, pair_kernel_sum


def best_time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="512,2048,8192")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--kernel", default="gaussian", choices=["gaussian", "epanechnikov"])
    args = ap.parse_args(argv)
    sizes = [int(v) for v in args.sizes.split(",")]
    names = sorted(BACKENDS)
    if "cython" not in names:
        print("compiled backend not built; timing the Python kernels only")

    rng = np.random.default_rng(0)
    cases = {
        "pair": lambda x, y, cfg, b: pair_kernel_sum(x, cfg, backend=b),
        "pair-fast": lambda x, y, cfg, b: pair_kernel_sum(x, cfg, fast=True, backend=b),
        "cross": lambda x, y, cfg, b: cross_kernel_sum(x, y, cfg, backend=b),
    }
    print(f"{'op':<10} {'n':>7} " + " ".join(f"{b + ' s':>12}" for b in names) + f" {'speed-up':>9} {'max diff':>10}")
    for n in sizes:
        x = rng.standard_normal(n)
        y = rng.standard_normal(n) + 0.5
        cfg = EstimatorConfig(bandwidth_for("paper", n), args.kernel)
        for op, fn in cases.items():
            times, vals = [], []
            for b in names:
                t, v = best_time(lambda: fn(x, y, cfg, b), args.repeat)
                times.append(t)
                vals.append(v)
            speed = times[names.index("python")] / times[names.index("cython")] if len(names) > 1 else float("nan")
            diff = max(abs(v - vals[0]) for v in vals)
            print(f"{op:<10} {n:>7} " + " ".join(f"{t:>12.4f}" for t in times) + f" {speed:>9.1f} {diff:>10.2e}")


if __name__ == "__main__":
    main()
