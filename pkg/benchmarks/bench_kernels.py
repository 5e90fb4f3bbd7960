"""Compare the numba and numpy batch kernels on full enumerations.

    python benchmarks/bench_kernels.py --depths 15 18 21 24 --repeat 3

Each row times kraft_report (every valid program up to the depth, default
fuel) and a target scan for "1", and checks both backends give identical
exact results. The first numba call per process includes JIT/cache load;
it is reported separately and excluded from the timings.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from genprob.enumerator import count_valid, estimate_probability, kraft_report
from genprob.kernels import run_batch


def best_of(fn, repeat):
    times = []
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depths", type=int, nargs="+", default=[15, 18, 21, 24])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--fuel", type=int, default=10_000)
    args = ap.parse_args()

    t0 = time.perf_counter()
    run_batch(np.zeros((1, 1)), np.zeros((1, 1)), np.ones(1), 1, backend="numba")
    print(f"numba warm-up (compile or cache load): {time.perf_counter() - t0:.3f}s")
    print(f"{'depth':>5} {'programs':>9} {'task':>6} {'numba s':>9} {'numpy s':>9} {'speedup':>8}  same")

    for depth in args.depths:
        programs = sum(count_valid(n) for n in range(depth + 1))
        tasks = {
            "kraft": lambda be: kraft_report(depth, backend=be),
            "prob": lambda be: estimate_probability("1", depth, backend=be),
        }
        for name, task in tasks.items():
            t_nb, r_nb = best_of(lambda: task("numba"), args.repeat)
            t_np, r_np = best_of(lambda: task("numpy"), args.repeat)
            print(
                f"{depth:>5} {programs:>9} {name:>6} {t_nb:>9.4f} {t_np:>9.4f} "
                f"{t_np / t_nb:>7.1f}x  {r_nb == r_np}"
            )


if __name__ == "__main__":
    main()
