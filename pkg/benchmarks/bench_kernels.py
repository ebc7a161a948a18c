"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from hausdorff import _fallback

try:
    from hausdorff import _speedups
except ImportError:  # extension not built
    _speedups = None


def cases(rng):
    v = rng.normal(size=100_000)
    M = rng.normal(size=(40, 40))
    f0 = rng.normal(size=40)
    return {
        "pairwise_sum n=1e5": lambda mod: mod.pairwise_sum(v),
        "ascent_qp 40x40 p=3 q=4": lambda mod: mod.ascent_qp(M, 3.0, 4.0, f0),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'case':28s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, fn in cases(rng).items():
        py = min(timeit.repeat(lambda: fn(_fallback), number=1, repeat=args.repeat)) * 1e3
        if _speedups is None:
            print(f"{name:28s} {py:12.3f} {'n/a':>12s}")
            continue
        cy = min(timeit.repeat(lambda: fn(_speedups), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:28s} {py:12.3f} {cy:12.3f} {py / cy:8.1f}x")


if __name__ == "__main__":
    main()
