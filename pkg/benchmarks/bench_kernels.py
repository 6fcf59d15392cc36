"""Compiled vs pure-Python kernels on the DP sweep and Monte Carlo exit times.

    python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from pyramidrate import kernels
from pyramidrate.geometry import Pyramid
from pyramidrate.models import quadrant_model
from pyramidrate.montecarlo import exit_times
from pyramidrate.oracle_dp import LatticeModel, survival_dp


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--N", type=int, default=600)
    ap.add_argument("--chains", type=int, default=1_000_000)
    args = ap.parse_args()

    if kernels.compiled_backend is None:
        print("compiled kernels not available; build with `pip install -e .`")
        return 1
    K = Pyramid.orthant(2)
    cases = []
    for number in (1, 12):
        d = quadrant_model(number).distribution()
        model = LatticeModel.from_model(d, K)
        cases.append((f"dp model {number} N={args.N}",
                      lambda b, m=model: survival_dp(m, (0, 0), args.N, backend=b).values))
        cases.append((f"mc model {number} {args.chains} chains h=50",
                      lambda b, d=d: exit_times(d, K.normals, np.zeros(2), 7, args.chains, 50,
                                                backend=b)))

    print(f"{'case':<36}{'python s':>10}{'cython s':>10}{'speedup':>9}  agree")
    for name, fn in cases:
        tp, rp = best_of(lambda: fn("python"), args.repeat)
        tc, rc = best_of(lambda: fn("cython"), args.repeat)
        agree = np.array_equal(rp, rc) or np.allclose(rp, rc, rtol=0, atol=1e-15)
        print(f"{name:<36}{tp:>10.3f}{tc:>10.3f}{tp / tc:>8.1f}x  {agree}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
