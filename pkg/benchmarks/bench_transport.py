"""Compare the compiled and pure-Python transportation kernels.

    python benchmarks/bench_transport.py [--sizes 8,16,32,64] [--repeat 3]

Instances are random measures with the discrete cost matrix, scaled to
integers as the oracle does. Both kernels must return the same cost.
"""

from __future__ import annotations

import argparse
import time
from fractions import Fraction
from math import lcm

from discrete_wasserstein import kernels
from discrete_wasserstein.rng import SplitMix64


def instance(size: int, seed: int):
    rng = SplitMix64(seed)
    rows = sorted(rng.sample(range(1, 4 * size), size))
    cols = sorted(rng.sample(range(1, 4 * size), size))
    a = [rng.integer(1, 64) for _ in rows]
    b = [rng.integer(1, 64) for _ in cols]
    mu = [Fraction(w, sum(a)) for w in a]
    nu = [Fraction(w, sum(b)) for w in b]
    den = lcm(*(m.denominator for m in mu + nu))
    supply = [int(m * den) for m in mu]
    demand = [int(m * den) for m in nu]
    cost = [[0 if x == y else 1 for y in cols] for x in rows]
    return supply, demand, cost


def best_time(fn, args, repeat: int) -> tuple[float, int]:
    best, value = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        value, _ = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, value


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="8,16,32,64")
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args(argv)
    if not kernels.HAVE_EXTENSION:
        print("compiled kernel not available; timing the Python fallback only")
    print(f"{'support':>8} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for size in (int(s) for s in args.sizes.split(",")):
        inst = instance(size, args.seed)
        py_t, py_v = best_time(kernels.py_transport_min_cost, inst, args.repeat)
        if kernels.HAVE_EXTENSION:
            c_t, c_v = best_time(kernels.c_transport_min_cost, inst, args.repeat)
            assert c_v == py_v, (size, c_v, py_v)
            print(f"{size:>8} {py_t:>10.4f} {c_t:>10.4f} {py_t / c_t:>7.1f}x")
        else:
            print(f"{size:>8} {py_t:>10.4f} {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
