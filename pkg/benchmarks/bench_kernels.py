"""Numba vs NumPy timings for the hot kernels.

Runs both implementations of every kernel in ``nonlocal_optics.kernels`` on
realistic sizes, checks that they agree, and prints a table.  The numba
timings exclude the first (compiling) call.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--n 1024]
"""

import argparse
import time

import numpy as np

from nonlocal_optics import kernels
from nonlocal_optics._accel import NUMBA_AVAILABLE


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(n, rng):
    paths = rng.normal(size=(4, n, n)) + 1j * rng.normal(size=(4, n, n))
    mask = np.ones(n, dtype=np.bool_)
    w = rng.uniform(size=(n, n))
    f = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    nodes, weights = np.polynomial.legendre.leggauss(8)
    return {
        "band_gram": (paths, 3, 9, mask),
        "diagonal_sums": (w,),
        "antidiagonal_sums": (w,),
        "exchange_overlap": (f,),
        "triangle_quad": (1e6, 3.0, 1e-4, 10.0, 64, nodes, weights),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1024, help="grid size per axis")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if not NUMBA_AVAILABLE:
        print("numba is not installed; only the numpy kernels exist")

    rng = np.random.default_rng(0)
    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<20}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}  agree")
    for name, fargs in cases(args.n, rng).items():
        nb, npy = kernels.KERNELS[name]
        t_np, out_np = best_of(npy, fargs, args.repeat)
        if NUMBA_AVAILABLE:
            nb(*fargs)  # compile
            t_nb, out_nb = best_of(nb, fargs, args.repeat)
            agree = np.allclose(out_nb, out_np, rtol=1e-10, atol=1e-9)
            print(f"{name:<20}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>10.1f}  {agree}")
        else:
            print(f"{name:<20}{t_np * 1e3:>12.2f}{'-':>12}{'-':>10}  -")


if __name__ == "__main__":
    main()
