"""Compare the compiled and pure-Python amplification kernels on a domain scan.

    python benchmarks/bench_kernels.py [--nx 81 --ny 81 --repeat 3]
"""
import argparse
import time

import numpy as np

from imexflow import _kernels_py, kernels
from imexflow.quadrature import gll_nodes, sdc_weights
from imexflow.stability import SplitMode
from imexflow.tableaux import builtin_tableau


def lattice(nx, ny):
    re = np.linspace(-5, 1, nx)
    im = np.linspace(-5, 5, ny)
    z = re[None, :] + 1j * im[:, None]
    return SplitMode.SEMI_IMPLICIT.split(z)


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nx", type=int, default=81)
    ap.add_argument("--ny", type=int, default=81)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    zi, ze = lattice(args.nx, args.ny)
    g = gll_nodes(3, 0.0, 1.0)
    w = sdc_weights(g)

    cases = []
    tab = builtin_tableau("RK-CB4")
    arrs = (tab.a_im, tab.a_ex, tab.b_im, tab.b_ex)
    cases.append(("RK-CB4", lambda m: m.rk_amplification(zi, ze, *arrs)))
    eu = builtin_tableau("IMEX-Euler")
    eu_arrs = (eu.a_im, eu.a_ex, eu.b_im, eu.b_ex)
    cases.append(("SDC-Eu(3,5)", lambda m: m.sdc_amplification(zi, ze, g.lengths, w, 5, *eu_arrs)))

    print(f"backend in use: {kernels.BACKEND}; lattice {args.nx}x{args.ny}")
    print(f"{'method':<14s} {'python [s]':>11s} {'compiled [s]':>13s} {'speedup':>8s} {'max diff':>10s}")
    for name, run in cases:
        tp, rp = best_of(lambda: run(_kernels_py), args.repeat)
        tc, rc = best_of(lambda: run(kernels), args.repeat)
        diff = np.nanmax(np.abs(rp - rc))
        print(f"{name:<14s} {tp:11.4f} {tc:13.4f} {tp / tc:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
