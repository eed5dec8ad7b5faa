#!/usr/bin/env python3
"""Timing comparison of the numba kernels against the pure-numpy fallback.

Run from the repo root:  python3 benchmarks/bench_kernels.py
Select sizes with --quick for a fast pass. The numpy fallback is what you
get at import time with MAGPSIDO_NUMBA=0; here both paths are toggled
in-process so the same buffers are reused.
"""
import argparse
import time

import numpy as np

from magpsido import _kernels
from magpsido.gauge import constant_field_2d, transversal_gauge, zero_field
from magpsido.quantize import Grid, op_amplitude, op_weyl
from magpsido.symbols import symbol_from_id


def timeit(fn, repeats=3):
    fn()  # warm-up (includes jit compile on the numba path)
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_gather_1d(n):
    rng = np.random.default_rng(0)
    T = rng.standard_normal((2 * n - 1, n)) + 1j * rng.standard_normal((2 * n - 1, n))
    omega = np.exp(1j * rng.standard_normal((n, n)))
    return lambda: _kernels.weyl_gather(T, omega, n, 1)


def bench_gather_2d(n):
    rng = np.random.default_rng(1)
    T = (rng.standard_normal((2 * n - 1, 2 * n - 1, n, n))
         + 1j * rng.standard_normal((2 * n - 1, 2 * n - 1, n, n)))
    omega = np.exp(1j * rng.standard_normal((n * n, n * n)))
    return lambda: _kernels.weyl_gather(T, omega, n, 2)


def bench_linear_phase(n):
    rng = np.random.default_rng(2)
    ax = np.linspace(-5, 5, n)
    X1, X2 = np.meshgrid(ax, ax, indexing="ij")
    nodes = np.stack([X1.ravel(), X2.ravel()], axis=-1)
    W = rng.standard_normal((2, 2))
    c = rng.standard_normal(2)
    return lambda: _kernels.linear_pair_exponent(nodes, W, c)


def bench_amplitude_rows(n):
    rng = np.random.default_rng(3)
    M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))

    def run():
        for j in range(0, n, max(1, n // 16)):
            _kernels.amplitude_row(M, (j,), n, 1)

    return run


def bench_full_assembly_2d(n):
    grid = Grid(2, 5.0, n)
    g = transversal_gauge(constant_field_2d(1.0))
    sym = symbol_from_id("relativistic", 2)
    return lambda: op_weyl(sym, g, grid)


def bench_full_amplitude_1d(n):
    grid = Grid(1, 15.0, n)
    g = transversal_gauge(zero_field(1))
    sym = symbol_from_id("relativistic", 1)

    def amp(x, y, e):
        return sym.eval(0.5 * (np.asarray(x, dtype=float)
                               + np.asarray(y, dtype=float)), e)

    return lambda: op_amplitude(amp, g, grid)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller sizes")
    args = parser.parse_args()

    if args.quick:
        cases = [
            ("weyl gather d=1, n=256", bench_gather_1d(256)),
            ("weyl gather d=2, n=16", bench_gather_2d(16)),
            ("linear phase table, n=24^2", bench_linear_phase(24)),
            ("amplitude rows d=1, n=256", bench_amplitude_rows(256)),
        ]
    else:
        cases = [
            ("weyl gather d=1, n=512", bench_gather_1d(512)),
            ("weyl gather d=2, n=24", bench_gather_2d(24)),
            ("linear phase table, n=32^2", bench_linear_phase(32)),
            ("amplitude rows d=1, n=512", bench_amplitude_rows(512)),
            ("full operator d=2, n=16", bench_full_assembly_2d(16)),
            ("full amplitude op d=1, n=96", bench_full_amplitude_1d(96)),
        ]

    if not _kernels._HAVE_NUMBA:
        print("numba not importable; benchmarking the numpy path only")

    print(f"{'kernel':<34} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, fn in cases:
        _kernels.set_backend("numpy")
        t_np = timeit(fn)
        if _kernels._HAVE_NUMBA:
            _kernels.set_backend("numba")
            t_nb = timeit(fn)
            print(f"{name:<34} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms "
                  f"{t_np / t_nb:>7.2f}x")
        else:
            print(f"{name:<34} {t_np * 1e3:>8.2f}ms {'-':>10} {'-':>8}")
    _kernels.set_backend("numba" if _kernels._HAVE_NUMBA else "numpy")


if __name__ == "__main__":
    main()
