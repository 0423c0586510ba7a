#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Run from the repository root after installing the package:

    python3 benchmarks/bench_kernels.py

Both backends are imported directly, so the comparison works regardless of
which one the package selected at import time.
"""

import argparse
import timeit

import numpy as np

from lcdpf._kernels import _py
from lcdpf.polybasis import enumerate_exponents

try:
    from lcdpf._kernels import _core
except ImportError:
    _core = None


def bench(label, func, repeat=5, number=20):
    best = min(timeit.repeat(func, repeat=repeat, number=number)) / number
    print(f"  {label:<14} {best * 1e6:10.1f} us/call")
    return best


def bench_design_matrix(n_points, degree, rng):
    exponents = enumerate_exponents(2, degree)
    pts = rng.normal(size=(n_points, 2))
    print(f"design_matrix: {n_points} points, degree {degree} "
          f"({exponents.shape[0]} monomials)")
    py_t = bench("pure numpy", lambda: _py.design_matrix(pts, exponents))
    if _core is not None:
        cy_t = bench("compiled", lambda: _core.design_matrix(pts, exponents))
        assert np.allclose(
            _core.design_matrix(pts, exponents), _py.design_matrix(pts, exponents)
        )
        print(f"  speedup        {py_t / cy_t:10.2f}x")
    print()


def bench_resample(n_particles, rng):
    w = rng.random(n_particles)
    w /= w.sum()
    offset = rng.random()
    print(f"systematic_resample_indices: {n_particles} particles")
    py_t = bench("pure numpy", lambda: _py.systematic_resample_indices(w, offset))
    if _core is not None:
        cy_t = bench("compiled", lambda: _core.systematic_resample_indices(w, offset))
        assert np.array_equal(
            _core.systematic_resample_indices(w, offset),
            _py.systematic_resample_indices(w, offset),
        )
        print(f"  speedup        {py_t / cy_t:10.2f}x")
    print()


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)
    if _core is None:
        print("compiled extension not built; benchmarking the fallback only\n")
    for n_points, degree in ((200, 6), (200, 2), (2000, 6)):
        bench_design_matrix(n_points, degree, rng)
    for n_particles in (200, 2000, 20000):
        bench_resample(n_particles, rng)


if __name__ == "__main__":
    main()
