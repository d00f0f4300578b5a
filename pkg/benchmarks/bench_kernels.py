"""Benchmark the numba kernels against their pure-numpy fallbacks.

Usage: python benchmarks/bench_kernels.py

Times the two hot loops (trapezoid propagation and Duhamel superposition)
on representative desk-scale sizes.  The numba column is skipped when numba
is unavailable or disabled via SLWAVE_DISABLE_NUMBA=1.
"""

import time

import numpy as np

from slwave import _kernels


def _timeit(fn, *args, repeats=5):
    fn(*args)  # warmup (and JIT compile for the numba flavor)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _propagator(dim, dt=1e-2):
    rng = np.random.default_rng(0)
    m = dim // 2
    lam = (np.pi * np.arange(1, m + 1)) ** 2
    J = np.zeros((dim, dim))
    J[:m, m:] = np.eye(m)
    J[m:, :m] = -np.diag(lam)
    A = rng.standard_normal((m, m))
    J[m:, :m] -= 0.1 * (A @ A.T)
    S = np.eye(dim) - 0.5 * dt * J
    return np.linalg.solve(S, np.eye(dim) + 0.5 * dt * J)


def main():
    print(f"active backend: {_kernels.backend()}")
    header = f"{'kernel':<22}{'size':<22}{'numpy (s)':<14}{'numba (s)':<14}{'speedup':<8}"
    print(header)
    print("-" * len(header))

    for m, n_steps in ((32, 2000), (128, 2000)):
        P = _propagator(2 * m)
        y0 = np.ones(2 * m)
        t_np = _timeit(_kernels.propagate_numpy, P, y0, n_steps)
        if _kernels.propagate_numba is not None:
            t_nb = _timeit(_kernels.propagate_numba, P, y0, n_steps)
            ratio = f"{t_np / t_nb:.2f}x"
        else:
            t_nb, ratio = float("nan"), "n/a"
        print(f"{'propagate':<22}{f'M={m}, steps={n_steps}':<22}"
              f"{t_np:<14.4f}{t_nb:<14.4f}{ratio:<8}")

    for m, n_steps in ((16, 400), (64, 400)):
        P = _propagator(2 * m)
        rng = np.random.default_rng(1)
        Z = np.zeros((n_steps + 1, 2 * m))
        Z[:, m:] = rng.standard_normal((n_steps + 1, m))
        t_np = _timeit(_kernels.duhamel_numpy, P, Z, 1e-2, repeats=3)
        if _kernels.duhamel_numba is not None:
            t_nb = _timeit(_kernels.duhamel_numba, P, Z, 1e-2, repeats=3)
            ratio = f"{t_np / t_nb:.2f}x"
        else:
            t_nb, ratio = float("nan"), "n/a"
        print(f"{'duhamel_superpose':<22}{f'M={m}, steps={n_steps}':<22}"
              f"{t_np:<14.4f}{t_nb:<14.4f}{ratio:<8}")


if __name__ == "__main__":
    main()
