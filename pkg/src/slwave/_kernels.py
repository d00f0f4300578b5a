"""Hot inner loops of the time integrator, in numba and pure-numpy flavors.

The implicit trapezoid step of a linear constant-coefficient system reduces
to repeated multiplication by one dense propagator matrix; the Duhamel
superposition repeats that for every quadrature origin tau.  Both are
sequential loops that dominate runtime, so they carry @njit twins.

Set SLWAVE_DISABLE_NUMBA=1 to force the pure-numpy path (also used
automatically when numba is not importable).  ``benchmarks/bench_kernels.py``
compares the two.
"""

import os

import numpy as np

__all__ = [
    "backend",
    "propagate",
    "duhamel_superpose",
    "propagate_numpy",
    "duhamel_numpy",
    "propagate_numba",
    "duhamel_numba",
]

_DISABLED = os.environ.get("SLWAVE_DISABLE_NUMBA", "").lower() in ("1", "true", "yes")


def propagate_numpy(P, y0, n_steps):
    """Repeated y <- P y, returning the whole trace (n_steps+1, d)."""
    d = y0.shape[0]
    out = np.empty((n_steps + 1, d))
    out[0] = y0
    y = y0
    for _ in range(n_steps):
        y = P @ y
        out[_ + 1] = y
    return out


def duhamel_numpy(P, Z, dt):
    """Trapezoid-in-tau superposition of impulse responses.

    Z[i] is the auxiliary state launched at t_i (zero displacement part,
    forcing in the velocity part).  All auxiliary solves share P; they are
    advanced together as the columns of one matrix so each time step is a
    single GEMM.  Returns the accumulated integral trace (n+1, d).
    """
    n = Z.shape[0] - 1
    d = Z.shape[1]
    out = np.zeros((n + 1, d))
    if n == 0:
        return out
    act = np.empty((d, n + 1), order="F")
    act[:, 0] = Z[0]
    for k in range(1, n + 1):
        act[:, :k] = P @ act[:, :k]
        act[:, k] = Z[k]
        w = np.full(k + 1, dt)
        w[0] = 0.5 * dt
        w[k] = 0.5 * dt
        out[k] = act[:, : k + 1] @ w
    return out


def _propagate_loop(P, y0, n_steps):
    d = y0.shape[0]
    out = np.empty((n_steps + 1, d))
    out[0, :] = y0
    y = y0.copy()
    for k in range(n_steps):
        y = P @ y
        out[k + 1, :] = y
    return out


def _duhamel_loop(P, Z, dt):
    n = Z.shape[0] - 1
    d = Z.shape[1]
    out = np.zeros((n + 1, d))
    for i in range(n + 1):
        y = Z[i].copy()
        if i > 0:
            # tau_i is the right endpoint of the integral over [0, t_i]
            for c in range(d):
                out[i, c] += 0.5 * dt * y[c]
        for k in range(i + 1, n + 1):
            y = P @ y
            w = 0.5 * dt if (i == 0 or i == k) else dt
            for c in range(d):
                out[k, c] += w * y[c]
    return out


propagate_numba = None
duhamel_numba = None

if not _DISABLED:
    try:
        from numba import njit

        propagate_numba = njit(cache=True, nogil=True)(_propagate_loop)
        duhamel_numba = njit(cache=True, nogil=True)(_duhamel_loop)
    except ImportError:
        pass

if propagate_numba is not None:
    propagate = propagate_numba
    duhamel_superpose = duhamel_numba
    _BACKEND = "numba"
else:
    propagate = propagate_numpy
    duhamel_superpose = duhamel_numpy
    _BACKEND = "numpy"


def backend() -> str:
    """Name of the active kernel backend ('numba' or 'numpy')."""
    return _BACKEND
