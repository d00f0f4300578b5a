import os
import subprocess
import sys

import numpy as np
import pytest

from slwave import _kernels


@pytest.fixture()
def propagator(rng):
    m = 6
    lam = (np.pi * np.arange(1, m + 1)) ** 2
    J = np.zeros((2 * m, 2 * m))
    J[:m, m:] = np.eye(m)
    J[m:, :m] = -np.diag(lam)
    dt = 0.01
    S = np.eye(2 * m) - 0.5 * dt * J
    P = np.linalg.solve(S, np.eye(2 * m) + 0.5 * dt * J)
    return P, dt


def test_backend_name():
    assert _kernels.backend() in ("numba", "numpy")


def test_propagate_backends_agree(propagator, rng):
    P, _ = propagator
    y0 = rng.standard_normal(P.shape[0])
    out_np = _kernels.propagate_numpy(P, y0, 50)
    np.testing.assert_array_equal(out_np[0], y0)
    if _kernels.propagate_numba is not None:
        out_nb = _kernels.propagate_numba(P, y0, 50)
        np.testing.assert_allclose(out_nb, out_np, rtol=1e-12, atol=1e-14)


def test_duhamel_backends_agree(propagator, rng):
    P, dt = propagator
    n = 40
    Z = np.zeros((n + 1, P.shape[0]))
    Z[:, P.shape[0] // 2:] = rng.standard_normal((n + 1, P.shape[0] // 2))
    out_np = _kernels.duhamel_numpy(P, Z, dt)
    if _kernels.duhamel_numba is not None:
        out_nb = _kernels.duhamel_numba(P, Z, dt)
        np.testing.assert_allclose(out_nb, out_np, rtol=1e-12, atol=1e-13)


def test_duhamel_matches_direct_superposition(propagator, rng):
    # independent oracle: sum_i w(i,k) P^(k-i) z_i with explicit matrix powers
    P, dt = propagator
    d = P.shape[0]
    n = 6
    Z = rng.standard_normal((n + 1, d))
    powers = [np.eye(d)]
    for _ in range(n):
        powers.append(P @ powers[-1])
    expected = np.zeros((n + 1, d))
    for k in range(1, n + 1):
        for i in range(k + 1):
            w = 0.5 * dt if i in (0, k) else dt
            expected[k] += w * (powers[k - i] @ Z[i])
    out = _kernels.duhamel_numpy(P, Z, dt)
    np.testing.assert_allclose(out, expected, rtol=1e-12, atol=1e-14)
    out_active = _kernels.duhamel_superpose(P, Z, dt)
    np.testing.assert_allclose(out_active, expected, rtol=1e-12, atol=1e-13)


def test_env_flag_forces_numpy_backend():
    env = dict(os.environ, SLWAVE_DISABLE_NUMBA="1")
    code = "import slwave._kernels as k; print(k.backend())"
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
