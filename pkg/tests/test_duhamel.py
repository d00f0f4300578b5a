import numpy as np
import pytest

import slwave as sw
from slwave.fitting import refinement_orders
from tests.conftest import coeffs


def test_zero_forcing_equals_homogeneous(basis511):
    g = basis511.grid
    prob = sw.WaveProblem(1.0, basis511, sw.zeros(g), sw.constant(1.0, g),
                          coeffs(basis511, 1.0), coeffs(basis511, 0.0, 0.2), 1.0, 0.01)
    hom = sw.solve_galerkin(prob)
    F = np.zeros((len(hom.times), basis511.M))
    duh = sw.solve_duhamel(prob, F)
    np.testing.assert_array_equal(duh.U, hom.U)
    np.testing.assert_array_equal(duh.V, hom.V)


def test_constant_single_mode_forcing_closed_form(basis511):
    g = basis511.grid
    amp = 2.0
    lam = basis511.lambdas[0]
    errs = []
    for lev in range(3):
        dt = 0.02 / 2**lev
        prob = sw.WaveProblem(1.0, basis511, sw.zeros(g), sw.zeros(g),
                              coeffs(basis511), coeffs(basis511), 1.0, dt)
        nt = int(round(1.0 / dt)) + 1
        F = np.zeros((nt, basis511.M))
        F[:, 0] = amp
        duh = sw.solve_duhamel(prob, F)
        exact = amp / lam * (1.0 - np.cos(np.sqrt(lam) * duh.times))
        errs.append(np.abs(duh.U[:, 0] - exact).max())
    assert min(refinement_orders(errs)) >= 1.9


def test_reconstruction_of_coupled_solve(basis511):
    g = basis511.grid
    a = sw.sample_function(lambda x: 1.0 + x**2, g)
    b = sw.constant(0.5, g)
    u0 = coeffs(basis511, 1.0, 0.5, 0.25)
    u1 = coeffs(basis511, 0.0, 0.3)
    dt = 0.01
    coupled = sw.solve_galerkin(sw.WaveProblem(1.0, basis511, a, b, u0, u1, 1.0, dt))
    A = sw.assemble_coupling(a, basis511)
    B = sw.assemble_coupling(b, basis511)
    F = -(coupled.U @ A.T + coupled.V @ B.T)
    free = sw.WaveProblem(1.0, basis511, sw.zeros(g), sw.zeros(g), u0, u1, 1.0, dt)
    duh = sw.solve_duhamel(free, F)
    scale = (np.linalg.norm(coupled.U, axis=1) + np.linalg.norm(coupled.V, axis=1)).max()
    assert np.abs(duh.U - coupled.U).max() <= 5 * dt**2 * scale


def test_forcing_shape_validation(basis511):
    g = basis511.grid
    prob = sw.WaveProblem(1.0, basis511, sw.zeros(g), sw.zeros(g),
                          coeffs(basis511, 1.0), coeffs(basis511), 1.0, 0.01)
    with pytest.raises(ValueError):
        sw.solve_duhamel(prob, np.zeros((7, basis511.M)))
