import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import slwave as sw
from slwave.exceptions import GridMismatchError
from slwave.fitting import fit_loglog


def test_make_grid_nodes():
    g = sw.make_grid(3)
    assert g.h == 0.25
    np.testing.assert_allclose(g.nodes, [0.25, 0.5, 0.75])


def test_make_grid_rejects_too_small():
    with pytest.raises(ValueError):
        sw.make_grid(1)


def test_make_grid_fine_spacing():
    g = sw.make_grid(4095)
    assert g.h == 1.0 / 4096
    assert np.all(np.diff(g.nodes) > 0)
    assert g.nodes[0] > 0 and g.nodes[-1] < 1
    assert abs(g.h * (g.n_interior + 1) - 1.0) < 1e-15


def test_grid_function_validates_length_and_finiteness():
    g = sw.make_grid(4)
    with pytest.raises(ValueError):
        sw.GridFunction(g, np.zeros(3))
    with pytest.raises(ValueError):
        sw.GridFunction(g, np.array([0.0, np.nan, 0.0, 0.0]))


def test_inner_product_normalized_sine():
    g = sw.make_grid(1023)
    f = sw.sample_function(lambda x: np.sqrt(2) * np.sin(np.pi * x), g)
    assert abs(sw.inner_product(f, f) - 1.0) < 1e-5


def test_inner_product_mode_orthogonality():
    g = sw.make_grid(1023)
    f = sw.sample_function(lambda x: np.sin(np.pi * x), g)
    h = sw.sample_function(lambda x: np.sin(2 * np.pi * x), g)
    assert abs(sw.inner_product(f, h)) < 1e-6


def test_inner_product_zero_function():
    g = sw.make_grid(64)
    f = sw.zeros(g)
    h = sw.sample_function(lambda x: np.exp(x), g)
    assert sw.inner_product(f, h) == 0.0


def test_inner_product_grid_mismatch():
    f = sw.zeros(sw.make_grid(8))
    h = sw.zeros(sw.make_grid(16))
    with pytest.raises(GridMismatchError):
        sw.inner_product(f, h)


def test_l2_norm_examples():
    g = sw.make_grid(1023)
    f = sw.sample_function(lambda x: np.sqrt(2) * np.sin(np.pi * x), g)
    assert abs(sw.l2_norm(f) - 1.0) < 1e-5
    assert sw.l2_norm(sw.zeros(g)) == 0.0
    one = sw.constant(1.0, g)
    # the implicit zero endpoints under-integrate the constant by O(h)
    assert abs(sw.l2_norm(one) - 1.0) < 2 * g.h


_vals = st.lists(
    st.floats(min_value=-1e3, max_value=1e3, allow_nan=False), min_size=8, max_size=8
)


@given(_vals, _vals)
def test_inner_product_symmetric(fv, gv):
    g = sw.make_grid(8)
    f = sw.GridFunction(g, np.array(fv))
    h = sw.GridFunction(g, np.array(gv))
    assert sw.inner_product(f, h) == pytest.approx(sw.inner_product(h, f), abs=1e-12)


@given(_vals, _vals)
def test_cauchy_schwarz(fv, gv):
    g = sw.make_grid(8)
    f = sw.GridFunction(g, np.array(fv))
    h = sw.GridFunction(g, np.array(gv))
    lhs = abs(sw.inner_product(f, h))
    rhs = sw.l2_norm(f) * sw.l2_norm(h)
    assert lhs <= rhs * (1 + 1e-12) + 1e-12


def test_l2_norm_refinement_order():
    # smooth f vanishing at both ends; exact norm from the closed-form integral
    exact = np.sqrt((np.e**2 - 1) * np.pi**2 / (4 * (1 + np.pi**2)))
    sizes = [64, 128, 256, 512]
    errs, hs = [], []
    for n in sizes:
        g = sw.make_grid(n)
        f = sw.sample_function(lambda x: np.sin(np.pi * x) * np.exp(x), g)
        errs.append(abs(sw.l2_norm(f) - exact))
        hs.append(g.h)
    slope, _, _ = fit_loglog(hs, errs)
    assert slope >= 1.9
