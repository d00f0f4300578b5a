import numpy as np
import pytest

import slwave as sw


@pytest.fixture(scope="session")
def grid511():
    return sw.make_grid(511)


@pytest.fixture(scope="session")
def basis511(grid511):
    """Zero-potential basis shared by the solver tests."""
    return sw.build_basis(sw.zeros(grid511), 16)


@pytest.fixture(scope="session")
def grid2047():
    return sw.make_grid(2047)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def coeffs(basis, *entries):
    """Coefficient vector with the given leading entries, rest zero."""
    c = np.zeros(basis.M)
    c[: len(entries)] = entries
    return sw.SpectralCoeffs(basis, c)
