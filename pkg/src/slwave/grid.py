"""Uniform grids on (0,1), sampled functions and trapezoid L2 pairing.

Everything downstream (eigensolver, mollifiers, wave solvers) works with
real samples at the interior nodes x_j = j*h, j = 1..n, h = 1/(n+1).
Boundary values are implicitly zero (Dirichlet), so the composite trapezoid
rule collapses to h * sum over interior nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import GridMismatchError

__all__ = [
    "Grid",
    "GridFunction",
    "make_grid",
    "sample_function",
    "zeros",
    "constant",
    "inner_product",
    "l2_norm",
]


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform mesh of interior nodes on (0,1)."""

    n_interior: int
    h: float
    nodes: np.ndarray

    def compatible(self, other: "Grid") -> bool:
        return self.n_interior == other.n_interior


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real samples at the interior nodes of a grid (boundary values are 0)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_interior,):
            raise ValueError(
                f"values has shape {v.shape}, expected ({self.grid.n_interior},)"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function contains non-finite values")
        object.__setattr__(self, "values", v)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


def make_grid(n_interior: int) -> Grid:
    """Uniform grid with n_interior nodes; requires n_interior >= 2."""
    if int(n_interior) != n_interior or n_interior < 2:
        raise ValueError(f"n_interior must be an integer >= 2, got {n_interior}")
    n = int(n_interior)
    h = 1.0 / (n + 1)
    nodes = h * np.arange(1, n + 1, dtype=float)
    return Grid(n, h, nodes)


def sample_function(fn, grid: Grid) -> GridFunction:
    """Sample a vectorized callable f(x) at the interior nodes."""
    return GridFunction(grid, np.asarray(fn(grid.nodes), dtype=float))


def zeros(grid: Grid) -> GridFunction:
    return GridFunction(grid, np.zeros(grid.n_interior))


def constant(value: float, grid: Grid) -> GridFunction:
    return GridFunction(grid, np.full(grid.n_interior, float(value)))


def _check_same_grid(f: GridFunction, g: GridFunction):
    if f.grid is not g.grid and not f.grid.compatible(g.grid):
        raise GridMismatchError(
            f"grids differ: {f.grid.n_interior} vs {g.grid.n_interior} interior nodes"
        )


def inner_product(f: GridFunction, g: GridFunction) -> float:
    """Trapezoid approximation of the L2 pairing on (0,1).

    With zero boundary values the composite trapezoid rule reduces to
    h * sum(f_j g_j); this is exactly the discrete pairing under which the
    finite-difference operator in :mod:`slwave.spectral` is symmetric.
    """
    _check_same_grid(f, g)
    return float(f.grid.h * np.dot(f.values, g.values))


def l2_norm(f: GridFunction) -> float:
    """sqrt of inner_product(f, f)."""
    return float(np.sqrt(f.grid.h) * np.linalg.norm(f.values))
