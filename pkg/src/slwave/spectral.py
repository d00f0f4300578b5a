"""Dirichlet eigensolver for L = -d2/dx2 + q(x) on (0,1) and its fractional calculus.

The operator is discretized with second-order central differences, giving a
symmetric tridiagonal matrix whose eigenpairs are computed with LAPACK
(bisection + inverse iteration for partial spectra).  Raw eigenvalues are
then polished with one Rayleigh-quotient evaluation through the difference
quadratic form

    lambda = [ sum_j (v_{j+1}-v_j)^2 / h^2 + sum_j q_j v_j^2 ] / sum_j v_j^2,

a sum of like-signed terms for q >= 0, which restores full relative accuracy
for the small eigenvalues (the assembled matrix has norm ~ 4/h^2, so plain
LAPACK residuals of size eps_mach * ||T|| swamp lambda_1 on fine grids).

Fractional powers act diagonally on the spectral coefficients: L^s phi_n =
lambda_n^s phi_n.  Non-integer powers require a positive spectrum.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .exceptions import (
    BasisMismatchError,
    EigensolveError,
    NegativeSpectrumError,
)
from .grid import Grid, GridFunction, inner_product

__all__ = [
    "SpectralBasis",
    "SpectralCoeffs",
    "build_basis",
    "analyze",
    "synthesize",
    "apply_fractional",
    "sobolev_norm",
    "solution_norm",
    "lambda_powers",
    "fd_laplacian_eigenvalues",
    "continuum_laplacian_eigenvalues",
    "orthonormality_residuals",
    "eigen_summary",
    "write_eigen_csv",
]


@dataclass(eq=False)
class SpectralBasis:
    """First M Dirichlet eigenpairs of L, quadrature-normalized in L2.

    phi_matrix holds the eigenfunctions column-wise, shape (n_interior, M);
    phi(k) wraps column k (0-based; mode number n = k+1) as a GridFunction.
    """

    grid: Grid
    M: int
    lambdas: np.ndarray
    phi_matrix: np.ndarray
    q_used: GridFunction
    lambda1_nonpositive: bool = field(default=False)

    def phi(self, k: int) -> GridFunction:
        return GridFunction(self.grid, self.phi_matrix[:, k].copy())


@dataclass(eq=False)
class SpectralCoeffs:
    """Coefficients c_n = <f, phi_n> against a fixed basis."""

    basis: SpectralBasis
    c: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.c, dtype=float)
        if v.shape != (self.basis.M,):
            raise ValueError(f"coefficient vector has shape {v.shape}, expected ({self.basis.M},)")
        if not np.all(np.isfinite(v)):
            raise ValueError("coefficient vector contains non-finite values")
        self.c = v


def _check_same_basis(a: SpectralCoeffs, b: SpectralCoeffs):
    if a.basis is not b.basis:
        raise BasisMismatchError("coefficient vectors belong to different bases")


def build_basis(q: GridFunction, M: int) -> SpectralBasis:
    """Compute the first M Dirichlet eigenpairs of -d2/dx2 + q on q's grid.

    Parameters
    ----------
    q : GridFunction
        Real potential sampled at the interior nodes.
    M : int
        Number of modes to retain; must satisfy M <= n_interior/4 so that
        the top retained mode is still resolved by the mesh.

    Returns
    -------
    SpectralBasis with ascending eigenvalues; eigenvectors are normalized in
    the trapezoid L2 product and signed so the first interior value is
    positive.  A warning flag is set when lambda_1 <= 0.
    """
    n = q.grid.n_interior
    if int(M) != M or M < 1:
        raise ValueError(f"M must be a positive integer, got {M}")
    M = int(M)
    if M > n // 4:
        raise ValueError(
            f"resolution guard: M={M} exceeds n_interior/4={n // 4}; "
            "refine the grid or retain fewer modes"
        )
    h = q.grid.h
    diag = 2.0 / h**2 + q.values
    off = np.full(n - 1, -1.0 / h**2)
    try:
        lam_raw, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, M - 1))
    except LinAlgError as exc:
        raise EigensolveError(f"tridiagonal eigensolve failed: {exc}") from exc

    # sign convention: first interior value positive
    for k in range(M):
        col = vecs[:, k]
        j = np.flatnonzero(col)[0]
        if col[j] < 0:
            vecs[:, k] = -col

    # Rayleigh-quotient polish through the stable difference form
    padded = np.zeros((n + 2, M))
    padded[1:-1] = vecs
    dv = np.diff(padded, axis=0)
    stiff = np.sum(dv * dv, axis=0) / h**2
    pot = np.einsum("jk,j,jk->k", vecs, q.values, vecs)
    lam = (stiff + pot) / np.sum(vecs * vecs, axis=0)

    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    vecs = vecs[:, order]

    phi = vecs / np.sqrt(h)  # unit euclidean columns -> unit quadrature norm

    nonpos = bool(lam[0] <= 0.0)
    if nonpos:
        warnings.warn(
            f"lambda_1 = {lam[0]:.6g} <= 0: non-integer operator powers are unavailable",
            stacklevel=2,
        )
    return SpectralBasis(q.grid, M, lam, phi, q, lambda1_nonpositive=nonpos)


def analyze(f: GridFunction, basis: SpectralBasis) -> SpectralCoeffs:
    """Project a grid function onto the basis: c_n = <f, phi_n>."""
    if f.grid is not basis.grid and not f.grid.compatible(basis.grid):
        from .exceptions import GridMismatchError

        raise GridMismatchError("grid function and basis live on different grids")
    c = basis.grid.h * (basis.phi_matrix.T @ f.values)
    return SpectralCoeffs(basis, c)


def synthesize(c: SpectralCoeffs) -> GridFunction:
    """Evaluate sum_n c_n phi_n at the grid nodes."""
    return GridFunction(c.basis.grid, c.basis.phi_matrix @ c.c)


def lambda_powers(basis: SpectralBasis, s: float) -> np.ndarray:
    """lambda_n^s for all retained modes.

    Nonnegative integer s is a plain matrix power and works for any real
    spectrum; anything else requires lambda_1 > 0.
    """
    lam = basis.lambdas
    if s == 0:
        return np.ones_like(lam)
    if float(s).is_integer() and s > 0:
        return lam ** int(s)
    if lam[0] <= 0.0:
        raise NegativeSpectrumError(
            f"lambda_1 = {lam[0]:.6g} <= 0: lambda^s undefined for s = {s}; "
            "shift the potential or reject the problem"
        )
    return lam**float(s)


def apply_fractional(c: SpectralCoeffs, s: float) -> SpectralCoeffs:
    """Apply L^s in coefficient space: (lambda_n^s c_n)_n."""
    return SpectralCoeffs(c.basis, lambda_powers(c.basis, s) * c.c)


def sobolev_norm(c: SpectralCoeffs, s: float) -> float:
    """L-adapted Sobolev norm sqrt(sum_n lambda_n^s c_n^2)."""
    w = lambda_powers(c.basis, s)
    return float(np.sqrt(np.sum(w * c.c**2)))


def solution_norm(u: SpectralCoeffs, u_t: SpectralCoeffs, s: float) -> float:
    """||u||_{L2} + ||L^{s/2} u||_{L2} + ||u_t||_{L2}."""
    _check_same_basis(u, u_t)
    return sobolev_norm(u, 0.0) + sobolev_norm(u, s) + sobolev_norm(u_t, 0.0)


def fd_laplacian_eigenvalues(grid: Grid, M: int) -> np.ndarray:
    """Closed-form eigenvalues 4/h^2 sin^2(n pi h / 2) of the q=0 difference matrix."""
    n = np.arange(1, M + 1, dtype=float)
    h = grid.h
    return 4.0 / h**2 * np.sin(n * np.pi * h / 2.0) ** 2


def continuum_laplacian_eigenvalues(M: int) -> np.ndarray:
    """(pi n)^2 for n = 1..M."""
    n = np.arange(1, M + 1, dtype=float)
    return (np.pi * n) ** 2


def orthonormality_residuals(basis: SpectralBasis):
    """Per-mode normalization and cross-orthogonality residuals.

    Returns (|<phi_n,phi_n> - 1|, max_{m != n} |<phi_n,phi_m>|).
    """
    G = basis.grid.h * (basis.phi_matrix.T @ basis.phi_matrix)
    norm_resid = np.abs(np.diag(G) - 1.0)
    off = np.abs(G - np.diag(np.diag(G)))
    ortho_max = off.max(axis=1) if basis.M > 1 else np.zeros(1)
    return norm_resid, ortho_max


def eigen_summary(basis: SpectralBasis) -> dict:
    """Least-squares slope of lambda_n against (pi n)^2, plus bookkeeping."""
    ref = continuum_laplacian_eigenvalues(basis.M)
    if basis.M >= 2:
        coef = np.polyfit(ref, basis.lambdas, 1)
        slope, intercept = float(coef[0]), float(coef[1])
    else:
        slope, intercept = float(basis.lambdas[0] / ref[0]), 0.0
    norm_resid, ortho_max = orthonormality_residuals(basis)
    return {
        "schema_version": 1,
        "n_interior": basis.grid.n_interior,
        "modes": basis.M,
        "slope_vs_pin2": slope,
        "intercept_vs_pin2": intercept,
        "lambda_min": float(basis.lambdas[0]),
        "lambda_max": float(basis.lambdas[-1]),
        "lambda1_nonpositive": basis.lambda1_nonpositive,
        "max_normalization_residual": float(norm_resid.max()),
        "max_orthogonality_residual": float(ortho_max.max()),
    }


def write_eigen_csv(basis: SpectralBasis, path):
    """Eigen report: n, lambda_discrete, lambda_continuum_reference, residuals.

    The continuum reference column is filled only for q identically zero
    (there (pi n)^2 is known); it is left empty otherwise.
    """
    q_is_zero = not np.any(basis.q_used.values)
    ref = continuum_laplacian_eigenvalues(basis.M) if q_is_zero else None
    norm_resid, ortho_max = orthonormality_residuals(basis)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["n", "lambda_discrete", "lambda_continuum_reference",
             "normalization_residual", "orthogonality_max"]
        )
        for k in range(basis.M):
            w.writerow(
                [
                    k + 1,
                    repr(float(basis.lambdas[k])),
                    repr(float(ref[k])) if ref is not None else "",
                    repr(float(norm_resid[k])),
                    repr(float(ortho_max[k])),
                ]
            )
