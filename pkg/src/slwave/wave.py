"""Solvers for the eps-fixed damped wave equation in spectral coordinates.

The Galerkin truncation of

    u_tt + L^s u + a(x) u + b(x) u_t = 0,   u(t,0) = u(t,1) = 0,

onto the first M eigenfunctions of L gives the linear system

    (u, v)' = (v, -Lam^s u - A u - B v),

with Lam = diag(lambda_n) and A, B the Galerkin matrices of a and b.  Time
stepping uses the implicit trapezoid rule: the step matrix is factored once
and the whole trace is one repeated multiplication by the resulting
propagator (a Cayley transform, so for b = 0 the energy quadratic form is
conserved to roundoff, and for b >= 0 it is non-increasing step by step).

solve_free_series evaluates the a = b = 0 solution mode by mode in closed
form (exact in time); solve_duhamel builds the forced solution as the
homogeneous trace plus a trapezoid superposition of impulse responses.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from . import _kernels
from .exceptions import (
    BasisMismatchError,
    GridMismatchError,
    NegativeSpectrumError,
    NonFiniteError,
    NonZeroCouplingError,
)
from .grid import GridFunction
from .mollify import second_difference
from .spectral import (
    SpectralBasis,
    SpectralCoeffs,
    lambda_powers,
    sobolev_norm,
    synthesize,
)

__all__ = [
    "WaveProblem",
    "WaveSolution",
    "EnergyTrace",
    "EstimateReport",
    "default_dt",
    "n_time_steps",
    "solve_free_series",
    "assemble_coupling",
    "solve_galerkin",
    "solve_duhamel",
    "energy_trace",
    "check_estimates",
    "write_solution_csv",
    "write_energy_csv",
]


@dataclass(eq=False)
class WaveProblem:
    """Full problem description: order s, basis (with its q), coupling, data, time grid."""

    s: float
    basis: SpectralBasis
    a: GridFunction
    b: GridFunction
    u0: SpectralCoeffs
    u1: SpectralCoeffs
    T: float
    dt: float

    def __post_init__(self):
        if self.s < 0:
            raise ValueError(f"s must be >= 0, got {self.s}")
        for name, gf in (("a", self.a), ("b", self.b)):
            if not gf.grid.compatible(self.basis.grid):
                raise GridMismatchError(f"coefficient {name} lives on a different grid")
            if gf.values.min() < 0.0:
                raise ValueError(f"coefficient {name} must be nonnegative")
        for name, sc in (("u0", self.u0), ("u1", self.u1)):
            if sc.basis is not self.basis:
                raise BasisMismatchError(f"initial data {name} uses a different basis")
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if self.T < self.dt:
            raise ValueError("T must be at least dt")


@dataclass(eq=False)
class WaveSolution:
    """Time-sampled spectral solution; U and V hold rows (u(t_k), u_t(t_k))."""

    problem: WaveProblem
    times: np.ndarray
    U: np.ndarray
    V: np.ndarray

    def u_coeffs(self, k: int) -> SpectralCoeffs:
        return SpectralCoeffs(self.problem.basis, self.U[k].copy())

    def v_coeffs(self, k: int) -> SpectralCoeffs:
        return SpectralCoeffs(self.problem.basis, self.V[k].copy())

    def grid_values(self) -> np.ndarray:
        """Solution sampled on the grid, one row per time."""
        return self.U @ self.problem.basis.phi_matrix.T


@dataclass(eq=False)
class EnergyTrace:
    """E(t) = ||u_t||^2 + ||L^{s/2}u||^2 + ||a^{1/2}u||^2 and its three components."""

    times: np.ndarray
    E: np.ndarray
    kinetic: np.ndarray
    stiffness: np.ndarray
    potential_a: np.ndarray


def default_dt(basis: SpectralBasis, s: float, T: float) -> float:
    """dt resolving the fastest retained mode: min(0.5/sqrt(lambda_M^s), T/200)."""
    lam_top = float(lambda_powers(basis, s)[-1])
    if lam_top > 0.0:
        return min(0.5 / np.sqrt(lam_top), T / 200.0)
    return T / 200.0


def n_time_steps(T: float, dt: float) -> int:
    """Number of steps of size dt fitting in [0, T] (tolerant of T/dt roundoff)."""
    ratio = T / dt
    n = int(np.floor(ratio + 1e-9))
    return max(n, 1)


def _omegas(problem: WaveProblem) -> np.ndarray:
    lam_s = lambda_powers(problem.basis, problem.s)
    if np.any(lam_s <= 0.0):
        raise NegativeSpectrumError(
            "free series solution needs lambda_n^s > 0 for every retained mode"
        )
    return np.sqrt(lam_s)


def solve_free_series(problem: WaveProblem) -> WaveSolution:
    """Mode-by-mode closed form for a = b = 0 (no time-stepping error).

    u_n(t) = A_n cos(w_n t) + (B_n / w_n) sin(w_n t) with w_n = sqrt(lambda_n^s).
    """
    if problem.a.sup_norm() != 0.0 or problem.b.sup_norm() != 0.0:
        raise NonZeroCouplingError("series solution requires a == b == 0")
    w = _omegas(problem)
    n = n_time_steps(problem.T, problem.dt)
    t = problem.dt * np.arange(n + 1)
    phase = np.outer(t, w)
    cos, sin = np.cos(phase), np.sin(phase)
    A, B = problem.u0.c, problem.u1.c
    U = cos * A + sin * (B / w)
    V = -sin * (A * w) + cos * B
    return WaveSolution(problem, t, U, V)


def assemble_coupling(a: GridFunction, basis: SpectralBasis) -> np.ndarray:
    """Galerkin matrix A_mn = <a phi_n, phi_m>; symmetric, PSD for a >= 0."""
    if not a.grid.compatible(basis.grid):
        raise GridMismatchError("coefficient and basis live on different grids")
    phi = basis.phi_matrix
    C = phi.T @ (a.grid.h * a.values[:, None] * phi)
    return 0.5 * (C + C.T)


def _propagator(problem: WaveProblem) -> np.ndarray:
    """One-step matrix of the implicit trapezoid rule, factored once.

    P = (I - dt/2 J)^{-1} (I + dt/2 J); the left factor is nonsingular for
    dt > 0 whenever Lam^s + A is PSD and B is PSD, which is checked rather
    than assumed.
    """
    M = problem.basis.M
    lam_s = lambda_powers(problem.basis, problem.s)
    K = np.diag(lam_s) + assemble_coupling(problem.a, problem.basis)
    B = assemble_coupling(problem.b, problem.basis)
    J = np.zeros((2 * M, 2 * M))
    J[:M, M:] = np.eye(M)
    J[M:, :M] = -K
    J[M:, M:] = -B
    c = 0.5 * problem.dt
    S = np.eye(2 * M) - c * J
    lu, piv = lu_factor(S)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= 1e-14 * max(pivots.max(), 1.0):
        raise NonFiniteError("trapezoid step matrix is numerically singular")
    return lu_solve((lu, piv), np.eye(2 * M) + c * J)


def _propagate_trace(problem: WaveProblem, P: np.ndarray):
    n = n_time_steps(problem.T, problem.dt)
    y0 = np.concatenate([problem.u0.c, problem.u1.c])
    Y = _kernels.propagate(P, y0, n)
    if not np.all(np.isfinite(Y)):
        raise NonFiniteError("state left the finite range during time stepping")
    t = problem.dt * np.arange(n + 1)
    M = problem.basis.M
    return t, Y[:, :M], Y[:, M:]


def solve_galerkin(problem: WaveProblem) -> WaveSolution:
    """Implicit-trapezoid integration of the coupled Galerkin system.

    Global error is O(dt^2); with b = 0 the energy functional is conserved
    up to roundoff (the propagator is a Cayley transform of a matrix that is
    skew in the energy inner product).
    """
    P = _propagator(problem)
    t, U, V = _propagate_trace(problem, P)
    return WaveSolution(problem, t, U, V)


def solve_duhamel(problem: WaveProblem, forcing: np.ndarray) -> WaveSolution:
    """Forced solution via the superposition of impulse responses.

    forcing holds spectral coefficients of f(t_k, .) row by row on the
    solver time grid, shape (n_steps+1, M).  The homogeneous trace is
    computed first; for each quadrature origin tau_i an auxiliary solve is
    started from (0, f(tau_i)) and the integral over tau is the composite
    trapezoid rule on the same grid.  All auxiliary solves reuse the factored
    step matrix.
    """
    P = _propagator(problem)
    t, U, V = _propagate_trace(problem, P)
    n = len(t) - 1
    M = problem.basis.M
    F = np.asarray(forcing, dtype=float)
    if F.shape != (n + 1, M):
        raise ValueError(f"forcing has shape {F.shape}, expected {(n + 1, M)}")
    Z = np.concatenate([np.zeros_like(F), F], axis=1)
    D = _kernels.duhamel_superpose(P, Z, problem.dt)
    if not np.all(np.isfinite(D)):
        raise NonFiniteError("Duhamel superposition left the finite range")
    return WaveSolution(problem, t, U + D[:, :M], V + D[:, M:])


def energy_trace(sol: WaveSolution) -> EnergyTrace:
    """Energy functional along the solution, split into its three parts."""
    problem = sol.problem
    lam_s = lambda_powers(problem.basis, problem.s)
    A = assemble_coupling(problem.a, problem.basis)
    kinetic = np.sum(sol.V**2, axis=1)
    stiffness = np.sum(lam_s * sol.U**2, axis=1)
    potential_a = np.einsum("ki,ij,kj->k", sol.U, A, sol.U)
    E = kinetic + stiffness + potential_a
    return EnergyTrace(sol.times, E, kinetic, stiffness, potential_a)


@dataclass
class EstimateReport:
    """Max-over-time left-hand sides against a data-and-coefficient right-hand side.

    The hidden constants of the estimates are unknown, so the meaningful
    output is the ratio (bounded across problem families, not pinned to a
    specific value).
    """

    variant: str
    lhs_max: dict
    rhs: dict
    ratio: dict
    max_ratio: float

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "variant": self.variant,
            "lhs_max": {k: float(v) for k, v in self.lhs_max.items()},
            "rhs": {k: float(v) for k, v in self.rhs.items()},
            "ratio": {k: float(v) for k, v in self.ratio.items()},
            "max_ratio": float(self.max_ratio),
        }


def _norm_traces(sol: WaveSolution):
    lam_s = lambda_powers(sol.problem.basis, sol.problem.s)
    nu = np.linalg.norm(sol.U, axis=1)
    nus = np.sqrt(np.sum(lam_s * sol.U**2, axis=1))
    nut = np.linalg.norm(sol.V, axis=1)
    return nu, nus, nut


def check_estimates(sol: WaveSolution, variant: str) -> EstimateReport:
    """Ratio report for one of the three estimate families.

    variant:
      * "free":       the a = b = 0 estimates with data norms
                      (||u0||, ||u1||_{W^{-s}}) etc.;
      * "general_s":  (1 + ||a||_inf + ||b||_inf) (||u0||_{W^s} + ||u1||);
      * "s_equals_1": (1+||q||)(1+||a||)(1+||b||)(||u0|| + ||u0''|| + ||u1||),
                      with u0'' by second central differences of the
                      synthesized u0 (O(h^2)).
    """
    problem = sol.problem
    nu, nus, nut = _norm_traces(sol)
    lhs = {"u_l2": float(nu.max()), "u_ws": float(nus.max()), "ut_l2": float(nut.max())}
    u0, u1 = problem.u0, problem.u1

    if variant == "free":
        if problem.a.sup_norm() != 0.0 or problem.b.sup_norm() != 0.0:
            raise NonZeroCouplingError("the free estimates require a == b == 0")
        rhs = {
            "u_l2": sobolev_norm(u0, 0.0) + sobolev_norm(u1, -problem.s),
            "u_ws": sobolev_norm(u0, problem.s) + sobolev_norm(u1, 0.0),
            "ut_l2": sobolev_norm(u0, problem.s) + sobolev_norm(u1, 0.0),
        }
    elif variant == "general_s":
        data = sobolev_norm(u0, problem.s) + sobolev_norm(u1, 0.0)
        shared = (1.0 + problem.a.sup_norm() + problem.b.sup_norm()) * data
        rhs = {k: shared for k in lhs}
    elif variant == "s_equals_1":
        if problem.s != 1.0:
            raise ValueError("the s_equals_1 variant requires s == 1")
        u0_grid = synthesize(u0)
        d2 = second_difference(u0_grid)
        from .grid import l2_norm as _l2

        data = sobolev_norm(u0, 0.0) + _l2(d2) + sobolev_norm(u1, 0.0)
        q_sup = problem.basis.q_used.sup_norm()
        shared = (
            (1.0 + q_sup)
            * (1.0 + problem.a.sup_norm())
            * (1.0 + problem.b.sup_norm())
            * data
        )
        rhs = {k: shared for k in lhs}
    else:
        raise ValueError(f"unknown estimate variant {variant!r}")

    ratio = {k: (lhs[k] / rhs[k] if rhs[k] > 0 else 0.0) for k in lhs}
    return EstimateReport(variant, lhs, rhs, ratio, max(ratio.values()))


def write_solution_csv(sol: WaveSolution, path):
    """t, then M coefficient columns, then M velocity columns."""
    M = sol.problem.basis.M
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"u_{n}" for n in range(1, M + 1)]
                   + [f"v_{n}" for n in range(1, M + 1)])
        for k in range(len(sol.times)):
            row = [repr(float(sol.times[k]))]
            row += [repr(float(x)) for x in sol.U[k]]
            row += [repr(float(x)) for x in sol.V[k]]
            w.writerow(row)


def write_energy_csv(trace: EnergyTrace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "E", "E_kinetic", "E_potential_Ls", "E_potential_a"])
        for k in range(len(trace.times)):
            w.writerow([
                repr(float(trace.times[k])),
                repr(float(trace.E[k])),
                repr(float(trace.kinetic[k])),
                repr(float(trace.stiffness[k])),
                repr(float(trace.potential_a[k])),
            ])
