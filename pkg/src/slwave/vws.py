"""Experiment harness: eps-indexed regularized solves, moderateness of the
solution net, two-regularization uniqueness runs and eps -> 0 consistency runs.

A VeryWeakProblem bundles symbolic coefficient specs, a mollifier, an eps
ladder and the discretization.  solve_net regularizes every input given as a
spec (data passed as plain coefficient vectors is used as is; that is the
oracle-friendly band-limited route), solves the classical problem for each
eps and fits the moderateness exponent of sup_t ||u_eps(t,.)||_s, juxtaposed
with the fitted exponents of the inputs and the max-rule prediction.

Two cases:
  * "general_s":  q must be smooth; one basis is built from the
                  unregularized q and shared across the net.
  * "s_equals_1": s = 1; q may be singular and the basis is rebuilt from
                  q_eps for every eps (cached per problem instance).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import RefusedResolutionError, SpecNotSmoothError
from .fitting import ConvergenceReport, fit_decay_order, fit_exponent
from .grid import Grid, GridFunction
from .mollify import (
    MIN_EPS_OVER_H,
    CoefficientSpec,
    MollifierKernel,
    build_net,
    mollify,
    sample_spec,
    second_difference,
)
from .spectral import SpectralCoeffs, analyze, build_basis, sobolev_norm, synthesize
from .wave import WaveProblem, WaveSolution, check_estimates, solve_galerkin

__all__ = [
    "VeryWeakProblem",
    "NetSolution",
    "solve_net",
    "uniqueness_experiment",
    "uniqueness_report",
    "consistency_experiment",
    "consistency_reference",
    "consistency_report",
]


@dataclass(eq=False)
class VeryWeakProblem:
    s: float
    case: str
    a_spec: CoefficientSpec
    b_spec: CoefficientSpec
    q_spec: CoefficientSpec
    u0_data: object  # CoefficientSpec or coefficient vector
    u1_data: object
    kernel: MollifierKernel
    epsilons: np.ndarray
    grid: Grid
    M: int
    T: float
    dt: float

    def __post_init__(self):
        if self.case not in ("general_s", "s_equals_1"):
            raise ValueError(f"unknown case {self.case!r}")
        if self.case == "general_s" and not self.q_spec.is_smooth:
            raise SpecNotSmoothError("case general_s requires a smooth potential q")
        if self.case == "s_equals_1" and self.s != 1.0:
            raise ValueError("case s_equals_1 fixes s = 1")
        self.epsilons = np.asarray(self.epsilons, dtype=float)

    @property
    def sobolev_order(self) -> float:
        return 1.0 if self.case == "s_equals_1" else self.s


@dataclass(eq=False)
class NetSolution:
    """Per-eps classical solutions with the fitted moderateness bookkeeping."""

    problem: VeryWeakProblem
    epsilons: np.ndarray
    solutions: list
    sup_norms: np.ndarray
    fitted_exponent: float
    fit_residual: float
    input_exponents: dict
    predicted_exponent: float
    bound_ratios: np.ndarray
    bound_trend_slope: float

    def to_report_dict(self) -> dict:
        exps = {k: float(v) for k, v in self.input_exponents.items()}
        exps["solution"] = float(self.fitted_exponent)
        exps["max_rule_prediction"] = float(self.predicted_exponent)
        return {
            "schema_version": 1,
            "context": "net",
            "case": self.problem.case,
            "table": [[float(e), float(v)] for e, v in zip(self.epsilons, self.sup_norms)],
            "fitted_order": float(self.fitted_exponent),
            "fitted_exponents": exps,
            "bound_constants": {
                "ratios": [[float(e), float(r)] for e, r in zip(self.epsilons, self.bound_ratios)],
                "fitted_C": float(self.bound_ratios.max()),
                "trend_slope": float(self.bound_trend_slope),
            },
        }


def _check_resolution(p: VeryWeakProblem):
    if p.epsilons.min() < MIN_EPS_OVER_H * p.grid.h:
        raise RefusedResolutionError(
            f"smallest eps = {p.epsilons.min():.3g} is below "
            f"{MIN_EPS_OVER_H:g}h = {MIN_EPS_OVER_H * p.grid.h:.3g}"
        )


def _bases_for(p: VeryWeakProblem, kernel: MollifierKernel):
    """One shared basis (general_s) or one basis per eps (s_equals_1)."""
    if p.case == "general_s":
        basis = build_basis(sample_spec(p.q_spec, p.grid), p.M)
        return [basis] * len(p.epsilons)
    cache = getattr(p, "_basis_cache", None)
    if cache is None:
        cache = {}
        p._basis_cache = cache
    q_net = build_net(p.q_spec, kernel, p.epsilons, p.grid)
    bases = []
    for e, q_eps in zip(p.epsilons, q_net.members):
        key = (float(e), p.grid.n_interior, p.M, kernel.offset)
        if key not in cache:
            cache[key] = build_basis(q_eps, p.M)
        bases.append(cache[key])
    return bases


def _data_coeffs(data, basis, kernel, eps, grid) -> SpectralCoeffs:
    if isinstance(data, CoefficientSpec):
        return analyze(mollify(data, kernel, eps, grid), basis)
    vec = np.asarray(data, dtype=float)
    if vec.ndim != 1 or vec.size > basis.M:
        raise ValueError(f"coefficient data must be a vector of length <= {basis.M}")
    padded = np.zeros(basis.M)
    padded[: vec.size] = vec
    return SpectralCoeffs(basis, padded)


def _sup_solution_norm(sol: WaveSolution, s: float) -> float:
    from .spectral import lambda_powers

    lam_s = lambda_powers(sol.problem.basis, s)
    per_time = (
        np.linalg.norm(sol.U, axis=1)
        + np.sqrt(np.sum(lam_s * sol.U**2, axis=1))
        + np.linalg.norm(sol.V, axis=1)
    )
    return float(per_time.max())


def _data_norm_u0(c: SpectralCoeffs, p: VeryWeakProblem) -> float:
    """Moderateness norm of u0 as the solver sees it (band-limited representative)."""
    if p.case == "s_equals_1":
        return sobolev_norm(c, 0.0) + _l2_second_diff(c)
    return sobolev_norm(c, p.s)


def _l2_second_diff(c: SpectralCoeffs) -> float:
    from .grid import l2_norm

    return l2_norm(second_difference(synthesize(c)))


def solve_net(p: VeryWeakProblem, threads: int = 1, progress=None) -> NetSolution:
    """Regularize, solve and fit the whole eps ladder.

    progress, when given, is called as progress(i, eps, solution) in eps
    order as members complete (the CLI uses it to flush per-eps files).
    """
    _check_resolution(p)
    a_net = build_net(p.a_spec, p.kernel, p.epsilons, p.grid, enforce_nonneg=True)
    b_net = build_net(p.b_spec, p.kernel, p.epsilons, p.grid, enforce_nonneg=True)
    bases = _bases_for(p, p.kernel)

    u0s, u1s = [], []
    for e, basis in zip(p.epsilons, bases):
        u0s.append(_data_coeffs(p.u0_data, basis, p.kernel, e, p.grid))
        u1s.append(_data_coeffs(p.u1_data, basis, p.kernel, e, p.grid))

    problems = [
        WaveProblem(p.s, bases[i], a_net.members[i], b_net.members[i],
                    u0s[i], u1s[i], p.T, p.dt)
        for i in range(len(p.epsilons))
    ]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(solve_galerkin, prob) for prob in problems]
            solutions = []
            for i, fut in enumerate(futures):
                sol = fut.result()
                solutions.append(sol)
                if progress is not None:
                    progress(i, float(p.epsilons[i]), sol)
    else:
        solutions = []
        for i, prob in enumerate(problems):
            sol = solve_galerkin(prob)
            solutions.append(sol)
            if progress is not None:
                progress(i, float(p.epsilons[i]), sol)

    s_norm = p.sobolev_order
    sup_norms = np.array([_sup_solution_norm(sol, s_norm) for sol in solutions])
    fitted, resid = fit_exponent(p.epsilons, sup_norms)

    input_exponents = {
        "a": fit_exponent(p.epsilons, [m.sup_norm() for m in a_net.members])[0],
        "b": fit_exponent(p.epsilons, [m.sup_norm() for m in b_net.members])[0],
        "u0": fit_exponent(p.epsilons, [_data_norm_u0(c, p) for c in u0s])[0],
        "u1": fit_exponent(p.epsilons, [sobolev_norm(c, 0.0) for c in u1s])[0],
    }
    coeff_exps = [input_exponents["a"], input_exponents["b"]]
    if p.case == "s_equals_1":
        input_exponents["q"] = fit_exponent(
            p.epsilons, [b.q_used.sup_norm() for b in bases]
        )[0]
        coeff_exps.append(input_exponents["q"])
    # the theorems take N in the nonnegative integers, so the max rule is
    # evaluated with exponents floored at zero
    predicted = max(max(coeff_exps), 0.0) + max(
        input_exponents["u0"], input_exponents["u1"], 0.0
    )

    variant = "s_equals_1" if p.case == "s_equals_1" else "general_s"
    bound_ratios = np.array(
        [check_estimates(sol, variant).max_ratio for sol in solutions]
    )
    trend = fit_exponent(p.epsilons, bound_ratios)[0]

    return NetSolution(p, p.epsilons, solutions, sup_norms, fitted, resid,
                       input_exponents, predicted, bound_ratios, trend)


def _sup_l2_difference(sol_a: WaveSolution, sol_b: WaveSolution) -> float:
    h = sol_a.problem.basis.grid.h
    diff = sol_a.grid_values() - sol_b.grid_values()
    return float(np.sqrt(h) * np.linalg.norm(diff, axis=1).max())


def _sup_l2_scale(sol: WaveSolution) -> float:
    return float(np.linalg.norm(sol.U, axis=1).max())


def uniqueness_report(net_a: NetSolution, net_b: NetSolution) -> ConvergenceReport:
    """sup_t L2 distance of two regularized nets per eps, with fitted decay order."""
    if not np.array_equal(net_a.epsilons, net_b.epsilons):
        raise ValueError("nets must share the same eps ladder")
    diffs, scale = [], 0.0
    for sa, sb in zip(net_a.solutions, net_b.solutions):
        diffs.append(_sup_l2_difference(sa, sb))
        scale = max(scale, _sup_l2_scale(sa), _sup_l2_scale(sb))
    order, resid = fit_decay_order(net_a.epsilons, diffs, scale=scale)
    table = [(float(e), float(d)) for e, d in zip(net_a.epsilons, diffs)]
    return ConvergenceReport(table, order, "L2", context="uniqueness",
                             fit_residual=resid)


def uniqueness_experiment(p: VeryWeakProblem, kernel_b: MollifierKernel,
                          threads: int = 1) -> ConvergenceReport:
    """Solve the net with p's kernel and with kernel_b; report the difference decay.

    Identical kernels give an all-zero table and the +inf order sentinel.
    For smooth coefficient specs both nets converge to the same classical
    limit, so the fitted order is expected to be >= 1; for singular
    coefficients only positivity of the order is expected.
    """
    net_a = solve_net(p, threads=threads)
    net_b = solve_net(replace(p, kernel=kernel_b), threads=threads)
    return uniqueness_report(net_a, net_b)


def consistency_reference(p: VeryWeakProblem) -> WaveSolution:
    """Classical solve with unregularized coefficients on the same grid/basis."""
    for name, spec in (("a", p.a_spec), ("b", p.b_spec), ("q", p.q_spec)):
        if not spec.is_smooth:
            raise SpecNotSmoothError(f"consistency requires a smooth {name} spec")
    basis = build_basis(sample_spec(p.q_spec, p.grid), p.M)
    a = sample_spec(p.a_spec, p.grid)
    b = sample_spec(p.b_spec, p.grid)

    def classical_data(data):
        if isinstance(data, CoefficientSpec):
            if not data.is_smooth:
                raise SpecNotSmoothError("consistency requires smooth data specs")
            return analyze(sample_spec(data, p.grid), basis)
        return _data_coeffs(data, basis, p.kernel, p.epsilons[0], p.grid)

    problem = WaveProblem(p.s, basis, a, b, classical_data(p.u0_data),
                          classical_data(p.u1_data), p.T, p.dt)
    return solve_galerkin(problem)


def consistency_report(net: NetSolution, reference: WaveSolution) -> ConvergenceReport:
    errors = [_sup_l2_difference(sol, reference) for sol in net.solutions]
    scale = _sup_l2_scale(reference)
    order, resid = fit_decay_order(net.epsilons, errors, scale=scale)
    table = [(float(e), float(d)) for e, d in zip(net.epsilons, errors)]
    return ConvergenceReport(table, order, "L2", context="consistency",
                             fit_residual=resid)


def consistency_experiment(p: VeryWeakProblem, threads: int = 1) -> ConvergenceReport:
    """eps -> 0 convergence of the regularized net to the classical solution.

    All coefficient and data specs must be smooth (band-limited coefficient
    vectors are fine and are left untouched, so a fully regular problem with
    vector data reproduces the classical solution identically).
    """
    reference = consistency_reference(p)
    net = solve_net(p, threads=threads)
    return consistency_report(net, reference)
