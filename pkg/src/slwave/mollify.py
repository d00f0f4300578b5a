"""Friedrichs mollifiers, distributional coefficient specs and regularizing nets.

A coefficient is described symbolically (smooth generator, Dirac delta at
x0, integer powers of the delta, or a weighted sum) and realized as an
eps-indexed family of grid functions:

  * smooth f:      zero-extension beyond (0,1), then convolution with
                   psi_eps(x) = psi(x/eps)/eps, evaluated by per-node
                   Gauss-Legendre quadrature over the kernel support;
  * delta at x0:   psi_eps(x - x0) exactly (delta * psi_eps is mesh free);
  * delta power k: (psi_eps(x - x0))^k.

fit_moderateness estimates the exponent N in ||f_eps|| ~ eps^{-N} by a
log-log least-squares fit; check_negligible reports the observed decay
order of a difference of two nets (true negligibility at all orders is not
decidable numerically).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .exceptions import (
    GridMismatchError,
    NonNegativityViolatedError,
    RefusedResolutionError,
    SpecNotSmoothError,
)
from .fitting import ConvergenceReport, fit_decay_order, fit_exponent
from .grid import Grid, GridFunction, l2_norm, sample_function

__all__ = [
    "MollifierKernel",
    "CoefficientSpec",
    "Smooth",
    "DiracDelta",
    "DiracPower",
    "SpecSum",
    "RegularizedNet",
    "ModeratenessReport",
    "SupportEscapeWarning",
    "mollify",
    "build_net",
    "sample_spec",
    "fit_moderateness",
    "check_negligible",
    "second_difference",
    "net_norm",
    "write_net_csv",
]

#: minimum kernel-width-to-mesh ratio; below this psi_eps is not resolved
MIN_EPS_OVER_H = 8.0

#: negative dips smaller than this are clamped to zero, larger ones raise
NONNEG_TOL = 1e-12

#: Gauss-Legendre points per smooth piece of the convolution integrand
_GL_POINTS = 96

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_POINTS)


class SupportEscapeWarning(UserWarning):
    """The support of psi_eps(. - x0) sticks out of [0,1]; values are truncated."""


def _bump(y):
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    m = np.abs(y) < 1.0
    out[m] = np.exp(-1.0 / (1.0 - y[m] ** 2))
    return out


# integral of exp(-1/(1-y^2)) over (-1,1), by adaptive quadrature to ~1e-14
_BUMP_INTEGRAL = quad(lambda y: float(_bump(np.array([y]))[0]), -1.0, 1.0,
                      epsabs=1e-14, epsrel=1e-14, limit=200)[0]


class MollifierKernel:
    """The classical bump mollifier, optionally re-centered inside (-1,1).

    The centered kernel is kappa * exp(-1/(1-y^2)) on (-1,1).  A nonzero
    offset tau squeezes the bump onto [tau-(1-|tau|), tau+(1-|tau|)] so the
    support stays inside [-1,1]; the result is still smooth, nonnegative
    and of unit mass, hence an admissible mollifier distinct from the
    centered one (it is no longer even, which is what the uniqueness
    experiments need).
    """

    def __init__(self, offset: float = 0.0):
        if not -1.0 < offset < 1.0:
            raise ValueError(f"offset must lie in (-1,1), got {offset}")
        self.offset = float(offset)
        self.halfwidth = 1.0 - abs(self.offset)
        self.support = (self.offset - self.halfwidth, self.offset + self.halfwidth)
        self.kappa = 1.0 / (_BUMP_INTEGRAL * self.halfwidth)

    def __call__(self, y):
        return self.kappa * _bump((np.asarray(y, dtype=float) - self.offset) / self.halfwidth)

    def peak(self) -> float:
        """Value at the center of the bump, kappa * e^{-1}."""
        return self.kappa * np.exp(-1.0)

    def scaled(self, eps: float, x, center: float = 0.0):
        """psi_eps(x - center) = psi((x - center)/eps)/eps."""
        return self((np.asarray(x, dtype=float) - center) / eps) / eps

    def describe(self) -> dict:
        return {"profile": "bump", "offset": self.offset}


class CoefficientSpec:
    """Symbolic description of a (possibly distributional) coefficient."""

    def __init__(self, nonneg_required: bool = False):
        self.nonneg_required = bool(nonneg_required)

    @property
    def is_smooth(self) -> bool:
        return False

    def describe(self) -> dict:
        raise NotImplementedError


class Smooth(CoefficientSpec):
    """A regular coefficient given by a vectorized sample generator on (0,1)."""

    def __init__(self, fn, nonneg_required: bool = False, label: str = ""):
        super().__init__(nonneg_required)
        self.fn = fn
        self.label = label

    @property
    def is_smooth(self) -> bool:
        return True

    def describe(self) -> dict:
        return {"kind": "smooth", "label": self.label}


class DiracDelta(CoefficientSpec):
    def __init__(self, x0: float, nonneg_required: bool = False):
        super().__init__(nonneg_required)
        if not 0.0 < x0 < 1.0:
            raise ValueError(f"x0 must lie in (0,1), got {x0}")
        self.x0 = float(x0)

    def describe(self) -> dict:
        return {"kind": "dirac", "x0": self.x0}


class DiracPower(CoefficientSpec):
    def __init__(self, x0: float, k: int, nonneg_required: bool = False):
        super().__init__(nonneg_required)
        if not 0.0 < x0 < 1.0:
            raise ValueError(f"x0 must lie in (0,1), got {x0}")
        if int(k) != k or k < 2:
            raise ValueError(f"delta power k must be an integer >= 2, got {k}")
        self.x0 = float(x0)
        self.k = int(k)

    def describe(self) -> dict:
        return {"kind": "dirac_power", "x0": self.x0, "k": self.k}


class SpecSum(CoefficientSpec):
    """Weighted sum of specs; weights must be nonnegative when the sum is."""

    def __init__(self, terms, nonneg_required: bool = False):
        super().__init__(nonneg_required)
        terms = [(float(w), s) for w, s in terms]
        if not terms:
            raise ValueError("SpecSum needs at least one term")
        if nonneg_required and any(w < 0 for w, _ in terms):
            raise ValueError("nonnegative sum cannot carry negative weights")
        self.terms = terms

    @property
    def is_smooth(self) -> bool:
        return all(s.is_smooth for _, s in self.terms)

    def describe(self) -> dict:
        return {
            "kind": "sum",
            "terms": [{"weight": w, "spec": s.describe()} for w, s in self.terms],
        }


def _convolve_smooth(fn, kernel: MollifierKernel, eps: float, grid: Grid) -> np.ndarray:
    """f_eps(x_j) = int psi(y) f~(x_j - eps y) dy with zero extension of f.

    The integrand has kinks where x_j - eps*y crosses 0 or 1, so [lo,hi] is
    split there; each smooth piece gets a fixed Gauss-Legendre rule.  The
    bump is smooth with flat endpoints, so 96 points reach ~1e-14.
    """
    x = grid.nodes
    lo, hi = kernel.support
    # z = x - eps*y crosses 1 at y = (x-1)/eps and 0 at y = x/eps
    b1 = np.clip((x - 1.0) / eps, lo, hi)
    b2 = np.clip(x / eps, lo, hi)
    edges = np.stack([np.full_like(x, lo), b1, b2, np.full_like(x, hi)])
    out = np.zeros_like(x)
    for p in range(3):
        a, b = edges[p], edges[p + 1]
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        Y = mid[None, :] + half[None, :] * _GL_NODES[:, None]  # (K, n)
        W = half[None, :] * _GL_WEIGHTS[:, None] * kernel(Y)
        Z = x[None, :] - eps * Y
        F = np.zeros_like(Z)
        inside = (Z > 0.0) & (Z < 1.0)
        if np.any(inside):
            F[inside] = fn(Z[inside])
        out += np.sum(W * F, axis=0)
    return out


def _mollify_values(spec: CoefficientSpec, kernel: MollifierKernel, eps: float,
                    grid: Grid):
    """Returns (values, support_escaped)."""
    if isinstance(spec, Smooth):
        return _convolve_smooth(spec.fn, kernel, eps, grid), False
    if isinstance(spec, (DiracDelta, DiracPower)):
        lo, hi = kernel.support
        escaped = (spec.x0 + eps * lo < 0.0) or (spec.x0 + eps * hi > 1.0)
        vals = kernel.scaled(eps, grid.nodes, center=spec.x0)
        if isinstance(spec, DiracPower):
            vals = vals**spec.k
        return vals, escaped
    if isinstance(spec, SpecSum):
        vals = np.zeros(grid.n_interior)
        escaped = False
        for w, s in spec.terms:
            v, esc = _mollify_values(s, kernel, eps, grid)
            vals += w * v
            escaped = escaped or esc
        return vals, escaped
    raise TypeError(f"unknown coefficient spec {type(spec).__name__}")


def mollify(spec: CoefficientSpec, kernel: MollifierKernel, eps: float,
            grid: Grid) -> GridFunction:
    """One member f_eps of the regularizing net of spec.

    Requires 0 < eps <= 1 and eps >= 8h so the scaled kernel is resolved by
    the grid.  When the support of psi_eps(. - x0) sticks out of [0,1] the
    values are simply truncated to the grid and a SupportEscapeWarning is
    issued.
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0,1], got {eps}")
    if eps < MIN_EPS_OVER_H * grid.h:
        raise RefusedResolutionError(
            f"eps = {eps:.3g} is below {MIN_EPS_OVER_H:g}h = "
            f"{MIN_EPS_OVER_H * grid.h:.3g}; refine the grid"
        )
    vals, escaped = _mollify_values(spec, kernel, eps, grid)
    if escaped:
        warnings.warn(
            f"support of the scaled kernel escapes [0,1] at eps = {eps:.3g}",
            SupportEscapeWarning,
            stacklevel=2,
        )
    return GridFunction(grid, vals)


def sample_spec(spec: CoefficientSpec, grid: Grid) -> GridFunction:
    """Directly sample a smooth spec (no mollification); singular specs refuse."""
    if isinstance(spec, Smooth):
        return sample_function(spec.fn, grid)
    if isinstance(spec, SpecSum) and spec.is_smooth:
        vals = np.zeros(grid.n_interior)
        for w, s in spec.terms:
            vals += w * sample_spec(s, grid).values
        return GridFunction(grid, vals)
    raise SpecNotSmoothError(
        f"{type(spec).__name__} cannot be sampled directly; it must be mollified"
    )


@dataclass(eq=False)
class RegularizedNet:
    """eps-indexed mollified family of one coefficient spec on one grid."""

    spec: CoefficientSpec
    kernel: MollifierKernel
    epsilons: np.ndarray
    members: list
    support_escaped: list = field(default_factory=list)
    clamped: list = field(default_factory=list)

    @property
    def grid(self) -> Grid:
        return self.members[0].grid


def build_net(spec: CoefficientSpec, kernel: MollifierKernel, epsilons,
              grid: Grid, enforce_nonneg: bool | None = None) -> RegularizedNet:
    """Mollify spec at every eps; enforces the nonnegativity invariant.

    epsilons must be strictly decreasing in (0,1].  Tiny negative dips
    (>= -1e-12, pure roundoff) are clamped to zero and flagged; a material
    dip means the spec lied about nonnegativity and raises
    NonNegativityViolatedError.
    """
    eps = np.asarray(epsilons, dtype=float)
    if eps.size == 0:
        raise ValueError("epsilons must be nonempty")
    if np.any(eps <= 0.0) or np.any(eps > 1.0):
        raise ValueError("epsilons must lie in (0,1]")
    if eps.size > 1 and np.any(np.diff(eps) >= 0.0):
        raise ValueError("epsilons must be strictly decreasing")
    if enforce_nonneg is None:
        enforce_nonneg = spec.nonneg_required

    members, escaped_flags, clamped_flags = [], [], []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SupportEscapeWarning)
        for e in eps:
            if e < MIN_EPS_OVER_H * grid.h:
                raise RefusedResolutionError(
                    f"eps = {e:.3g} is below {MIN_EPS_OVER_H:g}h = "
                    f"{MIN_EPS_OVER_H * grid.h:.3g}; refine the grid"
                )
            vals, esc = _mollify_values(spec, kernel, e, grid)
            clamped = False
            if enforce_nonneg:
                mn = vals.min()
                if mn < -NONNEG_TOL:
                    raise NonNegativityViolatedError(
                        f"member at eps = {e:.3g} dips to {mn:.3g} < -{NONNEG_TOL:g} "
                        "although the spec requires nonnegativity"
                    )
                if mn < 0.0:
                    vals = np.maximum(vals, 0.0)
                    clamped = True
            members.append(GridFunction(grid, vals))
            escaped_flags.append(esc)
            clamped_flags.append(clamped)
    return RegularizedNet(spec, kernel, eps, members, escaped_flags, clamped_flags)


def second_difference(f: GridFunction) -> GridFunction:
    """Second central differences with the Dirichlet zero extension."""
    padded = np.zeros(f.grid.n_interior + 2)
    padded[1:-1] = f.values
    d2 = (padded[:-2] - 2.0 * padded[1:-1] + padded[2:]) / f.grid.h**2
    return GridFunction(f.grid, d2)


def net_norm(f: GridFunction, norm_kind: str) -> float:
    """sup, L2 or H2 (= L2 of f plus L2 of its second differences)."""
    if norm_kind == "sup":
        return f.sup_norm()
    if norm_kind == "L2":
        return l2_norm(f)
    if norm_kind == "H2":
        return l2_norm(f) + l2_norm(second_difference(f))
    raise ValueError(f"unknown norm kind {norm_kind!r}")


@dataclass
class ModeratenessReport:
    """Fitted exponent N in ||f_eps|| ~ eps^{-N} with the fit residual."""

    fitted_N: float
    fit_residual: float
    norm_kind: str
    table: list

    def __post_init__(self):
        if not self.table:
            raise ValueError("moderateness table must be nonempty")
        eps = [e for e, _ in self.table]
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps column must be strictly decreasing")
        if self.fit_residual < 0:
            raise ValueError("fit residual must be nonnegative")


def fit_moderateness(net: RegularizedNet, norm_kind: str) -> ModeratenessReport:
    """Least-squares slope of log(norm) against log(1/eps) over the net."""
    if len(net.members) < 3:
        raise ValueError("need at least 3 members to fit an exponent")
    norms = np.array([net_norm(m, norm_kind) for m in net.members])
    fitted, resid = fit_exponent(net.epsilons, norms)
    table = [(float(e), float(v)) for e, v in zip(net.epsilons, norms)]
    return ModeratenessReport(fitted, resid, norm_kind, table)


def check_negligible(net_a: RegularizedNet, net_b: RegularizedNet,
                     norm_kind: str) -> ConvergenceReport:
    """Observed decay order of ||A_eps - B_eps|| over a shared eps ladder.

    The order is reported as a fitted slope, never as a boolean over all k:
    identical nets get the +inf sentinel, distinct limits give order ~ 0 or
    negative.
    """
    if not np.array_equal(net_a.epsilons, net_b.epsilons):
        raise ValueError("nets must share the same epsilons")
    if not net_a.grid.compatible(net_b.grid):
        raise GridMismatchError("nets live on different grids")
    diffs, scale = [], 0.0
    for fa, fb in zip(net_a.members, net_b.members):
        diffs.append(net_norm(GridFunction(fa.grid, fa.values - fb.values), norm_kind))
        scale = max(scale, net_norm(fa, norm_kind), net_norm(fb, norm_kind))
    order, resid = fit_decay_order(net_a.epsilons, diffs, scale=scale)
    table = [(float(e), float(d)) for e, d in zip(net_a.epsilons, diffs)]
    return ConvergenceReport(table, order, norm_kind, context="negligibility",
                             fit_residual=resid)


def write_net_csv(net: RegularizedNet, path):
    """Per-eps norms with a JSON header line describing the spec and kernel."""
    header = {"spec": net.spec.describe(), "kernel": net.kernel.describe()}
    with open(path, "w", newline="") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        fh.write("eps,sup_norm,l2_norm,h2_norm\n")
        for e, m in zip(net.epsilons, net.members):
            row = [
                repr(float(e)),
                repr(net_norm(m, "sup")),
                repr(net_norm(m, "L2")),
                repr(net_norm(m, "H2")),
            ]
            fh.write(",".join(row) + "\n")
