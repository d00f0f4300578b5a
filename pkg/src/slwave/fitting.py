"""Log-log least-squares order fitting and convergence bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConvergenceReport",
    "fit_loglog",
    "fit_exponent",
    "fit_decay_order",
    "refinement_orders",
]

#: relative floor below which a difference counts as exactly zero
ZERO_FLOOR = 1e-14


@dataclass
class ConvergenceReport:
    """Error-vs-eps table with a fitted decay order.

    fitted_order is +inf when every tabulated error sits at the floor
    (identical inputs); it can be negative when errors grow as eps shrinks.
    """

    table: list
    fitted_order: float
    norm_kind: str
    context: str = ""
    fit_residual: float = field(default=0.0)

    def __post_init__(self):
        if not self.table:
            raise ValueError("convergence table must be nonempty")
        if any(err < 0 for _, err in self.table):
            raise ValueError("errors must be nonnegative")


def fit_loglog(x, y):
    """Least-squares line through (log x, log y): returns (slope, intercept, rms residual)."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    if lx.size < 2:
        return 0.0, float(ly[0]) if ly.size else 0.0, 0.0
    coef = np.polyfit(lx, ly, 1)
    resid = ly - np.polyval(coef, lx)
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2)))


def fit_exponent(epsilons, norms):
    """Fitted N in ||f_eps|| ~ eps^{-N}: slope of log(norm) against log(1/eps).

    A degenerate table (all norms equal, including all-zero) fits N = 0 with
    zero residual.
    """
    eps = np.asarray(epsilons, dtype=float)
    vals = np.asarray(norms, dtype=float)
    if vals.size == 0:
        raise ValueError("empty table")
    if np.all(vals == vals[0]):
        return 0.0, 0.0
    if np.any(vals <= 0):
        raise ValueError("norms must be positive for a log-log fit")
    slope, _, resid = fit_loglog(1.0 / eps, vals)
    return slope, resid


def fit_decay_order(epsilons, errors, scale=1.0):
    """Fitted p in err ~ eps^p; +inf when all errors are at the zero floor.

    scale sets the floor: errors <= ZERO_FLOOR * max(scale, 1) are treated
    as exact zeros.
    """
    eps = np.asarray(epsilons, dtype=float)
    err = np.asarray(errors, dtype=float)
    floor = ZERO_FLOOR * max(float(scale), 1.0)
    if np.all(err <= floor):
        return math.inf, 0.0
    keep = err > floor
    if keep.sum() < 2:
        return math.inf, 0.0
    slope, _, resid = fit_loglog(eps[keep], err[keep])
    return slope, resid


def refinement_orders(errors, ratio=2.0):
    """Per-refinement observed orders log(e_i / e_{i+1}) / log(ratio)."""
    err = np.asarray(errors, dtype=float)
    return [
        float(np.log(err[i] / err[i + 1]) / np.log(ratio))
        for i in range(len(err) - 1)
    ]
