"""Spectral solver for damped fractional Sturm-Liouville wave equations.

The package solves  u_tt + L^s u + a(x) u + b(x) u_t = 0  on (0,1) with
Dirichlet conditions, where L = -d2/dx2 + q(x), and provides the mollifier
machinery to run the same solve across an eps-indexed net of regularized
(possibly distributional) coefficients: moderateness fits, two-kernel
uniqueness experiments and eps -> 0 consistency studies.
"""

from ._kernels import backend
from .exceptions import (
    BasisMismatchError,
    ConfigError,
    EigensolveError,
    GridMismatchError,
    NegativeSpectrumError,
    NonFiniteError,
    NonNegativityViolatedError,
    NonZeroCouplingError,
    RefusedResolutionError,
    SlwaveError,
    SpecNotSmoothError,
)
from .fitting import ConvergenceReport, fit_decay_order, fit_exponent, refinement_orders
from .grid import (
    Grid,
    GridFunction,
    constant,
    inner_product,
    l2_norm,
    make_grid,
    sample_function,
    zeros,
)
from .mollify import (
    CoefficientSpec,
    DiracDelta,
    DiracPower,
    ModeratenessReport,
    MollifierKernel,
    RegularizedNet,
    Smooth,
    SpecSum,
    build_net,
    check_negligible,
    fit_moderateness,
    mollify,
    sample_spec,
    second_difference,
)
from .spectral import (
    SpectralBasis,
    SpectralCoeffs,
    analyze,
    apply_fractional,
    build_basis,
    sobolev_norm,
    solution_norm,
    synthesize,
)
from .vws import (
    NetSolution,
    VeryWeakProblem,
    consistency_experiment,
    solve_net,
    uniqueness_experiment,
)
from .wave import (
    EnergyTrace,
    WaveProblem,
    WaveSolution,
    assemble_coupling,
    check_estimates,
    default_dt,
    energy_trace,
    solve_duhamel,
    solve_free_series,
    solve_galerkin,
)

__version__ = "0.1.0"
