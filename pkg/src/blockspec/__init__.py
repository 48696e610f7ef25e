"""Random block tridiagonal ensembles, matrix orthogonal polynomial roots,
and their limiting spectral densities."""

from .ensemble import (
    EmpiricalSpectrum,
    GammaWeights,
    RngSeed,
    build_F,
    build_F_tilde,
    build_G,
    chi_sample,
    rng_from_seed,
    scalar_entry_dof,
)
from .errors import (
    ConvergenceError,
    NotPositiveDefiniteError,
    NumericalError,
    ValidationError,
)
from .harness import (
    ExperimentConfig,
    GapReport,
    approx_gap,
    empirical_spectrum,
    gap_report,
    ks_distance,
    levy_cubed_bound,
    tail_bound_experiment,
)
from .linalg import (
    EigenDecomposition,
    SymmetricBanded,
    eigh_banded,
    eigh_dense,
    log_abs_det,
    spd_inv_sqrt,
)
from .matrixpoly import (
    RecurrenceCoeffs,
    cheb_T,
    cheb_U,
    eval_R,
    markov_bound_check,
    recurrence_coeffs,
    roots,
)
from .spectral import (
    LimitModel,
    SpectralDensity,
    arcsine_mixture_density,
    build_AB,
    density_grid,
    lambda_and_weights,
    limit_density,
    semicircle_density,
    support_bound,
    tabulate_density,
    trace_density,
)

__version__ = "0.1.0"
