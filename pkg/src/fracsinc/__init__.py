"""Negative fractional powers of accretive operators via sinc quadrature.

The approximation rests on the resolvent-integral representation of
A^{-beta}: after the substitution mu = e^y the integral becomes a smooth
integrand on the whole line, an equally spaced quadrature converges
exponentially in the spacing k, and each quadrature node costs one shifted
solve (mu I + A)^{-1}.  The package provides scheme construction and
application for any operator exposing shifted solves, a dense backend with
a spectral oracle, a 1D finite element backend with closed-form eigenpairs,
and the convergence studies that verify the predicted decay and
mesh-refinement rates.
"""

from .experiments import (
    FLOOR_THRESHOLD,
    H1,
    L2,
    R_AS_BETA,
    ConvergenceTable,
    SincStudyConfig,
    TotalStudyConfig,
    coupling_rule_k,
    csv_text,
    emit_csv,
    fit_slope,
    resolve_s_plus,
    sinc_error_study,
    total_error_study,
)
from .fem1d import (
    GAUSS_POINTS,
    Fem1dSystem,
    FemSpectralData,
    assemble,
    discrete_eigenpairs,
    error_norms,
    fractional_norm,
    l2_project,
    reference_solution_derivative,
    reference_solution_series,
    semidiscrete_solution,
    thomas,
)
from .operators import (
    DenseAccretiveOperator,
    NumericalError,
    SpectralData,
    read_dense_matrix,
    symmetric_eigendecomposition,
    write_dense_matrix,
)
from .quadrature import (
    BALANCED,
    UNIFORM,
    ShiftedSolveOperator,
    SincScheme,
    apply_quadrature,
    build_scheme,
    scalar_quadrature,
    theoretical_error_bound,
)

__version__ = "0.1.0"

__all__ = [
    "BALANCED",
    "UNIFORM",
    "L2",
    "H1",
    "R_AS_BETA",
    "FLOOR_THRESHOLD",
    "GAUSS_POINTS",
    "__version__",
    "SincScheme",
    "ShiftedSolveOperator",
    "build_scheme",
    "apply_quadrature",
    "scalar_quadrature",
    "theoretical_error_bound",
    "NumericalError",
    "DenseAccretiveOperator",
    "SpectralData",
    "symmetric_eigendecomposition",
    "read_dense_matrix",
    "write_dense_matrix",
    "Fem1dSystem",
    "FemSpectralData",
    "assemble",
    "l2_project",
    "discrete_eigenpairs",
    "fractional_norm",
    "semidiscrete_solution",
    "reference_solution_series",
    "reference_solution_derivative",
    "error_norms",
    "thomas",
    "SincStudyConfig",
    "TotalStudyConfig",
    "ConvergenceTable",
    "resolve_s_plus",
    "coupling_rule_k",
    "fit_slope",
    "sinc_error_study",
    "total_error_study",
    "csv_text",
    "emit_csv",
]
