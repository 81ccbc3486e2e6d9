"""Tension (exponential cubic) B-spline collocation solver for the cubic
Klein-Gordon equation, with conservation diagnostics and experiment
drivers."""

from .banded import (
    GROWTH_LIMIT,
    BandedLU,
    BandedMatrix,
    lu_factor,
    make_banded,
    solve,
    solve_dense_oracle,
)
from .basis import (
    SERIES_THRESHOLD,
    NodalStencils,
    SplineBasis,
    eval_with_derivatives,
    make_basis,
    nodal_stencils,
    polynomial_limit_stencils,
)
from .diagnostics import (
    ExactKink,
    RunRecord,
    closed_form_invariants,
    energy,
    exact_u,
    exact_v,
    invariants,
    linf_error,
    max_abs_diff,
    momentum,
    relative_change,
)
from .errors import (
    BandwidthError,
    DivergenceError,
    InvalidParameterError,
    KgsplineError,
    NormalizationError,
    OutputError,
    SingularMatrixError,
    UndefinedReferenceError,
)
from .fitting import (
    CoefficientState,
    Grid,
    check_same_spacing,
    fit_initial,
    nodal_values,
    reconstruct,
)
from .solver import (
    ProblemSpec,
    RowCoefficients,
    RunResult,
    assemble,
    init_state,
    row_coefficients,
    run,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "GROWTH_LIMIT",
    "SERIES_THRESHOLD",
    "BandedLU",
    "BandedMatrix",
    "BandwidthError",
    "CoefficientState",
    "DivergenceError",
    "ExactKink",
    "Grid",
    "InvalidParameterError",
    "KgsplineError",
    "NodalStencils",
    "NormalizationError",
    "OutputError",
    "ProblemSpec",
    "RowCoefficients",
    "RunRecord",
    "RunResult",
    "SingularMatrixError",
    "SplineBasis",
    "UndefinedReferenceError",
    "assemble",
    "check_same_spacing",
    "closed_form_invariants",
    "energy",
    "eval_with_derivatives",
    "exact_u",
    "exact_v",
    "fit_initial",
    "init_state",
    "invariants",
    "linf_error",
    "lu_factor",
    "make_banded",
    "make_basis",
    "max_abs_diff",
    "momentum",
    "nodal_stencils",
    "nodal_values",
    "polynomial_limit_stencils",
    "reconstruct",
    "relative_change",
    "row_coefficients",
    "run",
    "solve",
    "solve_dense_oracle",
    "step",
]
