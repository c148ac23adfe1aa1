"""Finsler sections, witnesses and exact certificates for matrix polynomials."""

from .errors import (
    CapExceeded,
    DecompositionError,
    DegreeInsufficient,
    DimensionMismatch,
    FinslerpolyError,
    FitFails,
    HypothesisFails,
    JacobiNonConvergence,
    ParseError,
    ShapeMismatch,
    ValidationFails,
)
from .matpoly import MatPoly, direct_sum, herm_square_sum, matpoly_eval
from .poly import Poly, norm_sq_poly, poly_eval
from .pointwise import (
    SectionInterval,
    TraceCheckResult,
    check_finsler_hypothesis,
    eigen_range,
    finsler_interval,
    is_positive_definite,
    multi_constraint_trace_check,
)

__version__ = "0.1.0"

__all__ = [
    "CapExceeded",
    "DecompositionError",
    "DegreeInsufficient",
    "DimensionMismatch",
    "FinslerpolyError",
    "FitFails",
    "HypothesisFails",
    "JacobiNonConvergence",
    "MatPoly",
    "ParseError",
    "Poly",
    "SectionInterval",
    "ShapeMismatch",
    "TraceCheckResult",
    "ValidationFails",
    "check_finsler_hypothesis",
    "direct_sum",
    "eigen_range",
    "finsler_interval",
    "herm_square_sum",
    "is_positive_definite",
    "matpoly_eval",
    "multi_constraint_trace_check",
    "norm_sq_poly",
    "poly_eval",
    "__version__",
]
