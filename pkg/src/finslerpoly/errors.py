"""Exception hierarchy shared across the package."""


class FinslerpolyError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(FinslerpolyError):
    """Operands disagree on variable count or matrix dimension."""


class ShapeMismatch(FinslerpolyError):
    """Certificate data is structurally incompatible with its target."""


class ParseError(FinslerpolyError):
    """Malformed JSON / CSV / grid-spec input."""


class JacobiNonConvergence(FinslerpolyError):
    """Cyclic Jacobi iteration hit the sweep cap before converging."""


class HypothesisFails(FinslerpolyError):
    """A pointwise Finsler hypothesis check failed at some sample point."""

    def __init__(self, point, message=""):
        self.point = point
        super().__init__(message or f"section hypothesis fails at {point}")


class DegreeInsufficient(FinslerpolyError):
    """No polynomial up to the degree cap verifies on the fine grid."""


class CapExceeded(FinslerpolyError):
    """An iteration / exponent / degree cap was hit before success."""


class ValidationFails(FinslerpolyError):
    """A constructed witness left its section tube at a validation sample."""

    def __init__(self, point, message=""):
        self.point = point
        super().__init__(message or f"witness validation fails at {point}")


class FitFails(FinslerpolyError):
    """No correction term within the fitting caps keeps the witness in its tube."""


class DecompositionError(FinslerpolyError):
    """A claimed ledger decomposition does not reproduce its target exactly."""
