"""Exception types shared across the package."""


class KgsplineError(Exception):
    """Base class for every error this package raises on purpose."""


class InvalidParameterError(KgsplineError, ValueError):
    """A parameter is out of range, inconsistent, or malformed."""


class BandwidthError(KgsplineError, IndexError):
    """Attempt to touch a matrix entry outside the stored band."""


class NormalizationError(KgsplineError, ArithmeticError):
    """Basis coefficients failed the partition-of-unity identity."""


class SingularMatrixError(KgsplineError, ArithmeticError):
    """Elimination hit a vanishing pivot; carries the pivot index."""

    def __init__(self, pivot_index: int, pivot_value: float):
        self.pivot_index = pivot_index
        self.pivot_value = pivot_value
        super().__init__(
            f"zero pivot at index {pivot_index} (|pivot| = {abs(pivot_value):.3e})"
        )


class DivergenceError(KgsplineError, ArithmeticError):
    """Time stepping produced non-finite values; carries (t, step_index)."""

    def __init__(self, t: float, step_index: int):
        self.t = t
        self.step_index = step_index
        super().__init__(f"solution diverged at t = {t:.6g} (step {step_index})")


class UndefinedReferenceError(KgsplineError, ZeroDivisionError):
    """Relative change requested against a zero reference value."""


class OutputError(KgsplineError):
    """A result file could not be written; message carries the path."""
