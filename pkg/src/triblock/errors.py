"""Exception types shared across the package."""


class TriblockError(Exception):
    """Base class for all package errors."""


class DimensionError(TriblockError, ValueError):
    """Operands do not conform."""


class NotSPDError(TriblockError, ValueError):
    """A matrix required to be symmetric positive definite is not."""


class PivotBreakdownError(NotSPDError):
    """Nonpositive pivot during an (incomplete) factorization.

    Signals either an input that is not SPD or a drop tolerance that was too
    aggressive; the remedy is the caller's choice.
    """

    def __init__(self, column: int, pivot: float | None = None):
        self.column = column
        self.pivot = pivot
        msg = f"nonpositive pivot at column {column}"
        if pivot is not None:
            msg += f" (pivot={pivot:.3e})"
        super().__init__(msg)


class EigenConvergenceError(TriblockError, RuntimeError):
    """An eigenvalue iteration exceeded its sweep cap."""


class HypothesisViolatedError(TriblockError, ValueError):
    """Inputs fall outside the assumptions of a bound calculator."""


class NotSupportedError(TriblockError, ValueError):
    """Requested operation is outside the supported envelope."""


class ValidationError(TriblockError, ValueError):
    """A block system failed its structural validation."""


class MatrixMarketError(TriblockError, ValueError):
    """Matrix Market parsing failure, annotated with a line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedFieldError(MatrixMarketError):
    """Matrix Market field (complex/pattern) that the reader does not accept."""
