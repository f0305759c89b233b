"""Exception types shared across the package."""


class ImagingError(Exception):
    """Base class for all package errors."""


class GeometryError(ImagingError, ValueError):
    """Inconsistent grid / antenna / phantom geometry."""


class IllConditionedError(ImagingError, ArithmeticError):
    """A linear system is singular or too badly conditioned to trust.

    Parameters
    ----------
    message : str
        Human readable description.
    condition : float
        Estimated 1-norm condition number of the offending matrix.
    """

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class InvalidCandidate(ImagingError):
    """A trial descriptor cannot be decoded into a physical map."""


class MeasurementError(ImagingError, ValueError):
    """Measurement data unusable for the cost function."""


class FormatError(ImagingError, ValueError):
    """Malformed or mismatching text file."""
