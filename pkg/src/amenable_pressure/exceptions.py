"""Custom exceptions for the pressure toolkit."""

from typing import Any, Optional


class PressureError(Exception):
    """Base class for every error raised by the toolkit."""

    pass


class InputError(PressureError):
    """Raised when arguments or input files are malformed.

    Args:
        message: Human readable description
        field: Optional dotted path of the offending field
        location: Optional file the field was read from
    """

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        location: Optional[str] = None,
    ) -> None:
        self.message = message
        self.field = field
        self.location = location
        prefix = ""
        if location:
            prefix += f"{location}: "
        if field:
            prefix += f"{field}: "
        super().__init__(prefix + message)


class DimensionMismatchError(InputError):
    """Raised when lattice objects of different dimension are combined."""

    pass


class PropertyDeclarationError(InputError):
    """Raised when a set function lacks a required property declaration."""

    pass


class BudgetExceededError(PressureError):
    """Raised when an enumeration or search budget is exceeded."""

    pass


class EvaluationError(PressureError):
    """Raised when a set-function evaluator fails on a subset."""

    def __init__(self, message: str, subset: Any = None) -> None:
        self.subset = subset
        super().__init__(message)


class InvariantViolation(PressureError):
    """Raised when a mathematical invariant fails at run time."""

    pass
