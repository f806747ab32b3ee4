"""Exception hierarchy for equilib."""

from typing import Optional


class EquilibError(Exception):
    """Base class for all equilib errors."""


class DomainError(EquilibError, ValueError):
    """Raised when parameters fall outside the domain of an operation."""

    def __init__(self, message: str, parameter: Optional[str] = None):
        self.parameter = parameter
        if parameter:
            message = f"{parameter}: {message}"
        super().__init__(message)


class PoleError(DomainError):
    """Field derivative requested at a real charge location."""

    def __init__(self, message: str, location: float):
        self.location = location
        super().__init__(message, parameter="x")


class ConvergenceError(EquilibError):
    """A solver failed to converge or its bracket was invalid."""

    def __init__(self, message: str, residual: Optional[float] = None):
        self.residual = residual
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)


class VerificationError(EquilibError):
    """The oracle disagrees with a closed form beyond tolerance."""
