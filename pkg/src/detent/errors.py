"""Exception hierarchy shared by all modules."""


class DetentError(Exception):
    """Base class for every error raised by the package."""


class DomainError(DetentError, ValueError):
    """Argument outside the mathematical or physical domain of an operation."""


class ValidityError(DomainError):
    """An approximation was requested outside the regime where it holds."""


class InstabilityError(DomainError):
    """Parameters put a normal mode on or beyond the runaway boundary."""


class NoConvergenceError(DetentError, ArithmeticError):
    """An iteration or quadrature did not reach its tolerance."""
