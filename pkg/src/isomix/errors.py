"""Exception types shared across the package."""


class IsomixError(Exception):
    """Base class for all package errors."""


class PreconditionError(IsomixError, ValueError):
    """An argument violates an operation's precondition."""


class DomainError(PreconditionError):
    """A value lies outside the domain an operation is defined on."""


class UnsupportedOperation(IsomixError, TypeError):
    """The operation is not defined for the given model family."""


class InvalidDensityError(IsomixError, ValueError):
    """A supposed density returned a negative or non-finite value."""


class DegenerateModelError(IsomixError, ArithmeticError):
    """A quadrature denominator vanished or underflowed."""
