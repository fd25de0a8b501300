"""Exception hierarchy used across the package."""


class PolyIntError(Exception):
    """Base class for all package errors."""


class DomainError(PolyIntError, ValueError):
    """Argument outside the domain of an operation (zero vector, zero polynomial, ...)."""


class GeometryError(PolyIntError):
    """A geometric construction failed, e.g. a ray root could not be bracketed."""


class UnsupportedOperation(PolyIntError):
    """Operation not available for this kind of body."""


class RangeError(PolyIntError, ValueError):
    """Parameter outside the admissible range (e.g. ``t`` outside the chord)."""


class ResolutionError(PolyIntError):
    """Requested quantity needs more sample nodes than the profile has."""


class ConditioningError(PolyIntError):
    """Least-squares system is numerically rank deficient."""

    def __init__(self, message, condition):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class InconsistencyError(PolyIntError):
    """Input data is inconsistent with the structure it is supposed to have."""


class PreconditionError(PolyIntError):
    """A documented precondition of an operation does not hold."""


class SingularityError(PolyIntError, ValueError):
    """Parameter too close to a pole of the formula being evaluated."""


class ExcludedOrderError(PolyIntError, ValueError):
    """Derivative order excluded from the identity being checked."""


class NearIntegerOrderError(PolyIntError, ValueError):
    """Fractional order too close to an integer; use the limit operation instead."""


class NumericError(PolyIntError, ArithmeticError):
    """Arithmetic produced a non-finite value."""
