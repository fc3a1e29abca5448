"""Exception hierarchy shared by every module."""


class QSLError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(QSLError, ValueError):
    """Operands have incompatible dimensions."""


class ValidationError(QSLError, ValueError):
    """Input violates a structural requirement (e.g. not Hermitian)."""


class NotPSDError(ValidationError):
    """Matrix has an eigenvalue below the PSD tolerance."""


class InvalidParametersError(QSLError, ValueError):
    """Model parameters violate a construction precondition."""


class DomainError(QSLError, ValueError):
    """Numeric argument outside the domain of a formula."""


class ResourceError(QSLError):
    """Requested Hilbert space exceeds the dimension budget."""


class StationaryStateError(QSLError):
    """State has no energy resources above ground, so it never evolves."""


class NoOrthogonalityError(QSLError):
    """The model's survival probability never reaches zero."""


class NumericError(QSLError, ArithmeticError):
    """A computed quantity is not finite."""
