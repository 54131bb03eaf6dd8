"""Exception and warning types shared across the package."""


class FracheatError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(FracheatError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Evaluation requested exactly at a pole (e.g. Gamma at 0, -1, -2, ...)."""


class OverflowRangeError(FracheatError, OverflowError):
    """The true result exceeds double-precision range."""


class ConvergenceError(FracheatError):
    """An iterative scheme exhausted its budget without meeting tolerance."""


class QuadratureError(FracheatError):
    """A quadrature rule could not certify the requested tolerance."""


class DivergenceError(FracheatError, ArithmeticError):
    """A closed-form value was requested where the underlying integral diverges."""


class AliasingError(FracheatError, ValueError):
    """Requested spatial points violate the Nyquist bound of the spectral grid."""


class DomainTooSmallError(FracheatError, ValueError):
    """Field values at the lattice boundary are too large for the operation."""


class ConfigError(FracheatError, ValueError):
    """An experiment configuration failed validation; message names the field."""


class DivergenceWarning(UserWarning):
    """Monte-Carlo estimation requested for a spec whose variance diverges."""


class StabilityWarning(UserWarning):
    """A discretization is running outside its resolution comfort zone."""
