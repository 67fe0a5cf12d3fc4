"""Exception types raised across the package."""


class GerbeError(Exception):
    """Base class for all errors raised by qmgerbe."""


class DomainError(GerbeError, ValueError):
    """An argument lies outside the domain of an operation."""


class TimeOrderError(DomainError):
    """Event times are not strictly increasing where they must be."""


class CausticError(DomainError):
    """The harmonic kernel was asked for a value at (or near) a caustic."""


class TangentPoleError(DomainError):
    """tan(omega * dt) diverges for the requested interval."""


class DivergentIntegralError(DomainError):
    """A Gaussian phase integral has no quadratic term and cannot be regularised."""


class PoleError(DomainError, ZeroDivisionError):
    """Reciprocal of zero requested."""


class QuadratureError(GerbeError, ArithmeticError):
    """Regularised quadrature was mis-specified or cannot resolve the integrand."""


class VanishingModulusError(GerbeError, ArithmeticError):
    """A quantity that must be normalised to unit modulus is (numerically) zero."""


class IncompleteDataError(GerbeError, KeyError):
    """A cochain or form lacks an entry required by the requested operation."""

    def __str__(self):
        # KeyError quotes its argument; keep the message readable
        return str(self.args[0]) if self.args else ""


class BoundaryMismatchError(GerbeError, ValueError):
    """Two chains that must share an (oppositely oriented) boundary do not."""


class WrongOperationError(GerbeError, ValueError):
    """The input is valid but belongs to a different operation."""
