"""Exception hierarchy shared by all foxfade modules."""

from __future__ import annotations


class FoxFadeError(Exception):
    """Base class for every error raised by foxfade."""


class DomainError(FoxFadeError, ValueError):
    """An argument lies outside the domain of a function."""


class PoleError(DomainError):
    """A gamma function was evaluated at one of its poles."""


class NumericalOverflowError(FoxFadeError, OverflowError):
    """A result is outside the double-precision range.

    ``log_magnitude`` is the natural log of the result's size when known.
    """

    def __init__(self, message: str, log_magnitude: float | None = None):
        super().__init__(message)
        self.log_magnitude = log_magnitude


class SeriesTruncationError(FoxFadeError):
    """A series hit its hard term cap before converging."""


class InvalidParameterError(FoxFadeError, ValueError):
    """A channel parameter violates its bound."""


class NearSingularError(FoxFadeError, ValueError):
    """The series representation is singular for these parameters."""


class NonIntegerClusterError(FoxFadeError, ValueError):
    """The in-phase or quadrature cluster count is not an integer."""


class InfeasibleContourError(FoxFadeError):
    """No contour placement separates the pole families of a spec."""


class QuadratureError(FoxFadeError):
    """An adaptive quadrature failed to reach its tolerance."""


class NumericalFailure(FoxFadeError):
    """A contour evaluation failed its accuracy checks.

    ``diagnostics`` holds a dict describing the failing evaluation, including
    the serialized spec when one is available.
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
