"""Exception types raised across the package."""

from __future__ import annotations


class TlsQleError(Exception):
    """Base class for all domain errors."""


class ParameterError(TlsQleError, ValueError):
    """Invalid physical parameters."""


class NonPositiveKappa(ParameterError):
    pass


class NegativeRate(ParameterError):
    pass


class NonFinite(ParameterError):
    pass


class RootRefinementFailed(TlsQleError):
    pass


class SingularResponse(TlsQleError):
    """The linear response determinant vanishes (parametric instability)."""


class NoPeak(TlsQleError):
    pass


class UnresolvedPeak(TlsQleError):
    pass


class UnstableSteadyState(TlsQleError):
    pass


class StepTooLarge(TlsQleError, ValueError):
    pass


class TooFewSamples(TlsQleError, ValueError):
    pass


class Divergence(TlsQleError):
    """Raised when a semiclassical trajectory runs away.

    Attributes
    ----------
    time:
        Simulation time at which the first trajectory crossed the bound.
    """

    def __init__(self, message: str, time: float = float("nan")):
        super().__init__(message)
        self.time = time


class InvalidJ(TlsQleError, ValueError):
    pass


class TooLarge(TlsQleError, ValueError):
    pass


class SubspaceTooLarge(TlsQleError, ValueError):
    pass


class ParseError(TlsQleError, ValueError):
    pass


class ValidationError(TlsQleError, ValueError):
    """Config parsed but the parameters are physically invalid."""

    def __init__(self, message: str, cause: ParameterError | None = None):
        super().__init__(message)
        self.cause = cause
