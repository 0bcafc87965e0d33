"""Exception hierarchy.

Input problems derive from :class:`ValidationError` (CLI exit code 2); numerical
and construction failures derive from :class:`NumericalError` (exit code 3).
Requests outside a construction's domain raise :class:`DomainError`.
"""


class RiemannError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(RiemannError, ValueError):
    pass


class PositivityViolation(ValidationError):
    """[E]^0 > 0: the initial density 1 - [E]^0 delta(x) would be negative."""


class DegenerateData(ValidationError):
    """Both jumps vanish, or an input is not finite."""


class DomainError(RiemannError, ValueError):
    pass


class OutsidePhase(DomainError):
    pass


class AmplitudeExceeded(DomainError):
    pass


class OutOfRange(DomainError):
    pass


class BadSeedPoint(DomainError):
    pass


class NotSimpleWave(DomainError):
    pass


class WindowTooSmall(DomainError):
    pass


class FoldedFan(DomainError):
    """The simple-wave characteristic family has folded; no single-valued profile."""


class NumericalError(RiemannError, ArithmeticError):
    pass


class InternalInconsistency(NumericalError):
    pass


class StepFailure(NumericalError):
    pass


class MaxStepsExceeded(StepFailure):
    pass


class NoBracket(NumericalError):
    pass


class NonMonotone(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class ZeroSpeed(NumericalError):
    pass


class AmplitudeVanished(NumericalError):
    pass


class EntropyViolation(NumericalError):
    pass


class NoAdmissibleContinuation(NumericalError):
    """The shock speed reached zero and the curve cannot be continued with Q >= 0."""
