"""Exception and warning types shared across the package."""


class ParameterDomainError(ValueError):
    """Raised when family or operator parameters fall outside their domain."""


class IndexBeyondSupportError(IndexError):
    """Raised when a polynomial degree exceeds the finite support cutoff."""


class NonPositiveCoefficientError(ValueError):
    """Raised when an off-diagonal recurrence coefficient a_m <= 0 is met."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative method did not converge.

    ``diagnostics`` holds whatever the method knew when it gave up
    (iteration counts, last residuals, last convergents).
    """

    def __init__(self, msg, **diagnostics):
        super().__init__(msg)
        self.diagnostics = diagnostics


class DegenerateDenominatorError(ArithmeticError):
    """Raised when 1 - a0^2 p0 q0 vanishes (z too close to the spectrum)."""


class SingularSystemError(ArithmeticError):
    """Raised when a truncated resolvent system is numerically singular."""


class MeasureUnavailableError(LookupError):
    """Raised when neither a closed form nor a discretization is configured."""


class InstabilityWarning(RuntimeWarning):
    """Forward recurrence of a minimal solution lost accuracy."""
