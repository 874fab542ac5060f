"""Exception hierarchy shared across the package."""


class TBControlError(Exception):
    """Base class for all errors raised by tbctl."""


class InvalidInputError(TBControlError, ValueError):
    """Non-finite or otherwise malformed input to a numerical routine."""


class InvalidParametersError(TBControlError, ValueError):
    """Parameter set violating a range or positivity constraint."""


class IntegrationError(TBControlError, ArithmeticError):
    """A Runge-Kutta pass produced a non-finite value."""

    def __init__(self, message, step_index):
        super().__init__(message)
        self.step_index = step_index


class ConvergenceError(TBControlError, RuntimeError):
    """An iterative routine stopped before meeting its tolerance.

    ``best`` carries whatever the routine had when it gave up (the last
    iterate, or the best state found) so callers can still inspect it.
    """

    def __init__(self, message, best=None, residuals=None):
        super().__init__(message)
        self.best = best
        self.residuals = residuals or {}


class UndefinedRatioError(TBControlError, ZeroDivisionError):
    """A cost-effectiveness ratio with a non-positive denominator."""


class TieError(TBControlError, ValueError):
    """Two strategies with identical effectiveness cannot be ranked."""
