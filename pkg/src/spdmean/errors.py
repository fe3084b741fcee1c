"""Exception types raised by spdmean."""


class SpdMeanError(Exception):
    """Base class for all spdmean errors."""


class InputError(SpdMeanError, ValueError):
    """Invalid input data."""


class NotSquare(InputError):
    pass


class NotSymmetric(InputError):
    pass


class NotPositiveDefinite(InputError):
    pass


class NonFiniteEntry(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class InvalidPermutation(InputError):
    pass


class EigenFailure(SpdMeanError, ArithmeticError):
    """The symmetric eigensolver did not converge."""


class NoConvergence(SpdMeanError):
    """Karcher iteration exhausted its budget.

    The best iterate and the solver diagnostics are attached so callers
    can still record partial results.
    """

    def __init__(self, message, mean=None, diagnostics=None):
        super().__init__(message)
        self.mean = mean
        self.diagnostics = diagnostics


class SolverFailure(SpdMeanError):
    """The reference mean needed by an experiment could not be computed."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics
