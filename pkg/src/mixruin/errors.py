"""Exception hierarchy shared by all mixruin modules."""


class MixRuinError(Exception):
    """Base class for every error raised by this package."""


class InfiniteSecondMoment(MixRuinError, ValueError):
    """A variance was requested for a law without a finite second moment."""


class NoMGF(MixRuinError, ValueError):
    """The jump law has no exponential moments on the requested side."""


class OutsideConvergenceStrip(MixRuinError, ValueError):
    """The tilt parameter lies outside the strip where the kernel transform is finite."""


class NotApplicable(MixRuinError, ValueError):
    """The construction is undefined for the given parameters (e.g. zero drift)."""


class NetProfitViolated(MixRuinError, ValueError):
    """The net profit condition fails, so ruin is certain."""


class NoAdjustmentCoefficient(MixRuinError, ValueError):
    """No positive root of the exponential-moment balance was found."""


class UnsupportedJumpLaw(MixRuinError, TypeError):
    """The operation requires a different family of premium/claim size laws."""


class NoConvergence(MixRuinError, RuntimeError):
    """An iterative solver stopped above its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
