"""Exception types shared across the package."""


class HelmholtzLabError(Exception):
    """Base class for all errors raised by helmholtz_lab."""


class InvalidSpec(HelmholtzLabError, ValueError):
    """A nonlinearity or configuration violates its structural constraints."""


class NoSignChange(HelmholtzLabError):
    """g(r, .) has no positive root below the search cap and no closed form applies."""


class HypothesesFail(HelmholtzLabError):
    """Coefficient monotonicity or limit hypotheses are not met."""


class OutOfRange(HelmholtzLabError, ValueError):
    pass


class TooFewEvents(HelmholtzLabError):
    pass


class InsufficientRange(HelmholtzLabError):
    pass


class NotPeriodic(HelmholtzLabError):
    pass


class NoBracket(HelmholtzLabError):
    pass


class MonotonicityFail(HelmholtzLabError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class NoConvergence(HelmholtzLabError):
    pass
