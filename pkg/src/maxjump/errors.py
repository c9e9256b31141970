"""Exception hierarchy shared across the package."""


class MaxJumpError(Exception):
    """Base class for all package errors."""


class AlgebraMismatch(MaxJumpError, TypeError):
    pass


class DimensionMismatch(MaxJumpError, ValueError):
    pass


class Divergent(MaxJumpError, ArithmeticError):
    """The Kleene closure of a matrix with max cycle mean >= 1 is unbounded."""


class NotStochastic(MaxJumpError, ValueError):
    pass


class Infeasible(MaxJumpError):
    """No deterministic certificate exists at the requested margin."""

    def __init__(self, message, cycle_mean=None):
        super().__init__(message)
        self.cycle_mean = cycle_mean


class CertificateRejected(MaxJumpError):
    """A candidate certificate failed verification.

    ``index`` is the offending state index (deterministic case) or the
    1-based worst mode (stochastic case); ``value`` is the slack or delta
    that violated the bound.
    """

    def __init__(self, message, index, value, deltas=None):
        super().__init__(message)
        self.index = index
        self.value = value
        self.deltas = deltas


class PathExplosion(MaxJumpError):
    def __init__(self, message, k0=None):
        super().__init__(message)
        self.k0 = k0


class NotFound(MaxJumpError):
    """Search failed. This is not evidence of instability."""

    def __init__(self, message, best_objective=None):
        super().__init__(message)
        self.best_objective = best_objective


class DegenerateData(MaxJumpError, ValueError):
    pass


class ZeroState(MaxJumpError, ValueError):
    pass
