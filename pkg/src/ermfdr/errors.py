"""Exception types raised by the solver stack."""


class FdrError(Exception):
    """Base class for all package errors."""


class UnknownDivergence(FdrError, ValueError):
    pass


class NotStrictlyConvex(FdrError, ValueError):
    """The requested generator is not strictly convex or not differentiable."""


class DomainError(FdrError, ValueError):
    pass


class OutOfDomain(DomainError):
    """A conjugate argument fell outside the open interval ``dom_J``.

    ``index`` is the first offending atom (or array position) when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class PositivityViolated(FdrError, ValueError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NotAProbability(FdrError, ValueError):
    pass


class InfiniteDivergence(FdrError, ValueError):
    pass


class NotAbsolutelyContinuous(FdrError, ValueError):
    pass


class Infeasible(FdrError):
    """No normalizing constant exists for this regularization factor."""

    def __init__(self, lam, message=None):
        super().__init__(message or f"lambda={lam!r} is outside the feasible set")
        self.lam = lam


class EmptyFeasibleSet(FdrError):
    pass


class NotConverged(FdrError):
    pass


class StaleBeta(FdrError, ValueError):
    """The supplied normalization constant does not normalize the posterior."""


class NotApplicable(FdrError):
    pass


class TransformInfeasible(FdrError):
    pass
