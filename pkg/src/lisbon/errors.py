"""Exception types raised by the numeric engines."""


class LisbonError(Exception):
    """Base class for all errors raised by this package."""


class NonConvergenceError(LisbonError):
    """Root iteration did not reach the requested accuracy within its cap."""


class BudgetError(LisbonError):
    """Adaptive quadrature hit ``max_nodes`` before meeting its tolerance."""


class DomainError(LisbonError):
    """A fixed contour radius does not enclose every root."""


class NearDiscriminantError(LisbonError):
    """The point is too close to the discriminant for root-based formulas."""
