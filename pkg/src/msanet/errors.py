"""Exception types raised across the package."""


class ParameterError(ValueError):
    """A parameter violates one of its invariants."""

    def __init__(self, field, message):
        super().__init__(message)
        self.field = field


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class WindowError(ValueError):
    """A design threshold lies outside its meaningful window."""


class BracketError(ValueError):
    """Root bracket endpoints do not straddle a sign change."""


class ConvergenceError(RuntimeError):
    """An iterative solver ran out of iterations."""


class EmptyInput(ValueError):
    """An estimator received no records."""


class NoDeliveredPackets(ValueError):
    """No packet was delivered, so delay is undefined."""


class DegenerateVariance(ValueError):
    """A series passed to a correlation estimator is constant."""
