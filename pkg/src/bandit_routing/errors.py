"""Exception types raised across the package."""


class RoutingError(Exception):
    """Base class for all errors raised by bandit_routing."""


class CycleDetected(RoutingError):
    pass


class DisconnectedLink(RoutingError):
    pass


class NoPath(RoutingError):
    pass


class NoSecondPath(RoutingError):
    pass


class CapExceeded(RoutingError):
    """Raised when an exhaustive routine would exceed its path-count cap."""

    def __init__(self, count, cap):
        super().__init__(f"path count {count} exceeds cap {cap}")
        self.count = count
        self.cap = cap


class SingularMatrix(RoutingError):
    pass


class NotIdentifiable(RoutingError):
    pass


class PathMismatch(RoutingError):
    pass


class DegenerateInstance(RoutingError):
    pass


class BudgetExceeded(RoutingError):
    pass
