"""Exception types raised across the package."""


class GirthCountError(Exception):
    """Base class for all package errors."""


class InvalidGraph(GirthCountError, ValueError):
    pass


class InvalidParameters(GirthCountError, ValueError):
    pass


class NotATree(GirthCountError):
    """The requested ball around a node contains a cycle."""


class PreconditionViolated(GirthCountError, ValueError):
    pass


class EdgeExists(GirthCountError, ValueError):
    pass


class InfeasibleBoundary(GirthCountError, ValueError):
    pass


class TooLarge(GirthCountError):
    """Instance exceeds the configured node cap of an exact engine."""

    def __init__(self, n, cap, what="graph"):
        super().__init__(f"{what} has {n} nodes, above the cap of {cap}")
        self.n = n
        self.cap = cap


class InvalidDegree(InvalidParameters):
    pass


class AboveThreshold(InvalidParameters):
    """Activity at or above the uniqueness threshold for the degree."""


class TooFewColors(InvalidParameters):
    pass


class CertificationFailed(GirthCountError):
    """Target bound could not be certified; ``report`` holds the details."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
