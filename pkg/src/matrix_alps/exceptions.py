"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised for malformed arguments: bad shapes, non-finite entries, bad specs."""


class InvalidRankError(InvalidInputError):
    """Raised when a requested rank exceeds ``min(m, n)`` or is not positive."""


class DegenerateError(ValueError):
    """Raised when a diagnostic has a vanishing denominator."""


class StationaryPoint(Exception):
    """The projected gradient vanished; the caller should stop iterating."""


class SolverDiverged(RuntimeError):
    """A solver iterate became non-finite or the data error blew up."""

    def __init__(self, iteration, message=None):
        self.iteration = iteration
        super().__init__(message or f"solver diverged at iteration {iteration}")
