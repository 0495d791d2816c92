"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Malformed quantum numbers, shapes, or parameters."""


class CutoffTooSmallError(InvalidInputError):
    """The Fock cutoff cannot represent the requested coherent state."""

    def __init__(self, message, deficit=None):
        super().__init__(message)
        self.deficit = deficit


class NoFinitePeriodError(ValueError):
    """Frequencies are not commensurate, so no common period exists."""


class IntegrationDivergedError(RuntimeError):
    """A density-matrix invariant broke during time stepping."""

    def __init__(self, message, time):
        super().__init__(f"{message} (t = {time:.6g})")
        self.time = time


class InvariantViolation(RuntimeError):
    """A computed quantity left its physically allowed range."""
