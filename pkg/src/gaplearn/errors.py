"""Exception types shared across the package."""


class GaplearnError(Exception):
    """Base class for package-specific failures."""


class InvalidInstanceError(GaplearnError, ValueError):
    """A problem instance violates its family invariants."""


class ResourceLimitError(GaplearnError, RuntimeError):
    """An operation would exceed a configured size cap."""


class ConvergenceError(GaplearnError, RuntimeError):
    """An iterative eigensolver failed to reach the requested tolerance."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class ChecksumError(GaplearnError, RuntimeError):
    """A stored file does not match its recorded checksum or version."""


class TrainingDivergedError(GaplearnError, RuntimeError):
    """Training hit a non-finite loss; carries the history gathered so far."""

    def __init__(self, message: str, history=None):
        super().__init__(message)
        self.history = history
