"""Exception types shared across the package."""


class ReachError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(ReachError):
    """A configuration value violates its contract."""


class ShapeError(ReachError):
    """Array dimensions do not line up."""


class DivergenceError(ReachError):
    """Training produced non-finite values."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class CheckpointError(ReachError):
    """A checkpoint file is missing, corrupt, or has the wrong version."""
