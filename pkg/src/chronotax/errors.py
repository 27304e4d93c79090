"""Exception types shared across the package."""


class ChronotaxError(Exception):
    """Base class for all package-specific failures."""


class InvalidInputError(ChronotaxError, ValueError):
    """An argument violates a documented precondition."""


class SingularityError(ChronotaxError):
    """An operation was evaluated too close to the polar-coordinate origin."""


class BlowUpError(ChronotaxError):
    """A trajectory left the divergence guard radius."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class TraceFailureError(ChronotaxError):
    """Tracing of the attracting closed curve failed to converge or close."""


class NotChronotaxicError(ChronotaxError):
    """An operation that requires chronotaxic parameters met an instant that is not."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class ConfigError(ChronotaxError, ValueError):
    """Malformed, inconsistent, or unknown run configuration."""
