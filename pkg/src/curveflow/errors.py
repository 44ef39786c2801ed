"""Exception types shared across the package."""


class FlowError(Exception):
    """Base class for curveflow errors."""


class ClosureViolation(FlowError):
    """A radius profile carries first-harmonic content, so the curve it
    describes would not close up."""


class ConvexityViolation(FlowError):
    """The radius of curvature dropped to or below the positivity floor."""


class NumericalBlowup(FlowError):
    """A time step produced non-finite values."""


class InsufficientData(FlowError):
    """A diagnostic needs more usable samples than are available."""


class ConfigError(FlowError):
    """Malformed run configuration; carries the offending key."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
