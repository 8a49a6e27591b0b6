"""Exception types shared across the package."""


class PinchestError(Exception):
    """Base class for package-specific failures."""


class ConfigError(PinchestError):
    """Bad configuration file, key, or override value."""


class SingularSystemError(PinchestError):
    """Observation matrix is rank deficient; carries the offending singular value."""

    def __init__(self, smallest_singular_value, message=None):
        self.smallest_singular_value = float(smallest_singular_value)
        if message is None:
            message = (
                "observation matrix is singular "
                f"(smallest singular value {self.smallest_singular_value:.3e})"
            )
        super().__init__(message)
