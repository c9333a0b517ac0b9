"""Exception types shared across the engine."""


class RostererError(Exception):
    """Base class for all engine errors."""


class ConfigurationError(RostererError):
    """The instance data cannot be processed as configured."""


class BuildInfeasibleError(RostererError):
    """A pre-assignment contradicts a hard constraint at model build time."""

    def __init__(self, message: str, subjects: tuple[str, ...] = ()):
        super().__init__(message)
        self.subjects = subjects


class SolverEnvironmentError(RostererError):
    """The external solver executable is missing or not runnable."""


class SolverProtocolError(RostererError):
    """The external solver produced output we cannot interpret."""

    def __init__(self, message: str, stderr: str = ""):
        super().__init__(message)
        self.stderr = stderr


class OracleSizeError(RostererError):
    """Too many free binary variables for exhaustive enumeration."""


class IntegralityError(RostererError):
    """A binary variable came back fractional beyond tolerance."""


class VersionConflictError(RostererError):
    """Optimistic concurrency check failed on a store write."""


class PublishRejectedError(RostererError):
    """A roster version with hard violations may not be published."""
