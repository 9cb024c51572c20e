"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit with 1,
invariant violations (integration aborts, undefined frames, schedule range
violations) exit with 2.
"""


class ConfigError(Exception):
    """Raised when a run configuration is structurally invalid."""


class InvariantViolation(RuntimeError):
    """Base class for runtime failures of a physical or numerical invariant."""


class IntegrationError(InvariantViolation):
    """Integrator abort: singular derivative solve, vanishing denominator,
    or norm drift beyond the allowed bound."""


class FrameError(InvariantViolation):
    """Rotating-frame angle undefined at an interior grid point."""


class ScheduleRangeError(InvariantViolation):
    """Exported hardware schedule violates the allowed longitudinal range."""

    def __init__(self, message: str, offending=None):
        super().__init__(message)
        self.offending = list(offending) if offending is not None else []
