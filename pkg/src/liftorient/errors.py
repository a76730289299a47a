class LiftOrientError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(LiftOrientError, ValueError):
    """An argument is outside the domain of the operation."""


class ResourceError(LiftOrientError, RuntimeError):
    """A finite search budget (horizon, width, radius, rejection count) ran out.

    The message names the parameter to raise.
    """

    def __init__(self, message: str, parameter: str | None = None):
        super().__init__(message)
        self.parameter = parameter


class InvariantViolation(LiftOrientError, RuntimeError):
    """A property guaranteed by theory failed on a concrete run."""
