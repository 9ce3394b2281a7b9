"""Exception types shared across the package."""


class SegregateError(Exception):
    """Base class for all package errors."""


class DomainError(SegregateError, ValueError):
    """Argument outside the mathematical domain of a formula."""


class ParameterError(SegregateError, ValueError):
    """Invalid or inconsistent parameters."""


class ShapeError(SegregateError, ValueError):
    """Grids of two objects do not match."""


class NoCoexistence(SegregateError):
    """Temperature at or above critical: a single phase only."""


class NoDoubleWell(SegregateError):
    """The well function does not have two local minima."""


class NoInterface(SegregateError):
    """No interface profile exists (the well is not double-welled)."""


class NotApplicable(SegregateError):
    """Check is undefined for the given inputs (e.g. empty flat interval)."""


class ConfigError(SegregateError):
    """Bad run configuration."""
