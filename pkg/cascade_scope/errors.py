"""
Exception types shared across cascade_scope.

Checks that *evaluate* inequalities return records instead of raising; the
exceptions below are for inputs that cannot be processed at all.
"""


class CascadeScopeError(Exception):
    """Base class for all cascade_scope errors."""


class GridMismatchError(CascadeScopeError, ValueError):
    """Raised when fields living on different grids are combined."""


class ConfigError(CascadeScopeError, ValueError):
    """Raised when a run or analysis configuration is invalid."""


class InstabilityError(CascadeScopeError):
    """Raised when the time integration produces non-finite values."""


class SnapshotIOError(CascadeScopeError):
    """Raised when a snapshot or time-series file cannot be written or read."""


class CoveringInfeasibleError(CascadeScopeError):
    """Raised when no covering satisfies coverage within the declared (K1, K2)."""


class InsufficientDataError(CascadeScopeError):
    """Raised when a trajectory does not carry enough data for a quadrature."""


class InvariantViolation(CascadeScopeError):
    """Raised when an exact identity fails beyond its tolerance."""
