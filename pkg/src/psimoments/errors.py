"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, resource problems (files, memory, integer range) with 3, and
violated internal invariants with 4.
"""


class ConfigError(ValueError):
    """Bad user-supplied configuration: unknown kind, malformed rational, ..."""


class InvalidWindowError(ConfigError):
    """Window parameters outside their admissible range (h >= X, delta >= 1, ...)."""


class InvalidOrderError(ConfigError):
    """Moment order outside its admissible range, or non-integer where an
    integer is required."""


class DomainError(ConfigError):
    """Argument outside a formula's domain (gamma at x <= 0, odd k for an
    even-moment form, ...)."""


class ResourceError(RuntimeError):
    """Missing or unusable external resource: cache file, sieve coverage,
    integer range of the platform."""


class CorruptCacheError(ResourceError):
    """Persisted event file failed validation.  Carries the byte offset of
    the first offending record."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class CoverageError(ResourceError):
    """Event source does not cover the range a computation needs."""


class RangeLimitError(ResourceError):
    """Requested limit exceeds what 64-bit key arithmetic can represent."""


class InvariantError(AssertionError):
    """An internal consistency check failed; results cannot be trusted."""


class QuadratureError(RuntimeError):
    """A quadrature could not meet its requested error budget."""
