"""Exception hierarchy shared across the package."""


class BenchError(Exception):
    """Base class for all errors raised by rtrlbench."""


class ConfigurationError(BenchError, ValueError):
    """Inconsistent task, agent or run configuration."""


class InvalidBoundsError(ConfigurationError):
    """A normalization range with lo >= hi."""


class NoDataError(BenchError, LookupError):
    """A packet buffer was read before anything was written to it."""


class CommandError(BenchError, ValueError):
    """A non-finite actuator command."""


class SensorDataError(BenchError, ValueError):
    """A raw sensor reading outside its physical domain."""


class DivergenceError(BenchError):
    """Repeated runs that were required to be identical were not."""
