"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Inconsistent parameters, grids or run configuration."""


class NumericsError(RuntimeError):
    """A solver produced non-finite values or failed to converge fatally."""
