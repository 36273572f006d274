"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration: bad grid sizes, parameter ranges, or run setup."""


class ConsistencyError(RuntimeError):
    """A quantity violated a numerical consistency check (e.g. spurious imaginary part)."""


class DivergenceError(RuntimeError):
    """Time stepping produced non-finite values."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
