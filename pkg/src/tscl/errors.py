class TSCLError(Exception):
    """Base class for errors raised by this package."""


class DomainError(TSCLError, ValueError):
    """An argument is outside the domain of an operation."""


class UsageError(TSCLError, RuntimeError):
    """An object was driven through an invalid call sequence."""


class ConfigError(TSCLError, ValueError):
    """An experiment configuration is malformed or inconsistent."""
