"""Exception types shared across the package."""


class BetaEncError(Exception):
    """Base class for all package errors."""


class DomainError(BetaEncError, ValueError):
    """An argument lies outside an operation's mathematical domain."""


class ConfigurationError(BetaEncError, ValueError):
    """A process or run configuration violates its admissible range."""


class ResourceBudgetError(BetaEncError, RuntimeError):
    """An exact enumeration would exceed the configured budget."""


class InsufficientLengthError(ConfigurationError):
    """A bit stream is too short for the requested statistical tests."""
