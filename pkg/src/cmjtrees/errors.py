"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class RateRangeError(OverflowError):
    """A quantity cannot be represented in the working floating-point range."""


class ConfigError(ValueError):
    """Invalid run configuration or model parameter."""
