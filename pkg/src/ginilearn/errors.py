"""Exception types shared across the package."""


class GinilearnError(Exception):
    """Base class for all errors raised by this package."""


class IngestError(GinilearnError):
    """Raised when a CSV file cannot be parsed into a data matrix."""


class ConfigError(GinilearnError):
    """Raised for invalid parameters: bad metric strings, out-of-range
    hyper-parameters, empty grids, incompatible option combinations."""


class DomainError(GinilearnError):
    """Raised when inputs violate a mathematical precondition: mismatched
    vector lengths, empty columns, NaN values, out-of-range labels."""
