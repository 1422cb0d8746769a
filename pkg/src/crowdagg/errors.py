"""Exception types shared across the package."""


class DataError(ValueError):
    """Malformed or inconsistent input data (files, dimensions, parameters)."""


class CapacityError(DataError):
    """An operation would require a 2^C table for too many labels."""
