"""Exception types shared across the toolkit."""


class DataError(ValueError):
    """Malformed or unusable input data."""


class PreconditionError(ValueError):
    """Input violates a requirement of a method, e.g. a class with a single sample."""
