class DataError(ValueError):
    """Input data cannot be parsed or violates a data contract."""


class NumericalError(RuntimeError):
    """A numerical stage produced no usable result."""
