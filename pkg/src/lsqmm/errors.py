"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class NumericError(ArithmeticError):
    """Input contains NaN or infinite values."""


class ParameterError(ValueError):
    """A parameter is outside its admissible range."""
