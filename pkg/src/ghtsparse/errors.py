"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Operands have incompatible shapes for the requested operation."""


class NumericError(ArithmeticError):
    """A numerical routine failed, e.g. a Cholesky pivot was not positive."""
