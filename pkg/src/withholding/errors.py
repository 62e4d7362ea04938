"""Exception types shared across the package."""


class DomainError(ValueError):
    """Parameters outside the region where a formula or model is defined."""


class RangeError(ValueError):
    """An index or size exceeds an implementation cap."""


class NumericError(ArithmeticError):
    """An iterative numeric procedure failed to converge."""
