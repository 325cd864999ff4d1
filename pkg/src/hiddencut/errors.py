"""Exception types shared across the package."""


class HiddenCutError(ValueError):
    """Base class for all errors raised by this package."""


class DimensionError(HiddenCutError):
    """Mismatched lengths, invalid qubit indices, or non-power-of-two tables."""


class CapacityError(HiddenCutError):
    """A brute-force or dense-simulation size cap was exceeded."""


class DomainError(HiddenCutError):
    """A scalar argument is outside its mathematically valid range."""


class DegeneracyError(HiddenCutError):
    """An operation produced a zero vector where a state was required."""


class ConsistencyError(HiddenCutError):
    """Numerical output violates an exact identity beyond round-off tolerance."""
