"""Exception hierarchy shared by every fplab module."""


class FPLabError(Exception):
    """Base class for all errors raised by fplab."""


class InvalidArgument(FPLabError, ValueError):
    pass


class RangeError(FPLabError, IndexError):
    """An index or argument falls outside a precomputed table."""


class ResourceError(FPLabError, MemoryError):
    """A requested computation exceeds a memory or enumeration budget."""


class NumericError(FPLabError, ArithmeticError):
    """A numerical routine failed to converge."""


class DegenerateFitError(FPLabError, ValueError):
    """Too few usable points survive for a log-log regression."""
