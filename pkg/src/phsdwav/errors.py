"""Exception hierarchy shared across the package."""


class PhswError(Exception):
    """Base class for all package errors."""


class InvalidOrder(PhswError, ValueError):
    pass


class ConditioningFailure(PhswError, ArithmeticError):
    pass


class GeometryError(PhswError, ValueError):
    pass


class SymmetryError(PhswError, ValueError):
    pass


class CorruptStream(PhswError, ValueError):
    pass


class SearchFailure(PhswError, RuntimeError):
    """Raised when the matched-PSNR bisection cannot reach its target.

    ``achieved`` holds the closest PSNR seen and ``threshold`` the τ that gave it.
    """

    def __init__(self, message, achieved=None, threshold=None):
        super().__init__(message)
        self.achieved = achieved
        self.threshold = threshold


class ParseError(PhswError, ValueError):
    """Malformed image file. ``offset`` is the byte position of the problem."""

    def __init__(self, message, offset=0):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset
