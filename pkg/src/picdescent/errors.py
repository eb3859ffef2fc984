"""Exception types shared across the package.

Every error raised on purpose derives from ``PicDescentError`` so the CLI can
tell a data/usage problem (exit 2) from a crash.
"""


class PicDescentError(Exception):
    """Base class for all intentional errors."""


class DimensionMismatch(PicDescentError):
    pass


class NotAComplex(PicDescentError):
    pass


class NotPrime(PicDescentError):
    pass


class BudgetExceeded(PicDescentError):
    pass


class NotNormal(PicDescentError):
    pass


class NotCyclic(PicDescentError):
    pass


class TruncationTooSmall(PicDescentError):
    pass


class WindowExceedsTruncation(PicDescentError):
    pass


class NotFree(PicDescentError):
    pass


class HypothesisFailed(PicDescentError):
    pass


class WindowUnbounded(PicDescentError):
    pass


class NonConfluentRelations(PicDescentError):
    pass


class WindowEmpty(PicDescentError):
    pass


class UnresolvableProduct(PicDescentError):
    pass


class InconsistentRules(PicDescentError):
    pass


class RuleNotClosed(PicDescentError):
    pass


class NotCharTwo(PicDescentError):
    pass


class MissingRow(PicDescentError):
    pass


class BoundMismatch(PicDescentError):
    pass


class ZeroShift(PicDescentError):
    pass


class UnknownGlyph(PicDescentError):
    pass


class DatasetError(PicDescentError):
    """Malformed or missing dataset file."""
