"""Exception types raised by blbvs."""


class BlbvsError(Exception):
    """Base class for all errors raised by this package."""


class DataError(BlbvsError, ValueError):
    """Input data violates a structural requirement."""


class DimensionMismatch(DataError):
    pass


class BadResponse(DataError):
    pass


class EmptyGroup(DataError):
    pass


class OverlappingGroups(DataError):
    pass


class GammaOutOfRange(BlbvsError, ValueError):
    pass


class NotEnoughRows(DataError):
    pass


class ZeroWeightTotal(DataError):
    pass


class FoldTooSmall(DataError):
    pass


class LengthMismatch(BlbvsError, ValueError):
    pass


class ZeroTruthTrace(BlbvsError, ValueError):
    pass


class GroupCountMismatch(BlbvsError, ValueError):
    pass


class MissingColumn(DataError):
    pass


class UnknownLevel(DataError):
    pass


class NonNumericContinuous(DataError):
    pass


class EmptyFile(DataError):
    pass


class MissingValue(DataError):
    """A cell is empty or holds a missing-value marker."""
