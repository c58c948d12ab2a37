"""Exception types shared across the package.

Every error derives from :class:`AblkitError` (itself a ``ValueError``) so
callers can catch the whole family in one place.
"""


class AblkitError(ValueError):
    """Base class for all domain errors raised by ablkit."""


class ZeroVector(AblkitError):
    pass


class DimensionMismatch(AblkitError):
    pass


class InvalidProjector(AblkitError):
    pass


class InvalidPVM(AblkitError):
    pass


class UndefinedConditioning(AblkitError):
    """The ABL denominator vanishes: the post-selection is impossible."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ConsistencyError(AblkitError):
    """An internal numerical check failed by more than round-off."""


class NotExclusive(AblkitError):
    pass


class InvalidN(AblkitError):
    pass


class OutOfRange(AblkitError):
    pass


class LengthMismatch(AblkitError):
    pass


class EmptyFeasibleSet(AblkitError):
    pass


class NoAcceptedTrials(AblkitError):
    pass


class ParseError(AblkitError):
    pass


class ValidationError(AblkitError):
    pass
