"""Exception hierarchy.

Every error carries a stable ``code`` (the class name) so the CLI can emit a
structured message without string matching.
"""


class CsaucError(Exception):
    """Base class for all toolkit errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class ValidationError(CsaucError, ValueError):
    """A raw record violates a Sample invariant."""

    def __init__(self, field, value, message=None):
        self.field = field
        self.value = value
        super().__init__(message or f"invalid {field}: {value!r}")


class NonBinaryLabel(ValidationError):
    pass


class NonPositiveBid(ValidationError):
    pass


class PctrOutOfRange(ValidationError):
    pass


class NonFiniteValue(ValidationError):
    pass


class InputFileNotFound(CsaucError, FileNotFoundError):
    code = "FileNotFound"


class MalformedHeader(CsaucError):
    pass


class RowParseError(CsaucError):
    def __init__(self, message, row=None):
        self.row = row
        super().__init__(message)


class EmptyInput(CsaucError):
    pass


class NoSamples(CsaucError):
    pass


class LevelLookupMiss(CsaucError):
    pass


class NoRankedPairs(CsaucError):
    pass


class NoPosNegPairs(CsaucError):
    pass


class ZeroPredictedClicks(CsaucError, ZeroDivisionError):
    pass


class ZeroPredictedRevenue(CsaucError, ZeroDivisionError):
    pass


class MissingGroupKey(CsaucError):
    pass


class AllGroupsSkipped(CsaucError):
    pass


class InputTooLarge(CsaucError):
    pass


class InvalidParameter(CsaucError, ValueError):
    pass
