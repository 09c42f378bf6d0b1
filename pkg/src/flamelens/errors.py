"""Exception types raised across flamelens."""


class FlamelensError(Exception):
    """Base class for all library errors."""


class MalformedImage(FlamelensError):
    pass


class UnsupportedFormat(FlamelensError):
    pass


class EncodeFailure(FlamelensError):
    pass


class DimensionMismatch(FlamelensError, ValueError):
    pass


class DegenerateInput(FlamelensError, ValueError):
    pass


class TooLarge(FlamelensError, ValueError):
    pass


class LengthMismatch(FlamelensError, ValueError):
    pass


class WrongCount(FlamelensError, ValueError):
    pass


class OutOfRangeChannel(FlamelensError, ValueError):
    pass


class ParseError(FlamelensError, ValueError):
    """A matrix, config or manifest file could not be parsed."""
