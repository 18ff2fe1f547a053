"""Exception types raised by chartkit."""


class ChartkitError(Exception):
    """Base class for all chartkit errors."""


class DomainError(ChartkitError, ValueError):
    """An argument is outside the domain of an operation."""


class InvariantError(ChartkitError, ValueError):
    """A value object would violate one of its invariants."""


class FormatError(ChartkitError, ValueError):
    """Input bytes do not follow the expected file format."""


class TruncationError(FormatError):
    """A binary stream ended before the payload it announced."""

    def __init__(self, message, expected, actual, channel_index=None):
        super().__init__(message)
        self.expected = expected
        self.actual = actual
        self.channel_index = channel_index


class ParseError(FormatError):
    """A text row could not be parsed."""

    def __init__(self, message, row):
        super().__init__(message)
        self.row = row


class DatasetIOError(ChartkitError, OSError):
    """Writing to a byte sink failed; ``offset`` is the number of bytes written."""

    def __init__(self, message, offset):
        super().__init__(message)
        self.offset = offset


class ConnectivityError(ChartkitError):
    """A neighborhood graph has more than one connected component."""

    def __init__(self, message, component_sizes):
        super().__init__(message)
        self.component_sizes = tuple(component_sizes)


class ConvergenceError(ChartkitError):
    """An iterative solver hit its iteration cap."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class StageError(ChartkitError):
    """Failure inside one stage of the charting pipeline."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
