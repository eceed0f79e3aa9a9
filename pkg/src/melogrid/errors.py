"""Exception hierarchy shared by all melogrid modules."""

from __future__ import annotations


class MelogridError(Exception):
    """Base class for every error raised by this package."""


class InvalidConfigError(MelogridError, ValueError):
    pass


class PitchRangeError(MelogridError, ValueError):
    pass


class TokenLookupError(MelogridError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class MalformedSequenceError(MelogridError, ValueError):
    def __init__(self, message: str, index: int | None = None):
        if index is not None:
            message = f"token {index}: {message}"
        super().__init__(message)
        self.index = index


class UndefinedMetricError(MelogridError, ValueError):
    pass


class DegenerateDistributionError(MelogridError, ValueError):
    pass


class InsufficientDataError(MelogridError, ValueError):
    pass


class MidiParseError(MelogridError, ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"byte {offset}: {message}")
        self.offset = offset


class UnsupportedFormatError(MelogridError, ValueError):
    pass


class RecordError(MelogridError, ValueError):
    """One or more records in a line-oriented file failed to parse.

    ``diagnostics`` holds ``(line_number, message)`` pairs, 1-indexed.
    """

    def __init__(self, path, diagnostics: list[tuple[int, str]]):
        self.path = path
        self.diagnostics = list(diagnostics)
        lines = "; ".join(f"line {n}: {msg}" for n, msg in self.diagnostics[:5])
        more = len(self.diagnostics) - 5
        if more > 0:
            lines += f"; ... ({more} more)"
        super().__init__(f"{path}: {lines}")
