"""Exception hierarchy shared by the loaders and the scanner."""

from __future__ import annotations


class MoveScannerError(Exception):
    """Base class for every error raised by this package."""


class ParseError(MoveScannerError):
    """A module could not be loaded.

    ``trace`` lists the loader stages that were attempted, in order, when the
    error came out of the binary fallback ladder.
    """

    def __init__(
        self,
        message: str,
        line: int | None = None,
        column: int | None = None,
        trace: list[str] | None = None,
    ) -> None:
        self.message = message
        self.line = line
        self.column = column
        self.trace = list(trace or [])
        super().__init__(str(self))

    def __str__(self) -> str:
        where = ""
        if self.line is not None:
            where = f"{self.line}:{self.column or 1}: "
        text = f"{where}{self.message}"
        if self.trace:
            text += " [tried: " + " -> ".join(self.trace) + "]"
        return text


class AsmSyntaxError(ParseError):
    """Malformed text assembly."""


class ValidationError(ParseError):
    """Well-formed syntax that violates a module invariant."""


class StackDisciplineError(ValidationError):
    """Evaluation stack underflow, or a value left live across a block boundary."""

    def __init__(self, message: str, function: str = "", index: int | None = None) -> None:
        self.function = function
        self.index = index
        super().__init__(message)


class BinaryFormatError(ParseError):
    """Corrupt or truncated binary container."""


class UnsupportedChainError(ParseError):
    """Input is real chain bytecode, which this tool detects but does not decode."""

    def __init__(self, detected: str, trace: list[str] | None = None) -> None:
        self.detected = detected
        super().__init__(f"unsupported chain bytecode: {detected}", trace=trace)


class PackageError(MoveScannerError):
    """Inconsistent module set, such as two modules sharing an id."""
