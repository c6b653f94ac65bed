"""Exception hierarchy shared across the package."""

from __future__ import annotations

from enum import Enum


class Reason(str, Enum):
    """Structured codes explaining why a move was rejected."""

    WRONG_PEG = "WrongPeg"
    LARGER_ON_SMALLER = "LargerOnSmaller"
    EMPTY_SOURCE = "EmptySource"
    NOT_ADJACENT_OR_JUMP = "NotAdjacentOrJump"
    WRONG_DIRECTION = "WrongDirection"
    BOAT_ON_OTHER_BANK = "BoatOnOtherBank"
    OVER_CAPACITY = "OverCapacity"
    SAFETY_VIOLATION = "SafetyViolation"
    UNKNOWN_INDIVIDUAL = "UnknownIndividual"
    UNKNOWN_BLOCK = "UnknownBlock"
    EMPTY_STACK = "EmptyStack"
    SAME_STACK = "SameStack"

    def __str__(self) -> str:
        return self.value


class PuzzleError(Exception):
    """Base class for every error raised by puzzlebench."""


class InvalidParameter(PuzzleError, ValueError):
    pass


class KindMismatch(PuzzleError, ValueError):
    pass


class ConfigError(PuzzleError, ValueError):
    pass


class Unsupported(PuzzleError):
    def __init__(self, n: int, k: int, detail: str = "") -> None:
        self.n = n
        self.k = k
        msg = f"no constructive schedule for n={n}, k={k}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class IllegalMove(PuzzleError):
    """A move that violates the puzzle rules in the current state."""

    def __init__(self, reason: Reason, detail: str = "") -> None:
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason.value}: {detail}" if detail else reason.value)


class ParseError(PuzzleError, ValueError):
    """Malformed trace text. ``position`` is a character offset."""

    def __init__(self, position: int, expected: str) -> None:
        self.position = position
        self.expected = expected
        super().__init__(f"at offset {position}: expected {expected}")


class SchemaError(PuzzleError, ValueError):
    def __init__(self, line_no: int, detail: str) -> None:
        self.line_no = line_no
        super().__init__(f"line {line_no}: {detail}")


class BindError(PuzzleError, OSError):
    pass
