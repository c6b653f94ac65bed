"""Trace values and the canonical bracket grammar.

Grammar (whitespace is any ASCII whitespace, allowed between tokens)::

    trace  := [ "moves" "=" ] "[" [ move { "," move } ] "]"
    move   := "[" int "," int [ "," int ] "]"       (Hanoi has three ints)
            | "[" id { "," id } "]"                 (River)
    id     := '"' [aA][0-9]+ '"'
    int    := -?[0-9]+

Well-formed input is first handed to ``json.loads`` which is much faster on
multi-megabyte traces; the cursor parser below is authoritative and produces
positioned errors.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import ParseError
from .puzzles import (MOVE_TYPES, BlocksMove, CheckerMove, HanoiMove, Move, PuzzleKind,
                      RiverMove, move_kind, move_text)

_WS = re.compile(r"[ \t\n\r\f\v]*")
_PREFIX = re.compile(r"[ \t\n\r\f\v]*moves[ \t\n\r\f\v]*=")
_INT = re.compile(r"-?[0-9]+")
_ID = re.compile(r'"([aA][0-9]+)"')
_ID_TEXT = re.compile(r"[aA][0-9]+\Z")

_ARITY = {PuzzleKind.HANOI: 3, PuzzleKind.CHECKER: 2, PuzzleKind.BLOCKS: 2}


@dataclass(frozen=True)
class Trace:
    kind: PuzzleKind
    moves: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", PuzzleKind.parse(self.kind))
        moves = tuple(self.moves)
        object.__setattr__(self, "moves", moves)
        typ = MOVE_TYPES[self.kind]
        for move in moves:
            if type(move) is not typ:
                raise TypeError(f"{move!r} is a {move_kind(move).value} move in a {self.kind.value} trace")

    def __len__(self) -> int:
        return len(self.moves)

    def __iter__(self) -> Iterator[Move]:
        return iter(self.moves)

    def __getitem__(self, index):
        return self.moves[index]

    def prefix(self, length: int) -> "Trace":
        return Trace(self.kind, self.moves[:length])


def format_trace(trace: Trace) -> str:
    return "[" + ",".join(map(move_text, trace.moves)) + "]"


def parse_trace(kind: Union[PuzzleKind, str], text: str) -> Trace:
    kind = PuzzleKind.parse(kind)
    moves = _fast_parse(kind, text)
    if moves is None:
        moves = _Parser(kind, text).trace()
    return Trace(kind, moves)


def _fast_parse(kind: PuzzleKind, text: str):
    if "\\" in text:
        return None
    m = _PREFIX.match(text)
    body = text[m.end():] if m else text
    try:
        data = json.loads(body)
    except (ValueError, RecursionError):
        return None
    if type(data) is not list:
        return None
    moves = []
    append = moves.append
    if kind is PuzzleKind.RIVER:
        for item in data:
            if type(item) is not list or not item:
                return None
            for ident in item:
                if type(ident) is not str or not _ID_TEXT.match(ident):
                    return None
            append(RiverMove(frozenset(item)))
        return moves
    arity = _ARITY[kind]
    ctor = MOVE_TYPES[kind]
    for item in data:
        if type(item) is not list or len(item) != arity:
            return None
        for value in item:
            if type(value) is not int:
                return None
        append(ctor(*item))
    return moves


class _Parser:
    def __init__(self, kind: PuzzleKind, text: str) -> None:
        self.kind = kind
        self.text = text
        self.pos = 0

    def _skip(self) -> None:
        self.pos = _WS.match(self.text, self.pos).end()

    def _peek(self) -> str:
        self._skip()
        return self.text[self.pos:self.pos + 1]

    def _expect(self, char: str) -> None:
        if self._peek() != char:
            raise ParseError(self.pos, repr(char))
        self.pos += 1

    def trace(self) -> list:
        m = _PREFIX.match(self.text)
        if m:
            self.pos = m.end()
        self._expect("[")
        moves = []
        if self._peek() == "]":
            self.pos += 1
        else:
            while True:
                moves.append(self._move())
                nxt = self._peek()
                if nxt == ",":
                    self.pos += 1
                elif nxt == "]":
                    self.pos += 1
                    break
                else:
                    raise ParseError(self.pos, "',' or ']'")
        self._skip()
        if self.pos != len(self.text):
            raise ParseError(self.pos, "end of input")
        return moves

    def _move(self) -> Move:
        self._expect("[")
        if self.kind is PuzzleKind.RIVER:
            ids = [self._id()]
            while self._peek() == ",":
                self.pos += 1
                ids.append(self._id())
            self._expect("]")
            return RiverMove(frozenset(ids))
        arity = _ARITY[self.kind]
        values = [self._int()]
        for _ in range(arity - 1):
            self._expect(",")
            values.append(self._int())
        self._expect("]")
        return MOVE_TYPES[self.kind](*values)

    def _int(self) -> int:
        self._skip()
        m = _INT.match(self.text, self.pos)
        if not m:
            raise ParseError(self.pos, "integer")
        self.pos = m.end()
        return int(m.group())

    def _id(self) -> str:
        self._skip()
        m = _ID.match(self.text, self.pos)
        if not m:
            raise ParseError(self.pos, 'quoted id like "a1"')
        self.pos = m.end()
        return m.group(1)


__all__ = ["Trace", "parse_trace", "format_trace", "HanoiMove", "CheckerMove", "RiverMove", "BlocksMove"]
