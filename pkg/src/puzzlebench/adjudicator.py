"""Move-by-move adjudication of candidate traces."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .errors import KindMismatch, ParseError, Reason
from .puzzles import PuzzleInstance, simulator
from .traces import Trace, parse_trace


class Status(str, Enum):
    SOLVED = "Solved"
    ILLEGAL_MOVE = "IllegalMove"
    NOT_SOLVED = "NotSolved"
    PARSE_ERROR = "ParseError"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class AdjudicationResult:
    status: Status
    valid_prefix_len: int
    moves_total: int
    first_failure_index: Optional[int] = None
    failure_reason: Optional[Reason] = None
    detail: str = ""

    @property
    def solved(self) -> bool:
        return self.status is Status.SOLVED

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "first_failure_index": self.first_failure_index,
            "failure_reason": None if self.failure_reason is None else self.failure_reason.value,
            "valid_prefix_len": self.valid_prefix_len,
            "moves_total": self.moves_total,
        }

    def summary(self) -> str:
        parts = [f"status={self.status.value}", f"valid_prefix={self.valid_prefix_len}/{self.moves_total}"]
        if self.first_failure_index is not None:
            parts.append(f"first_failure_index={self.first_failure_index}")
        if self.failure_reason is not None:
            parts.append(f"reason={self.failure_reason.value}")
        if self.detail:
            parts.append(f"detail={self.detail!r}")
        return " ".join(parts)


def adjudicate(instance: PuzzleInstance, trace: Trace) -> AdjudicationResult:
    """Replay ``trace`` from the initial state.

    Stops at the first illegal move, or as soon as a prefix reaches the goal
    (any excess moves are not examined and the trace counts as solved).
    """
    if trace.kind is not instance.kind:
        raise KindMismatch(f"{trace.kind.value} trace for a {instance.kind.value} instance")
    total = len(trace.moves)
    sim = simulator(instance)
    if sim.is_goal():
        return AdjudicationResult(Status.SOLVED, total, total)
    check, play, done = sim.check, sim.play, sim.is_goal
    for i, move in enumerate(trace.moves):
        problem = check(move)
        if problem is not None:
            reason, detail = problem
            return AdjudicationResult(Status.ILLEGAL_MOVE, i, total, i, reason, detail)
        play(move)
        if done():
            return AdjudicationResult(Status.SOLVED, total, total)
    return AdjudicationResult(Status.NOT_SOLVED, total, total)


def adjudicate_text(instance: PuzzleInstance, text: str) -> AdjudicationResult:
    """Whole-answer adjudication; unparseable answers get ParseError status."""
    try:
        trace = parse_trace(instance.kind, text)
    except ParseError as exc:
        return AdjudicationResult(Status.PARSE_ERROR, 0, 0, detail=str(exc))
    return adjudicate(instance, trace)


@dataclass(frozen=True)
class Finding:
    start: int
    end: int
    result: AdjudicationResult


@dataclass(frozen=True)
class SolutionScan:
    findings: tuple

    @property
    def earliest_solved(self) -> Optional[int]:
        for i, finding in enumerate(self.findings):
            if finding.result.solved:
                return i
        return None


_OPEN = re.compile(r"\[[ \t\n\r\f\v]*\[")
_BRACKETS = re.compile(r'[\[\]"]')


def _balanced_end(text: str, start: int) -> Optional[int]:
    depth = 0
    quoted = False
    for m in _BRACKETS.finditer(text, start):
        ch = m.group()
        if ch == '"':
            quoted = not quoted
        elif quoted:
            continue
        elif ch == "[":
            depth += 1
        else:
            depth -= 1
            if depth == 0:
                return m.end()
    return None


def scan_text_for_solutions(instance: PuzzleInstance, text: str) -> SolutionScan:
    """Find and adjudicate every candidate trace embedded in free text.

    Candidates start at ``[[`` and end where brackets balance; spans are
    character offsets into ``text``. Regions that do not parse are skipped.
    """
    findings = []
    pos = 0
    while True:
        m = _OPEN.search(text, pos)
        if m is None:
            break
        start = m.start()
        end = _balanced_end(text, start)
        if end is None:
            pos = start + 1
            continue
        try:
            trace = parse_trace(instance.kind, text[start:end])
        except ParseError:
            pos = start + 1
            continue
        findings.append(Finding(start, end, adjudicate(instance, trace)))
        pos = end
    return SolutionScan(tuple(findings))


def episode_metrics(result: AdjudicationResult) -> dict:
    return {
        "accuracy": 1.0 if result.solved else 0.0,
        "valid_prefix_fraction": result.valid_prefix_len / max(1, result.moves_total),
    }
