"""Reference solution generators."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from math import comb
from typing import Union

from .errors import InvalidParameter, Unsupported
from .puzzles import (BlocksMove, CheckerMove, HanoiMove, PuzzleInstance, PuzzleKind, RiverMove,
                      apply_move, initial_state, is_goal, legal_moves, state_key)
from .traces import Trace

HANOI_CAP = 25
CHECKER_CAP = 1000
BLOCKS_EXACT_CAP = 8
DEFAULT_MAX_STATES = 2_000_000


@dataclass(frozen=True)
class Solution:
    trace: Trace
    optimal: bool


@dataclass(frozen=True)
class Unsolvable:
    states_explored: int


@dataclass(frozen=True)
class LimitExceeded:
    states_explored: int


SolveOutcome = Union[Solution, Unsolvable, LimitExceeded]


class BlocksStrategy(str, Enum):
    EXACT = "exact"
    HEURISTIC = "heuristic"


def solve_hanoi(n: int, cap: int = HANOI_CAP) -> Trace:
    """Classic recursive schedule moving n disks from peg 0 to peg 2."""
    if not 1 <= n <= cap:
        raise InvalidParameter(f"hanoi n must be in 1..{cap}, got {n}")
    out: list[HanoiMove] = []
    append = out.append

    def rec(m: int, src: int, dst: int, aux: int) -> None:
        if m == 1:
            append(HanoiMove(1, src, dst))
            return
        rec(m - 1, src, aux, dst)
        append(HanoiMove(m, src, dst))
        rec(m - 1, aux, dst, src)

    rec(n, 0, 2, 1)
    return Trace(PuzzleKind.HANOI, out)


def solve_checker(n: int) -> Trace:
    """Minimum (n+1)^2 - 1 move solution.

    Colours alternate in runs of length 1, 2, .., n, n, n, .., 2, 1 starting
    with Red; inside a run the moving checker jumps when it can and slides
    otherwise.
    """
    if not 1 <= n <= CHECKER_CAP:
        raise InvalidParameter(f"checker n must be in 1..{CHECKER_CAP}, got {n}")
    cells = ["R"] * n + ["_"] + ["B"] * n
    empty = n
    runs = list(range(1, n + 1)) + [n] + list(range(n, 0, -1))
    out: list[CheckerMove] = []
    for i, run in enumerate(runs):
        colour, other, step = ("R", "B", 1) if i % 2 == 0 else ("B", "R", -1)
        for _ in range(run):
            jump_from = empty - 2 * step
            slide_from = empty - step
            if 0 <= jump_from < len(cells) and cells[jump_from] == colour and cells[slide_from] == other:
                src = jump_from
            else:
                src = slide_from
            assert cells[src] == colour, "checker schedule broke down"
            out.append(CheckerMove(src, empty))
            cells[empty], cells[src] = colour, "_"
            empty = src
    return Trace(PuzzleKind.CHECKER, out)


def solve_bfs(instance: PuzzleInstance, max_states: int = DEFAULT_MAX_STATES) -> SolveOutcome:
    """Shortest solution by breadth-first search.

    Successors are expanded in canonical move order and the first path found
    is kept, so results are reproducible. ``max_states`` bounds expansions.
    """
    if max_states < 1:
        raise InvalidParameter("max_states must be >= 1")
    start = initial_state(instance)
    if is_goal(instance, start):
        return Solution(Trace(instance.kind, ()), optimal=True)
    start_key = state_key(instance, start)
    parent: dict = {start_key: None}
    frontier = deque([start])
    expanded = 0
    while frontier:
        if expanded >= max_states:
            return LimitExceeded(len(parent))
        state = frontier.popleft()
        expanded += 1
        here = state_key(instance, state)
        for move in legal_moves(instance, state):
            nxt = apply_move(instance, state, move)
            key = state_key(instance, nxt)
            if key in parent:
                continue
            parent[key] = (here, move)
            if is_goal(instance, nxt):
                return Solution(_path(parent, key, instance.kind), optimal=True)
            frontier.append(nxt)
    return Unsolvable(len(parent))


def _path(parent: dict, key, kind: PuzzleKind) -> Trace:
    moves = []
    while parent[key] is not None:
        key, move = parent[key]
        moves.append(move)
    moves.reverse()
    return Trace(kind, moves)


def solve_river_constructive(n: int, k: int) -> Solution:
    """Couple-escort schedule for boats holding at least four people.

    Each forward trip carries ``k // 2`` whole couples and one couple rows
    back, so every bank and every boat load consists of complete couples.
    Trace length is linear in n.
    """
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    if k < 4:
        raise Unsupported(n, k, "needs k >= 4")
    per_trip = k // 2
    waiting = list(range(1, n + 1))
    out: list[RiverMove] = []

    def couples(idx):
        return RiverMove(frozenset([f"a{i}" for i in idx] + [f"A{i}" for i in idx]))

    while len(waiting) > per_trip:
        group, waiting = waiting[:per_trip], waiting[per_trip:]
        out.append(couples(group))
        escort = group[-1]
        out.append(couples([escort]))
        waiting.insert(0, escort)
    out.append(couples(waiting))
    return Solution(Trace(PuzzleKind.RIVER, out), optimal=False)


def solve_blocks(instance: PuzzleInstance, strategy: Union[BlocksStrategy, str] = BlocksStrategy.HEURISTIC,
                 max_states: int = DEFAULT_MAX_STATES) -> SolveOutcome:
    if instance.kind is not PuzzleKind.BLOCKS:
        raise InvalidParameter(f"not a blocks instance: {instance.kind.value}")
    strategy = BlocksStrategy(strategy)
    if strategy is BlocksStrategy.EXACT:
        if instance.n > BLOCKS_EXACT_CAP:
            return LimitExceeded(0)
        return solve_bfs(instance, max_states)
    return Solution(_blocks_heuristic(instance), optimal=False)


def _blocks_heuristic(instance: PuzzleInstance) -> Trace:
    # A block is settled when it and everything beneath it already match the
    # bottom of some goal stack. Unsettled blocks go to free table positions,
    # then goal stacks are built bottom-up: at most two moves per block.
    below = {}
    for stack in instance.blocks_goal:
        for i, block in enumerate(stack):
            below[block] = stack[i - 1] if i else None
    stacks = [list(s) for s in instance.blocks_initial]
    out: list[BlocksMove] = []

    def move(src: int, dst: int) -> None:
        stacks[dst].append(stacks[src].pop())
        out.append(BlocksMove(src, dst))

    for idx in range(len(stacks)):
        stack = stacks[idx]
        settled = 0
        while settled < len(stack) and below[stack[settled]] == (stack[settled - 1] if settled else None):
            settled += 1
        while len(stack) > max(settled, 1):
            move(idx, stacks.index([]))

    pos = {b: i for i, s in enumerate(stacks) for b in s}
    for goal_stack in instance.blocks_goal:
        for block, base in zip(goal_stack[1:], goal_stack):
            here = stacks[pos[block]]
            at = here.index(block)
            if at and here[at - 1] == base:
                continue
            src, dst = pos[block], pos[base]
            move(src, dst)
            pos[block] = dst
    return Trace(PuzzleKind.BLOCKS, out)


def estimated_state_count(instance: PuzzleInstance) -> int:
    """Crude upper bound on the raw state space, used to judge BFS feasibility."""
    n = instance.n
    if instance.kind is PuzzleKind.HANOI:
        return 3 ** n
    if instance.kind is PuzzleKind.CHECKER:
        return (2 * n + 1) * comb(2 * n, n)
    if instance.kind is PuzzleKind.RIVER:
        return 2 ** (2 * n + 1)
    total = 1
    for i in range(1, n + 1):
        total *= 2 * i  # loose bound on ordered stack arrangements
    return total


@lru_cache(maxsize=256)
def reference_solution(instance: PuzzleInstance, max_states: int = 1_000_000) -> SolveOutcome:
    """The solution an idealised solver would hand in for ``instance``."""
    kind = instance.kind
    if kind is PuzzleKind.HANOI:
        return Solution(solve_hanoi(instance.n, cap=max(HANOI_CAP, instance.n)), optimal=True)
    if kind is PuzzleKind.CHECKER:
        return Solution(solve_checker(instance.n), optimal=True)
    if kind is PuzzleKind.RIVER:
        if instance.k >= 4:
            return solve_river_constructive(instance.n, instance.k)
        return solve_bfs(instance, max_states)
    return solve_blocks(instance, BlocksStrategy.HEURISTIC)

