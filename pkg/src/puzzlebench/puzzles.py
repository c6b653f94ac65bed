"""The four puzzle environments as deterministic state machines.

States and moves are immutable values. Each kind has a small mutable
simulator (``_HanoiSim`` and friends) holding the rules; the pure functions
``apply_move``, ``legal_moves`` and ``is_goal`` are thin wrappers over it, and
the adjudicator drives the same simulators directly for long traces.

Conventions:

* Hanoi disks are numbered 1..N (1 is the smallest), pegs 0..2; the tower
  starts on peg 0 and must end on peg 2.
* Checker cells are a string over ``R``, ``B`` and ``_``. Red moves right,
  Blue moves left, either by sliding into the adjacent empty cell or by
  jumping a single opposite-colour checker.
* River individuals are actors ``a1..aN`` and their agents ``A1..AN``. A group
  is unsafe when it contains an actor without that actor's own agent and at
  least one other agent. The departure bank, the boat and the arrival bank are
  all checked on every crossing.
* Blocks instances have N stacks (table positions). The goal is reached when
  the non-empty stacks match the goal stacks irrespective of position.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import combinations
from typing import NamedTuple, Optional, Sequence, Union

from .errors import IllegalMove, InvalidParameter, Reason


class PuzzleKind(str, Enum):
    HANOI = "hanoi"
    CHECKER = "checker"
    RIVER = "river"
    BLOCKS = "blocks"

    @classmethod
    def parse(cls, text: Union[str, "PuzzleKind"]) -> "PuzzleKind":
        if isinstance(text, PuzzleKind):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise InvalidParameter(f"unknown puzzle kind {text!r}") from None

    def __str__(self) -> str:
        return self.value


class Bank(str, Enum):
    LEFT = "L"
    RIGHT = "R"

    @property
    def other(self) -> "Bank":
        return Bank.RIGHT if self is Bank.LEFT else Bank.LEFT


Stacks = tuple[tuple[int, ...], ...]


# -- moves -------------------------------------------------------------------

class HanoiMove(NamedTuple):
    disk: int
    src: int
    dst: int


class CheckerMove(NamedTuple):
    src: int
    dst: int


class RiverMove(NamedTuple):
    passengers: frozenset


class BlocksMove(NamedTuple):
    src: int
    dst: int


Move = Union[HanoiMove, CheckerMove, RiverMove, BlocksMove]

MOVE_TYPES = {
    PuzzleKind.HANOI: HanoiMove,
    PuzzleKind.CHECKER: CheckerMove,
    PuzzleKind.RIVER: RiverMove,
    PuzzleKind.BLOCKS: BlocksMove,
}


def river_move(*ids: str) -> RiverMove:
    return RiverMove(frozenset(ids))


def move_text(move: Move) -> str:
    """Canonical serialization of a single move (no whitespace)."""
    if isinstance(move, RiverMove):
        return "[" + ",".join(f'"{p}"' for p in sorted(move.passengers)) + "]"
    return "[" + ",".join(str(v) for v in move) + "]"


def move_kind(move: Move) -> PuzzleKind:
    for kind, typ in MOVE_TYPES.items():
        if type(move) is typ:
            return kind
    raise TypeError(f"not a move: {move!r}")


# -- states ------------------------------------------------------------------

@dataclass(frozen=True)
class HanoiState:
    pegs: Stacks


@dataclass(frozen=True)
class CheckerState:
    cells: str


@dataclass(frozen=True)
class RiverState:
    n: int
    right: frozenset
    boat: Bank = Bank.LEFT

    def side(self, ident: str) -> Bank:
        if ident not in river_ids(self.n):
            raise KeyError(ident)
        return Bank.RIGHT if ident in self.right else Bank.LEFT

    @property
    def left(self) -> frozenset:
        return frozenset(river_ids(self.n)) - self.right


@dataclass(frozen=True)
class BlocksState:
    stacks: Stacks


State = Union[HanoiState, CheckerState, RiverState, BlocksState]


# -- instances ---------------------------------------------------------------

@dataclass(frozen=True)
class PuzzleInstance:
    kind: PuzzleKind
    n: int
    k: Optional[int] = None
    blocks_initial: Optional[Stacks] = None
    blocks_goal: Optional[Stacks] = None
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        kind = PuzzleKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 1:
            raise InvalidParameter(f"n must be a positive integer, got {self.n!r}")
        if kind is PuzzleKind.RIVER:
            if self.k is None:
                raise InvalidParameter("river instances need a boat capacity k")
            if not isinstance(self.k, int) or self.k < 2:
                raise InvalidParameter(f"boat capacity k must be >= 2, got {self.k!r}")
        elif self.k is not None:
            raise InvalidParameter(f"k only applies to river instances, not {kind.value}")
        if kind is PuzzleKind.BLOCKS:
            self._init_blocks()
        elif self.blocks_initial is not None or self.blocks_goal is not None or self.seed is not None:
            raise InvalidParameter("blocks configuration given for a non-blocks instance")

    def _init_blocks(self) -> None:
        n = self.n
        if self.blocks_initial is None and self.blocks_goal is None:
            if self.seed is None:
                raise InvalidParameter("blocks instances need an explicit configuration or a seed")
            rng = random.Random(self.seed)
            initial, goal = _random_stacks(rng, n), _random_stacks(rng, n)
        elif self.blocks_initial is None or self.blocks_goal is None:
            raise InvalidParameter("blocks configuration needs both initial and goal stacks")
        else:
            initial = _normalize_stacks(self.blocks_initial, n, "initial")
            goal = _normalize_stacks(self.blocks_goal, n, "goal")
        object.__setattr__(self, "blocks_initial", initial)
        object.__setattr__(self, "blocks_goal", goal)

    def describe(self) -> str:
        if self.kind is PuzzleKind.RIVER:
            return f"river n={self.n} k={self.k}"
        if self.kind is PuzzleKind.BLOCKS:
            return f"blocks n={self.n} initial={_lists(self.blocks_initial)} goal={_lists(self.blocks_goal)}"
        return f"{self.kind.value} n={self.n}"

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind.value, "n": self.n, "k": self.k}
        if self.kind is PuzzleKind.BLOCKS:
            out["seed"] = self.seed
            out["blocks_initial"] = _lists(self.blocks_initial)
            out["blocks_goal"] = _lists(self.blocks_goal)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "PuzzleInstance":
        kind = PuzzleKind.parse(data["kind"])
        if kind is PuzzleKind.BLOCKS and data.get("blocks_initial") is not None:
            return cls(kind, data["n"], blocks_initial=_tuples(data["blocks_initial"]),
                       blocks_goal=_tuples(data["blocks_goal"]), seed=data.get("seed"))
        if kind is PuzzleKind.BLOCKS:
            return cls(kind, data["n"], seed=data.get("seed"))
        return cls(kind, data["n"], k=data.get("k"))


def _lists(stacks: Optional[Stacks]) -> Optional[list]:
    return None if stacks is None else [list(s) for s in stacks]


def _tuples(stacks: Sequence[Sequence[int]]) -> Stacks:
    return tuple(tuple(s) for s in stacks)


def _random_stacks(rng: random.Random, n: int) -> Stacks:
    order = list(range(1, n + 1))
    rng.shuffle(order)
    stacks: list[list[int]] = [[] for _ in range(n)]
    for block in order:
        stacks[rng.randrange(n)].append(block)
    return _tuples(stacks)


def _normalize_stacks(stacks: Sequence[Sequence[int]], n: int, label: str) -> Stacks:
    rows = [tuple(int(b) for b in s) for s in stacks]
    if len(rows) > n:
        raise InvalidParameter(f"{label} blocks config has {len(rows)} stacks, at most {n} allowed")
    flat = sorted(b for s in rows for b in s)
    if flat != list(range(1, n + 1)):
        raise InvalidParameter(f"{label} blocks config must partition blocks 1..{n}")
    rows += [()] * (n - len(rows))
    return tuple(rows)


def new_instance(kind: Union[PuzzleKind, str], n: int, k: Optional[int] = None,
                 blocks: Union[None, int, tuple] = None) -> PuzzleInstance:
    """Build a validated instance.

    ``blocks`` is either an integer seed or an ``(initial, goal)`` pair of
    stack lists; it is only meaningful for Blocks World.
    """
    kind = PuzzleKind.parse(kind)
    if kind is PuzzleKind.BLOCKS:
        if blocks is None:
            raise InvalidParameter("blocks instances need an explicit configuration or a seed")
        if isinstance(blocks, int) and not isinstance(blocks, bool):
            return PuzzleInstance(kind, n, seed=blocks)
        initial, goal = blocks
        return PuzzleInstance(kind, n, blocks_initial=_tuples(initial), blocks_goal=_tuples(goal))
    if blocks is not None:
        raise InvalidParameter("blocks configuration given for a non-blocks instance")
    return PuzzleInstance(kind, n, k=k)


# -- river helpers -----------------------------------------------------------

@lru_cache(maxsize=None)
def river_ids(n: int) -> tuple[str, ...]:
    return tuple(f"a{i}" for i in range(1, n + 1)) + tuple(f"A{i}" for i in range(1, n + 1))


@lru_cache(maxsize=None)
def _river_bits(n: int) -> dict[str, int]:
    """Actor a_i -> bit i-1, agent A_i -> bit n+i-1."""
    bits = {f"a{i}": 1 << (i - 1) for i in range(1, n + 1)}
    bits.update({f"A{i}": 1 << (n + i - 1) for i in range(1, n + 1)})
    return bits


def _mask_of(n: int, ids) -> int:
    bits = _river_bits(n)
    mask = 0
    for ident in ids:
        mask |= bits[ident]
    return mask


def _ids_of(n: int, mask: int) -> frozenset:
    return frozenset(ident for ident, bit in _river_bits(n).items() if mask & bit)


def _unsafe_pair(n: int, mask: int) -> Optional[tuple[int, int]]:
    """Return (actor, foreign agent) indices that make ``mask`` unsafe, if any."""
    full = (1 << n) - 1
    actors = mask & full
    agents = (mask >> n) & full
    alone = actors & ~agents
    if not alone or not agents:
        return None
    actor = (alone & -alone).bit_length()
    agent = (agents & -agents).bit_length()
    return actor, agent


def is_safe_group(n: int, ids) -> bool:
    return _unsafe_pair(n, _mask_of(n, ids)) is None


# -- simulators --------------------------------------------------------------

class _HanoiSim:
    def __init__(self, n: int, state: HanoiState) -> None:
        self.n = n
        self.pegs = [list(p) for p in state.pegs]

    def check(self, move: HanoiMove) -> Optional[tuple[Reason, str]]:
        disk, src, dst = move
        if src not in (0, 1, 2) or dst not in (0, 1, 2):
            return Reason.WRONG_PEG, f"pegs must be 0..2, got {src}->{dst}"
        if src == dst:
            return Reason.WRONG_PEG, f"source and target peg are both {src}"
        source = self.pegs[src]
        if not source:
            return Reason.EMPTY_SOURCE, f"peg {src} is empty"
        if source[-1] != disk:
            return Reason.WRONG_PEG, f"disk {disk} not on top of peg {src}"
        target = self.pegs[dst]
        if target and target[-1] < disk:
            return Reason.LARGER_ON_SMALLER, f"disk {disk} onto disk {target[-1]}"
        return None

    def play(self, move: HanoiMove) -> None:
        self.pegs[move[2]].append(self.pegs[move[1]].pop())

    def is_goal(self) -> bool:
        return len(self.pegs[2]) == self.n

    def freeze(self) -> HanoiState:
        return HanoiState(tuple(tuple(p) for p in self.pegs))

    def candidates(self):
        for src in range(3):
            if self.pegs[src]:
                disk = self.pegs[src][-1]
                for dst in range(3):
                    if dst != src:
                        yield HanoiMove(disk, src, dst)


class _CheckerSim:
    def __init__(self, n: int, state: CheckerState) -> None:
        self.n = n
        self.cells = list(state.cells)
        self.goal = "B" * n + "_" + "R" * n
        self.mismatch = sum(1 for a, b in zip(self.cells, self.goal) if a != b)

    def check(self, move: CheckerMove) -> Optional[tuple[Reason, str]]:
        src, dst = move
        size = len(self.cells)
        if not (0 <= src < size and 0 <= dst < size):
            return Reason.NOT_ADJACENT_OR_JUMP, f"cells must be 0..{size - 1}, got {src}->{dst}"
        piece = self.cells[src]
        if piece == "_":
            return Reason.EMPTY_SOURCE, f"cell {src} is empty"
        if self.cells[dst] != "_":
            return Reason.NOT_ADJACENT_OR_JUMP, f"cell {dst} is occupied"
        step = dst - src
        if (piece == "R" and step < 0) or (piece == "B" and step > 0):
            return Reason.WRONG_DIRECTION, f"{piece} at {src} cannot move toward {dst}"
        if abs(step) == 1:
            return None
        if abs(step) == 2:
            jumped = self.cells[(src + dst) // 2]
            if jumped not in ("_", piece):
                return None
            return Reason.NOT_ADJACENT_OR_JUMP, f"jump from {src} must pass over an opposite checker"
        return Reason.NOT_ADJACENT_OR_JUMP, f"{src}->{dst} is neither a slide nor a jump"

    def play(self, move: CheckerMove) -> None:
        src, dst = move
        cells, goal = self.cells, self.goal
        before = (cells[src] != goal[src]) + (cells[dst] != goal[dst])
        cells[dst], cells[src] = cells[src], "_"
        self.mismatch += (cells[src] != goal[src]) + (cells[dst] != goal[dst]) - before

    def is_goal(self) -> bool:
        return self.mismatch == 0

    def freeze(self) -> CheckerState:
        return CheckerState("".join(self.cells))

    def candidates(self):
        empty = self.cells.index("_")
        for src in (empty - 2, empty - 1, empty + 1, empty + 2):
            if 0 <= src < len(self.cells):
                yield CheckerMove(src, empty)


class _RiverSim:
    def __init__(self, n: int, k: int, state: RiverState) -> None:
        self.n = n
        self.k = k
        self.all = (1 << (2 * n)) - 1
        self.right = _mask_of(n, state.right)
        self.boat = state.boat

    def _bank_mask(self) -> int:
        return self.right if self.boat is Bank.RIGHT else self.all & ~self.right

    def _check_mask(self, group: int) -> Optional[tuple[Reason, str]]:
        n = self.n
        bank = self._bank_mask()
        if group & ~bank:
            return Reason.BOAT_ON_OTHER_BANK, "passenger not on the boat's bank"
        other = self.all & ~bank
        for where, mask in (("departure bank", bank & ~group), ("boat", group),
                            ("arrival bank", other | group)):
            hit = _unsafe_pair(n, mask)
            if hit:
                actor, agent = hit
                return (Reason.SAFETY_VIOLATION,
                        f"a{actor} with A{agent} without A{actor} on the {where}")
        return None

    def check(self, move: RiverMove) -> Optional[tuple[Reason, str]]:
        people = move.passengers
        if not 1 <= len(people) <= self.k:
            return Reason.OVER_CAPACITY, f"boat carries 1..{self.k}, got {len(people)}"
        bits = _river_bits(self.n)
        for ident in people:
            if ident not in bits:
                return Reason.UNKNOWN_INDIVIDUAL, f"no individual {ident!r}"
        return self._check_mask(_mask_of(self.n, people))

    def play(self, move: RiverMove) -> None:
        self.right ^= _mask_of(self.n, move.passengers)
        self.boat = self.boat.other

    def is_goal(self) -> bool:
        return self.right == self.all

    def freeze(self) -> RiverState:
        return RiverState(self.n, _ids_of(self.n, self.right), self.boat)

    def legal(self) -> list[RiverMove]:
        bits = _river_bits(self.n)
        bank = self._bank_mask()
        here = [ident for ident, bit in bits.items() if bank & bit]
        out = []
        for size in range(1, min(self.k, len(here)) + 1):
            for group in combinations(here, size):
                mask = 0
                for ident in group:
                    mask |= bits[ident]
                if self._check_mask(mask) is None:
                    out.append(RiverMove(frozenset(group)))
        return out


class _BlocksSim:
    def __init__(self, instance: PuzzleInstance, state: BlocksState) -> None:
        self.stacks = [list(s) for s in state.stacks]
        self.goal = blocks_goal_key(instance)

    def check(self, move: BlocksMove) -> Optional[tuple[Reason, str]]:
        src, dst = move
        size = len(self.stacks)
        if not (0 <= src < size and 0 <= dst < size):
            return Reason.UNKNOWN_BLOCK, f"stacks are 0..{size - 1}, got {src}->{dst}"
        if src == dst:
            return Reason.SAME_STACK, f"source and target stack are both {src}"
        if not self.stacks[src]:
            return Reason.EMPTY_STACK, f"stack {src} is empty"
        return None

    def play(self, move: BlocksMove) -> None:
        self.stacks[move[1]].append(self.stacks[move[0]].pop())

    def is_goal(self) -> bool:
        return _stacks_key(self.stacks) == self.goal

    def freeze(self) -> BlocksState:
        return BlocksState(tuple(tuple(s) for s in self.stacks))

    def candidates(self):
        for src, stack in enumerate(self.stacks):
            if stack:
                for dst in range(len(self.stacks)):
                    if dst != src:
                        yield BlocksMove(src, dst)


def _stacks_key(stacks) -> tuple:
    return tuple(sorted(tuple(s) for s in stacks if s))


def blocks_goal_key(instance: PuzzleInstance) -> tuple:
    return _stacks_key(instance.blocks_goal)


def simulator(instance: PuzzleInstance, state: Optional[State] = None):
    """Mutable rule engine positioned at ``state`` (initial state by default)."""
    if state is None:
        state = initial_state(instance)
    kind = instance.kind
    if kind is PuzzleKind.HANOI:
        return _HanoiSim(instance.n, state)
    if kind is PuzzleKind.CHECKER:
        return _CheckerSim(instance.n, state)
    if kind is PuzzleKind.RIVER:
        return _RiverSim(instance.n, instance.k, state)
    return _BlocksSim(instance, state)


# -- public operations -------------------------------------------------------

def initial_state(instance: PuzzleInstance) -> State:
    n = instance.n
    kind = instance.kind
    if kind is PuzzleKind.HANOI:
        return HanoiState((tuple(range(n, 0, -1)), (), ()))
    if kind is PuzzleKind.CHECKER:
        return CheckerState("R" * n + "_" + "B" * n)
    if kind is PuzzleKind.RIVER:
        return RiverState(n, frozenset(), Bank.LEFT)
    return BlocksState(instance.blocks_initial)


def _check_kind(instance: PuzzleInstance, move: Move) -> None:
    if type(move) is not MOVE_TYPES[instance.kind]:
        raise TypeError(f"{type(move).__name__} is not a {instance.kind.value} move")


def apply_move(instance: PuzzleInstance, state: State, move: Move) -> State:
    """Return the successor of ``state``; raise IllegalMove if the rules forbid it."""
    _check_kind(instance, move)
    sim = simulator(instance, state)
    problem = sim.check(move)
    if problem is not None:
        raise IllegalMove(*problem)
    sim.play(move)
    return sim.freeze()


def legal_moves(instance: PuzzleInstance, state: State) -> list[Move]:
    """All moves ``apply_move`` accepts, sorted by canonical serialization."""
    sim = simulator(instance, state)
    if isinstance(sim, _RiverSim):
        moves = sim.legal()
    else:
        moves = [m for m in sim.candidates() if sim.check(m) is None]
    return sorted(moves, key=move_text)


def is_goal(instance: PuzzleInstance, state: State) -> bool:
    kind = instance.kind
    if kind is PuzzleKind.HANOI:
        return len(state.pegs[2]) == instance.n
    if kind is PuzzleKind.CHECKER:
        n = instance.n
        return state.cells == "B" * n + "_" + "R" * n
    if kind is PuzzleKind.RIVER:
        return len(state.right) == 2 * instance.n
    return _stacks_key(state.stacks) == blocks_goal_key(instance)


def state_key(instance: PuzzleInstance, state: State):
    """Hashable key identifying states that behave identically.

    Blocks stacks are interchangeable table positions, so their key ignores
    stack order; every other kind uses the state value itself.
    """
    if instance.kind is PuzzleKind.BLOCKS:
        return tuple(sorted(state.stacks))
    return state


def state_to_json(state: State) -> dict:
    if isinstance(state, HanoiState):
        return {"pegs": [list(p) for p in state.pegs]}
    if isinstance(state, CheckerState):
        return {"cells": state.cells}
    if isinstance(state, RiverState):
        return {"left": sorted(state.left), "right": sorted(state.right), "boat": state.boat.value}
    return {"stacks": [list(s) for s in state.stacks]}


def check_state(instance: PuzzleInstance, state: State) -> None:
    """Assert the type invariants of ``state``; used by property tests."""
    n = instance.n
    if isinstance(state, HanoiState):
        assert len(state.pegs) == 3
        assert sorted(d for p in state.pegs for d in p) == list(range(1, n + 1))
        for peg in state.pegs:
            assert all(a > b for a, b in zip(peg, peg[1:])), peg
    elif isinstance(state, CheckerState):
        assert len(state.cells) == 2 * n + 1
        assert state.cells.count("R") == n and state.cells.count("B") == n
        assert state.cells.count("_") == 1
    elif isinstance(state, RiverState):
        assert state.right <= frozenset(river_ids(n))
        assert is_safe_group(n, state.right) and is_safe_group(n, state.left)
    else:
        assert len(state.stacks) == len(instance.blocks_initial)
        assert sorted(b for s in state.stacks for b in s) == list(range(1, n + 1))
