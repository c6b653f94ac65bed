"""Agent contract and a zoo of scripted agents.

Each archetype reproduces one way an answer can go wrong without any
reasoning deficit in the usual sense:

``perfect``         writes the reference solution.
``noisy``           slips on each move independently with probability 1 - p.
``truncating``      runs out of output tokens and stops mid-answer.
``forgetful``       only remembers its last ``window`` moves and drifts.
``giveup``          declares long problems impossible.
``fixated``         commits to a plausible heuristic and never revises it.
``selfcorrecting``  tests its heuristic with the simulator, notices the
                    failure, resets and switches to a verified algorithm.

Agents are single-episode values; behaviour depends only on the config,
its seed and the observations fed in.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from .analytics import DEFAULT_TOKEN_BUDGET, DEFAULT_TOKENS_PER_MOVE
from .errors import InvalidParameter, ParseError
from .puzzles import (BlocksMove, CheckerMove, HanoiMove, PuzzleInstance, PuzzleKind, RiverMove,
                      legal_moves, move_text, river_ids, simulator)
from .solvers import Solution, estimated_state_count, reference_solution, solve_bfs
from .toolserver import ILLEGAL_MOVE
from .traces import Trace, format_trace, parse_trace

IMPOSSIBLE_CLAIM = ("After exhaustive analysis I conclude this puzzle is IMPOSSIBLE: "
                    "no sequence of moves satisfies every constraint.")
BFS_FEASIBLE_STATES = 100_000

_CLAIM_RE = re.compile(r"\bIMPOSSIBLE\b")


class Archetype(str, Enum):
    PERFECT = "perfect"
    NOISY = "noisy"
    TRUNCATING = "truncating"
    FORGETFUL = "forgetful"
    GIVE_UP = "giveup"
    FIXATED = "fixated"
    SELF_CORRECTING = "selfcorrecting"


_PARAMS = {
    Archetype.PERFECT: (),
    Archetype.NOISY: ("p",),
    Archetype.TRUNCATING: ("token_budget", "tokens_per_move"),
    Archetype.FORGETFUL: ("window",),
    Archetype.GIVE_UP: ("threshold",),
    Archetype.FIXATED: (),
    Archetype.SELF_CORRECTING: (),
}

_ALIASES = {"budget": "token_budget", "tpm": "tokens_per_move", "w": "window", "t": "threshold"}


@dataclass(frozen=True)
class AgentConfig:
    archetype: Archetype
    p: Optional[float] = None
    token_budget: Optional[int] = None
    tokens_per_move: Optional[float] = None
    window: Optional[int] = None
    threshold: Optional[int] = None
    seed: int = 0

    def __post_init__(self) -> None:
        try:
            arch = Archetype(self.archetype)
        except ValueError:
            raise InvalidParameter(f"unknown archetype {self.archetype!r}") from None
        object.__setattr__(self, "archetype", arch)
        if arch is Archetype.TRUNCATING:
            if self.token_budget is None:
                object.__setattr__(self, "token_budget", DEFAULT_TOKEN_BUDGET)
            if self.tokens_per_move is None:
                object.__setattr__(self, "tokens_per_move", DEFAULT_TOKENS_PER_MOVE)
        allowed = set(_PARAMS[arch])
        for name in ("p", "token_budget", "tokens_per_move", "window", "threshold"):
            value = getattr(self, name)
            if value is not None and name not in allowed:
                raise InvalidParameter(f"{arch.value} agents take no {name!r} parameter")
            if value is None and name in allowed:
                raise InvalidParameter(f"{arch.value} agents need {name!r}")
        if self.p is not None and not 0 < self.p <= 1:
            raise InvalidParameter(f"p must be in (0, 1], got {self.p}")
        for name in ("token_budget", "window"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise InvalidParameter(f"{name} must be >= 1")
        if self.tokens_per_move is not None and self.tokens_per_move <= 0:
            raise InvalidParameter("tokens_per_move must be positive")
        if self.threshold is not None and self.threshold < 0:
            raise InvalidParameter("threshold must be >= 0")

    @property
    def params(self) -> dict:
        return {name: getattr(self, name) for name in _PARAMS[self.archetype]}

    @property
    def label(self) -> str:
        params = self.params
        if not params:
            return self.archetype.value
        inner = ",".join(f"{k}={v}" for k, v in params.items())
        return f"{self.archetype.value}({inner})"

    def with_seed(self, seed: int) -> "AgentConfig":
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        return {"archetype": self.archetype.value, **self.params}

    @classmethod
    def from_dict(cls, data: dict, seed: int = 0) -> "AgentConfig":
        fields = {k: v for k, v in data.items() if k != "archetype"}
        return cls(Archetype(data["archetype"]), seed=seed, **fields)

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "AgentConfig":
        """Parse ``"noisy:p=0.999"`` or ``"truncating:budget=64000,tpm=8"``."""
        name, _, rest = text.strip().partition(":")
        fields: dict = {}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, eq, value = item.partition("=")
            if not eq:
                raise InvalidParameter(f"agent parameter {item!r} is not key=value")
            key = _ALIASES.get(key.strip(), key.strip())
            if key not in ("p", "token_budget", "tokens_per_move", "window", "threshold"):
                raise InvalidParameter(f"unknown agent parameter {key!r}")
            num = float(value)
            fields[key] = int(num) if key != "p" and num.is_integer() else num
        name = name.strip().lower().replace("-", "").replace("_", "")
        return cls(name, seed=seed, **fields)


# -- protocol between agent and harness ------------------------------------

@dataclass(frozen=True)
class ToolCall:
    method: str
    params: dict


@dataclass(frozen=True)
class FinalAnswer:
    text: str


@dataclass(frozen=True)
class Resign:
    claim_text: str


AgentAction = Union[ToolCall, FinalAnswer, Resign]


@dataclass(frozen=True)
class Observation:
    """What the agent sees: the task, a tool response, or a budget stop."""

    kind: str  # "task" | "tool_result" | "budget_exhausted"
    instance: PuzzleInstance
    session_id: Optional[str] = None
    response: Optional[dict] = None
    tokens_remaining: int = 0
    tool_calls_remaining: int = 0

    def __post_init__(self) -> None:
        if self.tokens_remaining < 0 or self.tool_calls_remaining < 0:
            raise ValueError("budgets are non-negative")


def is_resignation(text: str) -> bool:
    return bool(_CLAIM_RE.search(text))


def _trace(instance: PuzzleInstance, moves) -> str:
    return format_trace(Trace(instance.kind, moves))


@lru_cache(maxsize=256)
def _bfs_plan(instance: PuzzleInstance):
    return solve_bfs(instance, BFS_FEASIBLE_STATES)


# -- scripted heuristics -----------------------------------------------------

def fixated_schedule(instance: PuzzleInstance) -> list:
    """The plausible but flawed plan a fixated solver commits to."""
    n = instance.n
    kind = instance.kind
    if kind is PuzzleKind.HANOI:
        # smallest disk round the pegs forever; never solves for n >= 2
        cycle = [(0, 2), (2, 1), (1, 0)]
        return [HanoiMove(1, *cycle[i % 3]) for i in range((1 << n) - 1)]
    if kind is PuzzleKind.RIVER:
        # agents cross first, one agent rows back alone after every trip
        waiting = [f"A{i}" for i in range(1, n + 1)] + [f"a{i}" for i in range(1, n + 1)]
        across: list[str] = []
        out = []
        while waiting:
            group, waiting = waiting[:instance.k], waiting[instance.k:]
            out.append(RiverMove(frozenset(group)))
            across += group
            if waiting:
                back = next((p for p in across if p.startswith("A")), across[0])
                across.remove(back)
                out.append(RiverMove(frozenset([back])))
                waiting.insert(0, back)
        return out
    # Checker and Blocks: greedily take the first legal move
    limit = (n + 1) ** 2 - 1 if kind is PuzzleKind.CHECKER else 2 * n
    sim = simulator(instance)
    out = []
    while len(out) < limit and not sim.is_goal():
        options = legal_moves(instance, sim.freeze())
        if not options:
            break
        sim.play(options[0])
        out.append(options[0])
    return out


def random_move(instance: PuzzleInstance, rng: np.random.Generator):
    """A uniformly drawn syntactically well-formed move for ``instance``."""
    n = instance.n
    kind = instance.kind
    if kind is PuzzleKind.HANOI:
        src = int(rng.integers(0, 3))
        return HanoiMove(int(rng.integers(1, n + 1)), src, (src + int(rng.integers(1, 3))) % 3)
    if kind is PuzzleKind.RIVER:
        people = river_ids(n)
        sizes = np.arange(1, min(instance.k, len(people)) + 1)
        weights = np.array([math.comb(len(people), int(s)) for s in sizes], dtype=float)
        size = int(rng.choice(sizes, p=weights / weights.sum()))
        chosen = rng.choice(len(people), size=size, replace=False)
        return RiverMove(frozenset(people[int(i)] for i in chosen))
    cells = 2 * n + 1 if kind is PuzzleKind.CHECKER else n
    if cells < 2:
        return BlocksMove(0, 0)
    src = int(rng.integers(0, cells))
    dst = (src + int(rng.integers(1, cells))) % cells
    return (CheckerMove if kind is PuzzleKind.CHECKER else BlocksMove)(src, dst)


# -- agents ------------------------------------------------------------------

class Agent:
    """Base agent: answers in one shot, in either mode."""

    uses_tools = False

    def __init__(self, config: AgentConfig) -> None:
        self.config = config
        self.revisions = 0

    def _reference(self, instance: PuzzleInstance) -> Optional[list]:
        outcome = reference_solution(instance)
        return list(outcome.trace.moves) if isinstance(outcome, Solution) else None

    def text_answer(self, instance: PuzzleInstance, token_budget: int = DEFAULT_TOKEN_BUDGET) -> str:
        raise NotImplementedError

    def next_action(self, observation: Observation) -> AgentAction:
        text = self.text_answer(observation.instance, observation.tokens_remaining)
        try:
            parse_trace(observation.instance.kind, text)
        except ParseError:
            if is_resignation(text):
                return Resign(text)
        return FinalAnswer(text)


class PerfectAgent(Agent):
    def text_answer(self, instance, token_budget=DEFAULT_TOKEN_BUDGET):
        moves = self._reference(instance)
        return IMPOSSIBLE_CLAIM if moves is None else _trace(instance, moves)


class NoisyAgent(Agent):
    def text_answer(self, instance, token_budget=DEFAULT_TOKEN_BUDGET):
        moves = self._reference(instance)
        if moves is None:
            return IMPOSSIBLE_CLAIM
        rng = np.random.default_rng(self.config.seed)
        slips = np.flatnonzero(rng.random(len(moves)) >= self.config.p)
        for i in slips:
            wrong = random_move(instance, rng)
            while wrong == moves[i]:
                wrong = random_move(instance, rng)
            moves[i] = wrong
        return _trace(instance, moves)


class TruncatingAgent(Agent):
    def text_answer(self, instance, token_budget=DEFAULT_TOKEN_BUDGET):
        moves = self._reference(instance)
        if moves is None:
            return IMPOSSIBLE_CLAIM
        fits = int(self.config.token_budget // self.config.tokens_per_move)
        if len(moves) <= fits:
            return _trace(instance, moves)
        # output stops dead after the last move that fits
        return "[" + ",".join(move_text(m) for m in moves[:fits])


class ForgetfulAgent(Agent):
    """Re-derives its position from only the last ``window`` moves it wrote.

    While that reconstruction matches the real position it follows the
    reference plan; once older history is lost, it plays whatever looks legal
    from the misremembered position.
    """

    def text_answer(self, instance, token_budget=DEFAULT_TOKEN_BUDGET):
        plan = self._reference(instance)
        if plan is None:
            return IMPOSSIBLE_CLAIM
        window = self.config.window
        written: list = []
        for i, planned in enumerate(plan):
            belief = simulator(instance)
            for move in written[max(0, i - window):]:
                if belief.check(move) is None:
                    belief.play(move)
            if belief.check(planned) is None:
                written.append(planned)
                continue
            options = legal_moves(instance, belief.freeze())
            written.append(options[0] if options else planned)
        return _trace(instance, written)


class GiveUpAgent(Agent):
    def text_answer(self, instance, token_budget=DEFAULT_TOKEN_BUDGET):
        moves = self._reference(instance)
        if moves is None or len(moves) > self.config.threshold:
            return IMPOSSIBLE_CLAIM
        return _trace(instance, moves)


class FixatedAgent(Agent):
    """First-order agency: executes its plan with tools but never revises it."""

    uses_tools = True
    revises = False

    def __init__(self, config: AgentConfig) -> None:
        super().__init__(config)
        self.instance: Optional[PuzzleInstance] = None
        self.session_id: Optional[str] = None
        self.plan: list = []
        self.strategy = ""
        self.cursor = 0
        self.solved = False
        self.last_method = ""
        self.executed: list = []

    def text_answer(self, instance, token_budget=DEFAULT_TOKEN_BUDGET):
        # no simulator to check against in text mode
        return _trace(instance, fixated_schedule(instance))

    def _start(self, observation: Observation) -> Optional[AgentAction]:
        instance = observation.instance
        self.instance = instance
        self.session_id = observation.session_id
        if estimated_state_count(instance) <= BFS_FEASIBLE_STATES:
            outcome = _bfs_plan(instance)
            if not isinstance(outcome, Solution):
                return Resign(IMPOSSIBLE_CLAIM + " (exhaustive search found no solution)")
            self.plan, self.strategy = list(outcome.trace.moves), "bfs"
        else:
            self.plan, self.strategy = fixated_schedule(instance), "heuristic"
        if not self.plan:
            self.solved = True
        return None

    def _final(self) -> AgentAction:
        # only moves the simulator accepted; unexecuted plan steps are not claimed
        return FinalAnswer(_trace(self.instance, self.executed))

    def _revise(self) -> AgentAction:
        outcome = reference_solution(self.instance)
        if not isinstance(outcome, Solution):
            return Resign(IMPOSSIBLE_CLAIM)
        self.plan, self.strategy = list(outcome.trace.moves), "revised"
        self.cursor = 0
        self.executed = []
        self.revisions += 1
        return self._call("reset")

    def _call(self, method: str, **params) -> ToolCall:
        self.last_method = method
        return ToolCall(method, {"session_id": self.session_id, **params})

    def next_action(self, observation: Observation) -> AgentAction:
        if observation.kind == "task":
            early = self._start(observation)
            if early is not None:
                return early
        else:
            response = observation.response or {}
            if "result" in response and self.last_method == "apply":
                self.executed.append(self.plan[self.cursor])
                self.cursor += 1
                self.solved = bool(response["result"].get("solved"))
            self.last_method = ""
            if observation.kind == "budget_exhausted":
                return self._final()
            error = response.get("error")
            if error is not None:
                if error.get("code") == ILLEGAL_MOVE:
                    if self.revises and self.strategy == "heuristic":
                        return self._revise()
                    # hand in the unrevised schedule; it fails where the tool did
                    return FinalAnswer(_trace(self.instance, self.plan))
                return self._final()
        if self.solved:
            return self._final()
        if self.cursor < len(self.plan):
            return self._call("apply", move=json.loads(move_text(self.plan[self.cursor])))
        if self.revises and self.strategy == "heuristic":
            return self._revise()
        return self._final()


class SelfCorrectingAgent(FixatedAgent):
    """Second-order agency: plan, test, notice failure, reset, revise."""

    revises = True


_CLASSES = {
    Archetype.PERFECT: PerfectAgent,
    Archetype.NOISY: NoisyAgent,
    Archetype.TRUNCATING: TruncatingAgent,
    Archetype.FORGETFUL: ForgetfulAgent,
    Archetype.GIVE_UP: GiveUpAgent,
    Archetype.FIXATED: FixatedAgent,
    Archetype.SELF_CORRECTING: SelfCorrectingAgent,
}


def make_agent(config: AgentConfig) -> Agent:
    if not isinstance(config, AgentConfig):
        raise InvalidParameter(f"expected an AgentConfig, got {type(config).__name__}")
    return _CLASSES[config.archetype](config)


def text_answer(agent: Agent, instance: PuzzleInstance, token_budget: int = DEFAULT_TOKEN_BUDGET) -> str:
    return agent.text_answer(instance, token_budget)


def next_action(agent: Agent, observation: Observation) -> AgentAction:
    return agent.next_action(observation)


def initial_observation(instance: PuzzleInstance, session_id: Optional[str], tokens: int, calls: int) -> Observation:
    return Observation("task", instance, session_id, None, tokens, calls)


__all__ = [
    "AgentConfig", "Archetype", "Agent", "ToolCall", "FinalAnswer", "Resign", "Observation",
    "make_agent", "text_answer", "next_action", "fixated_schedule", "random_move",
    "IMPOSSIBLE_CLAIM", "is_resignation",
]
