"""Episode execution, sweeps, persistence and aggregation."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .adjudicator import (AdjudicationResult, Status, adjudicate_text, episode_metrics,
                          scan_text_for_solutions)
from .agents import (AgentConfig, FinalAnswer, Observation, Resign, ToolCall, initial_observation,
                     is_resignation, make_agent)
from .analytics import (DEFAULT_RESAMPLES, DEFAULT_TOKEN_BUDGET, DEFAULT_TOKENS_PER_MOVE,
                        FailureModel, bootstrap_ci, hanoi_moves, success_probability, token_cost)
from .errors import ConfigError, InvalidParameter, KindMismatch, Reason, SchemaError
from .puzzles import PuzzleInstance, PuzzleKind
from .toolserver import ToolServer

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_SAMPLES = 25
DEFAULT_TOOL_CALLS = 200

_KIND_INDEX = {PuzzleKind.HANOI: 0, PuzzleKind.CHECKER: 1, PuzzleKind.RIVER: 2, PuzzleKind.BLOCKS: 3}
_MOVE_RE = re.compile(r"\[[^\[\]]*\]")
_TRACE_START = re.compile(r"[ \t\n\r\f\v]*(?:moves[ \t\n\r\f\v]*=[ \t\n\r\f\v]*)?\[[ \t\n\r\f\v]*\[")


class Mode(str, Enum):
    TEXT = "text"
    AGENTIC = "agentic"


@dataclass(frozen=True)
class Budgets:
    tokens: int = DEFAULT_TOKEN_BUDGET
    tool_calls: int = DEFAULT_TOOL_CALLS
    tokens_per_move: float = DEFAULT_TOKENS_PER_MOVE
    count_tool_responses: bool = False


def episode_seed(sweep_seed: int, kind: PuzzleKind, n: int, sample: int) -> int:
    """Mix (sweep seed, kind, n, sample index) into a 63-bit episode seed.

    Uses numpy's SeedSequence hashing so each cell is reproducible on its own.
    """
    seq = np.random.SeedSequence([sweep_seed & 0xFFFFFFFFFFFFFFFF, _KIND_INDEX[kind], n, sample])
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def text_tokens(text: str, tokens_per_move: float) -> int:
    """Token estimate: moves x tokens_per_move for trace payloads, else chars / 4."""
    if _TRACE_START.match(text):
        return int(math.ceil(len(_MOVE_RE.findall(text)) * tokens_per_move))
    return math.ceil(len(text) / 4)


@dataclass
class EpisodeRecord:
    instance: PuzzleInstance
    agent: AgentConfig
    mode: Mode
    seed: int
    answer_or_transcript: Union[str, list]
    tokens_used: int
    tool_calls_used: int
    result: AdjudicationResult
    wall_time_ms: float = 0.0
    resigned: bool = False
    scan: list = field(default_factory=list)

    @property
    def final_answer(self) -> str:
        if isinstance(self.answer_or_transcript, str):
            return self.answer_or_transcript
        last = self.answer_or_transcript[-1] if self.answer_or_transcript else {}
        return last.get("final_answer", last.get("resign", ""))

    @property
    def resets(self) -> int:
        if isinstance(self.answer_or_transcript, str):
            return 0
        return sum(1 for e in self.answer_or_transcript if e.get("call", {}).get("method") == "reset")

    def to_dict(self) -> dict:
        inst = self.instance
        res = self.result
        out = {
            "schema_version": SCHEMA_VERSION,
            "kind": inst.kind.value,
            "n": inst.n,
            "k": inst.k,
            "blocks": None,
            "agent": self.agent.to_dict(),
            "mode": self.mode.value,
            "seed": self.seed,
            "answer_or_transcript": self.answer_or_transcript,
            "tokens_used": self.tokens_used,
            "tool_calls_used": self.tool_calls_used,
            "status": res.status.value,
            "first_failure_index": res.first_failure_index,
            "failure_reason": None if res.failure_reason is None else res.failure_reason.value,
            "failure_detail": res.detail,
            "valid_prefix_len": res.valid_prefix_len,
            "moves_total": res.moves_total,
            "resigned": self.resigned,
            "scan": self.scan,
            "wall_time_ms": self.wall_time_ms,
        }
        if inst.kind is PuzzleKind.BLOCKS:
            out["blocks"] = {"seed": inst.seed, "initial": [list(s) for s in inst.blocks_initial],
                             "goal": [list(s) for s in inst.blocks_goal]}
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "EpisodeRecord":
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {data.get('schema_version')!r}")
        blocks = data["blocks"]
        if blocks is not None:
            instance = PuzzleInstance(data["kind"], data["n"], blocks_initial=_tuples(blocks["initial"]),
                                      blocks_goal=_tuples(blocks["goal"]), seed=blocks["seed"])
        else:
            instance = PuzzleInstance(data["kind"], data["n"], k=data["k"])
        reason = data["failure_reason"]
        result = AdjudicationResult(Status(data["status"]), data["valid_prefix_len"], data["moves_total"],
                                    data["first_failure_index"], None if reason is None else Reason(reason),
                                    data["failure_detail"])
        return cls(instance, AgentConfig.from_dict(data["agent"], seed=data["seed"]), Mode(data["mode"]),
                   data["seed"], data["answer_or_transcript"], data["tokens_used"], data["tool_calls_used"],
                   result, data["wall_time_ms"], data["resigned"], data["scan"])


def _tuples(stacks) -> tuple:
    return tuple(tuple(s) for s in stacks)


def _text_result(instance: PuzzleInstance, text: str) -> tuple[AdjudicationResult, bool, list]:
    result = adjudicate_text(instance, text)
    if result.status is not Status.PARSE_ERROR:
        return result, False, []
    scan = [[f.start, f.end, f.result.status.value]
            for f in scan_text_for_solutions(instance, text).findings]
    return result, is_resignation(text), scan


def _tpm(config: AgentConfig, budgets: Budgets) -> float:
    return config.tokens_per_move or budgets.tokens_per_move


def run_episode(agent_config: AgentConfig, instance: PuzzleInstance, mode: Union[Mode, str] = Mode.TEXT,
                seed: int = 0, budgets: Budgets = Budgets()) -> EpisodeRecord:
    """Run one agent on one instance; agent failures are recorded, never raised."""
    try:
        mode = Mode(mode)
    except ValueError:
        raise ConfigError(f"unknown mode {mode!r}") from None
    if not isinstance(agent_config, AgentConfig) or not isinstance(instance, PuzzleInstance):
        raise ConfigError("run_episode needs an AgentConfig and a PuzzleInstance")
    config = agent_config.with_seed(seed)
    agent = make_agent(config)
    tpm = _tpm(config, budgets)
    started = time.perf_counter()
    if mode is Mode.TEXT:
        text = agent.text_answer(instance, budgets.tokens)
        result, resigned, scan = _text_result(instance, text)
        elapsed = (time.perf_counter() - started) * 1000
        return EpisodeRecord(instance, config, mode, seed, text, text_tokens(text, tpm), 0,
                             result, elapsed, resigned, scan)
    transcript, tokens, calls, answer = _agentic_loop(agent, instance, budgets, tpm)
    if answer is None:
        result, resigned, scan = AdjudicationResult(Status.PARSE_ERROR, 0, 0, detail="no answer"), False, []
    elif isinstance(answer, Resign):
        result = AdjudicationResult(Status.PARSE_ERROR, 0, 0, detail="resigned")
        resigned, scan = True, []
    else:
        result, resigned, scan = _text_result(instance, answer.text)
    elapsed = (time.perf_counter() - started) * 1000
    return EpisodeRecord(instance, config, mode, seed, transcript, tokens, calls, result, elapsed, resigned, scan)


def _agentic_loop(agent, instance: PuzzleInstance, budgets: Budgets, tpm: float):
    server = ToolServer(max_tool_calls=budgets.tool_calls)
    init = {"kind": instance.kind.value, "n": instance.n}
    if instance.k is not None:
        init["k"] = instance.k
    if instance.kind is PuzzleKind.BLOCKS:
        init["blocks_initial"] = [list(s) for s in instance.blocks_initial]
        init["blocks_goal"] = [list(s) for s in instance.blocks_goal]
    opened = server.handle({"id": 0, "method": "init", "params": init})
    sid = opened["result"]["session_id"]
    obs = initial_observation(instance, sid, budgets.tokens, budgets.tool_calls)
    transcript: list = []
    tokens = calls = 0
    forced = False
    while True:
        action = agent.next_action(obs)
        if isinstance(action, FinalAnswer):
            tokens += text_tokens(action.text, tpm)
            transcript.append({"final_answer": action.text})
            return transcript, tokens, calls, action
        if isinstance(action, Resign):
            tokens += math.ceil(len(action.claim_text) / 4)
            transcript.append({"resign": action.claim_text})
            return transcript, tokens, calls, action
        if not isinstance(action, ToolCall) or forced:
            transcript.append({"final_answer": None})
            return transcript, tokens, calls, None
        call = {"method": action.method, "params": action.params}
        cost = math.ceil(len(json.dumps(call, sort_keys=True, separators=(",", ":"))) / 4)
        if tokens + cost > budgets.tokens:
            # refused, not executed: only the forced final answer may overshoot
            forced = True
            obs = Observation("budget_exhausted", instance, sid, None, max(0, budgets.tokens - tokens),
                              max(0, budgets.tool_calls - calls))
            continue
        calls += 1
        tokens += cost
        response = server.handle({"id": calls, **call})
        if budgets.count_tool_responses:
            tokens += math.ceil(len(json.dumps(response, sort_keys=True, separators=(",", ":"))) / 4)
        transcript.append({"call": call, "response": response})
        remaining_tokens = max(0, budgets.tokens - tokens)
        remaining_calls = max(0, budgets.tool_calls - calls)
        if remaining_tokens == 0 or remaining_calls == 0:
            forced = True
            obs = Observation("budget_exhausted", instance, sid, response, remaining_tokens, remaining_calls)
        else:
            obs = Observation("tool_result", instance, sid, response, remaining_tokens, remaining_calls)


def replay_episode(record: EpisodeRecord) -> AdjudicationResult:
    """Recompute the verdict for a stored episode from its answer alone."""
    if record.answer_or_transcript and not isinstance(record.answer_or_transcript, str):
        last = record.answer_or_transcript[-1]
        if "resign" in last:
            return AdjudicationResult(Status.PARSE_ERROR, 0, 0, detail="resigned")
        if last.get("final_answer") is None:
            return AdjudicationResult(Status.PARSE_ERROR, 0, 0, detail="no answer")
    return _text_result(record.instance, record.final_answer)[0]


# -- sweeps ------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    agent: str
    mode: str
    kind: str
    n: int
    k: Optional[int]
    sample_count: int
    accuracy_mean: float
    ci_lower: float
    ci_upper: float
    mean_tokens: float
    mean_valid_prefix_fraction: float


REPORT_COLUMNS = ["agent", "mode", "kind", "n", "k", "sample_count", "accuracy_mean", "ci_lower",
                  "ci_upper", "mean_tokens", "mean_valid_prefix_fraction"]


@dataclass
class SweepReport:
    rows: list
    episodes: list = field(default_factory=list, repr=False, compare=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for row in self.rows:
            writer.writerow(["" if getattr(row, c) is None else getattr(row, c) for c in REPORT_COLUMNS])
        return buf.getvalue()

    def row(self, n: int, agent: Optional[str] = None) -> SweepRow:
        for row in self.rows:
            if row.n == n and (agent is None or row.agent == agent):
                return row
        raise KeyError(n)


def _make_instance(kind: PuzzleKind, n: int, k: Optional[int], seed: int) -> PuzzleInstance:
    if kind is PuzzleKind.BLOCKS:
        return PuzzleInstance(kind, n, seed=seed)
    return PuzzleInstance(kind, n, k=k)


def _run_task(task) -> EpisodeRecord:
    return run_episode(*task)


def aggregate(records: Sequence[EpisodeRecord], resamples: int = DEFAULT_RESAMPLES,
              seed: int = 0) -> list:
    """One row per (agent, mode, kind, n); independent of record order."""
    cells: dict = {}
    for rec in records:
        key = (rec.agent.label, rec.mode.value, rec.instance.kind.value, rec.instance.n, rec.instance.k)
        cells.setdefault(key, []).append(rec)
    rows = []
    for key in sorted(cells, key=lambda c: (c[0], c[1], c[2], c[3], c[4] or 0)):
        group = sorted(cells[key], key=lambda r: r.seed)
        metrics = [episode_metrics(r.result) for r in group]
        acc = [m["accuracy"] for m in metrics]
        mean = float(np.mean(acc))
        lo, hi = bootstrap_ci(acc, resamples, 0.95, seed=episode_seed(seed, PuzzleKind(key[2]), key[3], -1 & 0xFFFF))
        rows.append(SweepRow(key[0], key[1], key[2], key[3], key[4], len(group), mean,
                             min(lo, mean), max(hi, mean),
                             float(np.mean([r.tokens_used for r in group])),
                             float(np.mean([m["valid_prefix_fraction"] for m in metrics]))))
    return rows


def run_sweep(agent_configs: Union[AgentConfig, Sequence[AgentConfig]], kind: Union[PuzzleKind, str],
              n_values: Iterable[int], samples_per_cell: int = DEFAULT_SAMPLES,
              mode: Union[Mode, str] = Mode.TEXT, seed: int = 0, k: Optional[int] = None,
              budgets: Budgets = Budgets(), workers: int = 1,
              resamples: int = DEFAULT_RESAMPLES) -> SweepReport:
    if isinstance(agent_configs, AgentConfig):
        agent_configs = [agent_configs]
    if samples_per_cell < 1:
        raise ConfigError("samples_per_cell must be >= 1")
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    try:
        kind = PuzzleKind.parse(kind)
        mode = Mode(mode)
        n_values = list(n_values)
        tasks = []
        for config in agent_configs:
            for n in n_values:
                for i in range(samples_per_cell):
                    ep_seed = episode_seed(seed, kind, n, i)
                    tasks.append((config, _make_instance(kind, n, k, ep_seed), mode, ep_seed, budgets))
    except (InvalidParameter, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if workers == 1:
        records = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    log.info("sweep finished: %d episodes", len(records))
    return SweepReport(aggregate(records, resamples, seed), records)


# -- persistence -------------------------------------------------------------

def persist_episodes(records: Iterable[EpisodeRecord], path: Union[str, Path], append: bool = False) -> int:
    count = 0
    with open(path, "a" if append else "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), separators=(",", ":")) + "\n")
            count += 1
    return count


def load_episodes(path: Union[str, Path]) -> list:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(EpisodeRecord.from_dict(json.loads(line)))
            except (ValueError, KeyError, TypeError, AttributeError) as exc:
                raise SchemaError(line_no, str(exc)) from exc
    return records


# -- analytic comparison -----------------------------------------------------

@dataclass(frozen=True)
class Deviation:
    n: int
    empirical: float
    analytic: float
    deviation: float
    over_budget: bool
    analytic_in_ci: bool


def compare_to_model(report: SweepReport, model: FailureModel) -> list:
    rows = []
    for row in report.rows:
        if row.kind != PuzzleKind.HANOI.value:
            raise KindMismatch(f"analytic model covers hanoi, report row is {row.kind}")
        analytic = success_probability(model.p, hanoi_moves(row.n))
        over = token_cost(row.n, model.tokens_per_move) > model.effective_budget
        rows.append(Deviation(row.n, row.accuracy_mean, analytic, row.accuracy_mean - analytic, over,
                              row.ci_lower <= analytic <= row.ci_upper))
    return rows
