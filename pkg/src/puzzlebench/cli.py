"""Command-line entry point: ``puzzlebench <subcommand> ...``.

Exit codes: 0 success, 1 domain-negative (not solved, unsolvable, verdict
drift), 2 usage or configuration error. Data goes to stdout, diagnostics to
stderr.

Defaults can come from the environment: PUZZLEBENCH_SEED, PUZZLEBENCH_WORKERS
and PUZZLEBENCH_OUT_DIR.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from .adjudicator import adjudicate_text
from .agents import AgentConfig
from .analytics import DEFAULT_P_LIST, FailureModel, emit_model_curves
from .errors import PuzzleError
from .harness import Budgets, load_episodes, persist_episodes, replay_episode, run_sweep
from .puzzles import PuzzleInstance, PuzzleKind
from .solvers import (BlocksStrategy, LimitExceeded, Solution, Unsolvable, estimated_state_count,
                      solve_bfs, solve_blocks, solve_checker, solve_hanoi, solve_river_constructive)
from .toolserver import ServeConfig, serve
from .traces import format_trace

log = logging.getLogger("puzzlebench")

ENV_PREFIX = "PUZZLEBENCH_"
EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2
RIVER_BFS_LIMIT = 2_000_000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{ENV_PREFIX}{name} must be an integer, got {raw!r}") from None


def parse_range(text: str) -> list:
    """``"1..20"`` (inclusive), ``"5"`` or ``"3,5,8"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; use A..B or a comma list") from None


def _float_list(text: str) -> list:
    try:
        return [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _instance(args) -> PuzzleInstance:
    kind = PuzzleKind.parse(args.kind)
    if kind is PuzzleKind.BLOCKS:
        return PuzzleInstance(kind, args.n, seed=args.seed)
    return PuzzleInstance(kind, args.n, k=args.k)


def _solve(instance: PuzzleInstance, strategy: str, max_states: int):
    kind = instance.kind
    if kind is PuzzleKind.HANOI:
        return Solution(solve_hanoi(instance.n), optimal=True)
    if kind is PuzzleKind.CHECKER:
        return Solution(solve_checker(instance.n), optimal=True)
    if kind is PuzzleKind.BLOCKS:
        return solve_blocks(instance, strategy, max_states)
    if instance.k >= 4 and estimated_state_count(instance) > RIVER_BFS_LIMIT:
        return solve_river_constructive(instance.n, instance.k)
    return solve_bfs(instance, max_states)


def cmd_solve(args) -> int:
    instance = _instance(args)
    started = time.perf_counter()
    outcome = _solve(instance, args.strategy, args.max_states)
    log.info("solved in %.1f ms", (time.perf_counter() - started) * 1000)
    if isinstance(outcome, Unsolvable):
        print(f"UNSOLVABLE (states_explored={outcome.states_explored})")
        return EXIT_NEGATIVE
    if isinstance(outcome, LimitExceeded):
        print(f"LIMIT_EXCEEDED (states_explored={outcome.states_explored})")
        return EXIT_NEGATIVE
    print(format_trace(outcome.trace))
    return EXIT_OK


def cmd_validate(args) -> int:
    instance = _instance(args)
    try:
        text = sys.stdin.read() if args.trace_file == "-" else Path(args.trace_file).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read trace file: {exc}") from None
    result = adjudicate_text(instance, text)
    print(result.summary())
    return EXIT_OK if result.solved else EXIT_NEGATIVE


def cmd_sweep(args) -> int:
    configs = [AgentConfig.parse(a) for a in args.agent]
    budgets = Budgets(tokens=args.token_budget, tool_calls=args.tool_calls)
    report = run_sweep(configs, args.kind, args.n_range, args.samples, args.mode, args.seed,
                       k=args.k, budgets=budgets, workers=args.workers, resamples=args.resamples)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    count = persist_episodes(report.episodes, out_dir / "episodes.jsonl")
    (out_dir / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    log.info("wrote %d episodes and report to %s", count, out_dir)
    sys.stdout.write(report.to_csv())
    return EXIT_OK


def cmd_model(args) -> int:
    model = FailureModel(p=args.p_list[0], tokens_per_move=args.tokens_per_move,
                         token_budget=args.budget, overhead=args.overhead)
    table = emit_model_curves(model, args.n_range, args.p_list)
    sys.stdout.write(table.to_csv())
    log.info("first over-budget n: %s", table.first_over_budget())
    return EXIT_OK


def cmd_serve(args) -> int:
    config = ServeConfig(args.transport, args.host, args.port, args.max_tool_calls)
    if args.transport == "stdio":
        serve(config)
        return EXIT_OK
    server = serve(config)
    host, port = server.server_address[:2]
    print(f"listening {host}:{port}", file=sys.stderr, flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        records = load_episodes(args.episodes)
    except OSError as exc:
        raise UsageError(f"cannot read episodes: {exc}") from None
    drift = 0
    for i, rec in enumerate(records):
        again = replay_episode(rec)
        if again.to_dict() != rec.result.to_dict():
            drift += 1
            print(f"{i}\tstored={rec.result.summary()}\treplayed={again.summary()}")
    print(f"replayed {len(records)} episodes, {drift} verdict changes")
    return EXIT_NEGATIVE if drift else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="puzzlebench", description="Puzzle solving, adjudication and agent sweeps.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    seed = _env_int("SEED", 0)

    def instance_flags(p):
        p.add_argument("--kind", required=True, choices=[k.value for k in PuzzleKind])
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--k", type=int, help="boat capacity (river only)")
        p.add_argument("--seed", type=int, default=seed, help="blocks instance seed")

    p = sub.add_parser("solve", help="print a canonical solution trace")
    instance_flags(p)
    p.add_argument("--strategy", choices=[s.value for s in BlocksStrategy], default="heuristic")
    p.add_argument("--max-states", type=int, default=RIVER_BFS_LIMIT)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="adjudicate a trace file ('-' for stdin)")
    instance_flags(p)
    p.add_argument("--trace-file", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="run agents over a range of sizes")
    p.add_argument("--agent", action="append", required=True, help="e.g. noisy:p=0.999 (repeatable)")
    p.add_argument("--kind", required=True, choices=[k.value for k in PuzzleKind])
    p.add_argument("--n-range", type=parse_range, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--samples", type=int, default=25)
    p.add_argument("--mode", choices=["text", "agentic"], default="text")
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--workers", type=int, default=_env_int("WORKERS", 1))
    p.add_argument("--token-budget", type=int, default=64_000)
    p.add_argument("--tool-calls", type=int, default=200)
    p.add_argument("--resamples", type=int, default=10_000)
    p.add_argument("--out-dir", default=os.environ.get(ENV_PREFIX + "OUT_DIR", "."))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("model", help="emit the analytic token-cost and success curves")
    p.add_argument("--budget", type=int, default=64_000)
    p.add_argument("--tokens-per-move", type=float, default=8)
    p.add_argument("--overhead", type=int, default=0)
    p.add_argument("--p-list", type=_float_list, default=list(DEFAULT_P_LIST))
    p.add_argument("--n-range", type=parse_range, default=list(range(1, 21)))
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("serve", help="run the tool protocol server")
    p.add_argument("--transport", choices=["stdio", "tcp"], default="stdio")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=0)
    p.add_argument("--max-tool-calls", type=int, default=200)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="re-adjudicate stored episodes and report verdict changes")
    p.add_argument("--episodes", required=True)
    p.set_defaults(func=cmd_replay)
    return parser


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "tokens_per_move", None) is not None and args.command == "model":
        if args.tokens_per_move == int(args.tokens_per_move):
            args.tokens_per_move = int(args.tokens_per_move)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"puzzlebench: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PuzzleError, ValueError) as exc:
        print(f"puzzlebench {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())
