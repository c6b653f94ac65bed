"""Puzzle benchmarks with move-level adjudication, scripted agents and analytic failure models."""

from __future__ import annotations

from .adjudicator import AdjudicationResult, Status, adjudicate, adjudicate_text, scan_text_for_solutions
from .agents import AgentConfig, Archetype, make_agent
from .analytics import (FailureModel, bootstrap_ci, emit_model_curves, failure_horizon, resource_cliff,
                        success_probability, token_cost)
from .errors import (ConfigError, IllegalMove, InvalidParameter, KindMismatch, ParseError, PuzzleError,
                     Reason, SchemaError, Unsupported)
from .harness import Budgets, EpisodeRecord, Mode, SweepReport, run_episode, run_sweep
from .puzzles import PuzzleInstance, PuzzleKind, apply_move, initial_state, is_goal, legal_moves, new_instance
from .solvers import (Solution, Unsolvable, LimitExceeded, solve_bfs, solve_blocks, solve_checker, solve_hanoi,
                      solve_river_constructive)
from .traces import Trace, format_trace, parse_trace

__version__ = "0.1.0"
