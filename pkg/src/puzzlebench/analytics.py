"""Analytical failure models and bootstrap statistics.

Two ways a long move sequence fails without any reasoning deficit:

* the written answer outgrows the output budget (token cost is
  ``tokens_per_move * (2**n - 1)`` for an n-disk Hanoi tower), and
* independent per-move slips compound, so a flawless m-move run has
  probability ``p**m``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import InvalidParameter

Number = Union[int, float]

DEFAULT_TOKENS_PER_MOVE = 8
DEFAULT_TOKEN_BUDGET = 64_000
DEFAULT_P_LIST = (0.99999, 0.9999, 0.999)
DEFAULT_RESAMPLES = 10_000


@dataclass(frozen=True)
class FailureModel:
    p: float = 0.9999
    tokens_per_move: Number = DEFAULT_TOKENS_PER_MOVE
    token_budget: int = DEFAULT_TOKEN_BUDGET
    overhead: int = 0  # thinking tokens spent before the answer starts

    def __post_init__(self) -> None:
        if not 0 < self.p <= 1:
            raise InvalidParameter(f"p must be in (0, 1], got {self.p}")
        if self.tokens_per_move <= 0:
            raise InvalidParameter("tokens_per_move must be positive")
        if self.token_budget < 1:
            raise InvalidParameter("token_budget must be >= 1")
        if not 0 <= self.overhead < self.token_budget:
            raise InvalidParameter("overhead must be in [0, token_budget)")

    @property
    def effective_budget(self) -> int:
        return self.token_budget - self.overhead


def hanoi_moves(n: int) -> int:
    return (1 << n) - 1


def token_cost(n: int, tokens_per_move: Number = DEFAULT_TOKENS_PER_MOVE) -> Number:
    if not isinstance(n, int) or n < 1:
        raise InvalidParameter(f"n must be a positive integer, got {n!r}")
    if tokens_per_move <= 0:
        raise InvalidParameter("tokens_per_move must be positive")
    return tokens_per_move * hanoi_moves(n)


def resource_cliff(token_budget: Number, tokens_per_move: Number = DEFAULT_TOKENS_PER_MOVE,
                   overhead: Number = 0) -> int:
    """Smallest n whose full Hanoi answer no longer fits in the budget."""
    budget = token_budget - overhead
    if budget < tokens_per_move:
        raise InvalidParameter("budget must cover at least one move")
    n = 1
    while token_cost(n, tokens_per_move) <= budget:
        n += 1
    return n


def _log_p(p: float) -> float:
    # log1p keeps precision for p within a few ulps of 1
    return math.log1p(p - 1.0)


def success_probability(p: float, m: int) -> float:
    if not 0 < p <= 1:
        raise InvalidParameter(f"p must be in (0, 1], got {p}")
    if m < 0:
        raise InvalidParameter(f"m must be >= 0, got {m}")
    if m == 0 or p == 1:
        return 1.0
    return math.exp(m * _log_p(p))


def failure_horizon(p: float) -> int:
    """Smallest n for which an n-disk Hanoi run succeeds less than half the time."""
    if not 0 < p < 1:
        raise InvalidParameter(f"p must be in (0, 1) to have a horizon, got {p}")
    n = 1
    while success_probability(p, hanoi_moves(n)) >= 0.5:
        n += 1
    return n


def bootstrap_ci(values: Sequence[float], resamples: int = DEFAULT_RESAMPLES,
                 confidence: float = 0.95, seed: int = 0) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean of ``values``."""
    data = np.asarray(values, dtype=float)
    if data.ndim != 1 or data.size < 1:
        raise InvalidParameter("bootstrap_ci needs at least one value")
    if resamples < 100:
        raise InvalidParameter("resamples must be >= 100")
    if not 0 < confidence < 1:
        raise InvalidParameter("confidence must be in (0, 1)")
    rng = np.random.default_rng(seed)
    means = np.empty(resamples)
    # chunked to bound memory for large samples
    chunk = max(1, 2_000_000 // data.size)
    for lo in range(0, resamples, chunk):
        hi = min(resamples, lo + chunk)
        idx = rng.integers(0, data.size, size=(hi - lo, data.size))
        means[lo:hi] = data[idx].mean(axis=1)
    alpha = 1.0 - confidence
    lower, upper = np.quantile(means, [alpha / 2, 1 - alpha / 2])
    return float(lower), float(upper)


@dataclass(frozen=True)
class CurveRow:
    n: int
    moves: int
    token_cost: Number
    p_success: tuple


@dataclass(frozen=True)
class CurveTable:
    p_list: tuple
    rows: tuple
    token_budget: int

    def first_over_budget(self):
        for row in self.rows:
            if row.token_cost > self.token_budget:
                return row.n
        return None

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "moves", "token_cost"] + [f"p_success_{p!r}" for p in self.p_list])
        for row in self.rows:
            writer.writerow([row.n, row.moves, row.token_cost] + [repr(v) for v in row.p_success])
        return buf.getvalue()


def emit_model_curves(model: FailureModel, n_range: Iterable[int],
                      p_list: Sequence[float] = DEFAULT_P_LIST) -> CurveTable:
    ns = list(n_range)
    ps = tuple(p_list)
    if not ns or not ps:
        raise InvalidParameter("n_range and p_list must be non-empty")
    rows = tuple(
        CurveRow(n, hanoi_moves(n), token_cost(n, model.tokens_per_move),
                 tuple(success_probability(p, hanoi_moves(n)) for p in ps))
        for n in ns
    )
    return CurveTable(ps, rows, model.effective_budget)
