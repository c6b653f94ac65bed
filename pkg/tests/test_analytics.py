from __future__ import annotations

import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from puzzlebench.analytics import (FailureModel, bootstrap_ci, emit_model_curves, failure_horizon, hanoi_moves,
                                   resource_cliff, success_probability, token_cost)
from puzzlebench.errors import InvalidParameter


def test_token_cost():
    assert token_cost(13, 8) == 65528
    assert token_cost(1, 8) == 8
    assert token_cost(10, 8) == 8184


@pytest.mark.parametrize("budget,tpm,cliff", [(64000, 8, 13), (8, 8, 2), (100000, 8, 14)])
def test_resource_cliff(budget, tpm, cliff):
    assert resource_cliff(budget, tpm) == cliff


def test_overhead_moves_cliff_down():
    assert resource_cliff(64000, 8, overhead=40000) == 12


def test_success_probability():
    assert success_probability(0.9999, 8191) == pytest.approx(0.4408, abs=5e-4)
    assert success_probability(0.3, 0) == 1.0
    assert success_probability(1.0, 10**6) == 1.0
    with pytest.raises(InvalidParameter):
        success_probability(0.0, 3)


@pytest.mark.parametrize("p,n", [(0.99999, 17), (0.999, 10), (0.9999, 13)])
def test_failure_horizon(p, n):
    assert failure_horizon(p) == n


@settings(max_examples=100)
@given(st.floats(0.9, 0.999999), st.integers(1, 10_000))
def test_log_space_matches_naive_product(p, m):
    naive = reduce(lambda acc, _: acc * p, range(m), 1.0)
    assert success_probability(p, m) == pytest.approx(naive, rel=1e-12, abs=1e-300)


@given(st.floats(0.5, 0.99999))
def test_horizon_consistency(p):
    n = failure_horizon(p)
    assert success_probability(p, 2 ** n - 1) < 0.5 <= success_probability(p, 2 ** (n - 1) - 1)


@given(st.integers(51, 10**7), st.integers(51, 10**7), st.integers(1, 50))
def test_cliff_monotone(b1, b2, tpm):
    lo, hi = sorted((b1, b2))
    assert resource_cliff(lo, tpm) <= resource_cliff(hi, tpm)
    assert resource_cliff(hi, tpm) >= resource_cliff(hi, tpm + 1)


@given(st.floats(0.01, 0.999999), st.integers(0, 10**5))
def test_probability_decreasing(p, m):
    assert success_probability(p, m + 1) < success_probability(p, m) or success_probability(p, m) == 0.0


def test_bootstrap_degenerate():
    assert bootstrap_ci([1.0] * 25) == (1.0, 1.0)
    assert bootstrap_ci([0.3]) == (0.3, 0.3)


def test_bootstrap_deterministic_and_ordered():
    vals = np.random.default_rng(3).random(40)
    a = bootstrap_ci(vals, 2000, seed=9)
    assert a == bootstrap_ci(vals, 2000, seed=9)
    assert a[0] <= vals.mean() <= a[1]


def test_bootstrap_validation():
    with pytest.raises(InvalidParameter):
        bootstrap_ci([])
    with pytest.raises(InvalidParameter):
        bootstrap_ci([1.0], confidence=1.5)


def test_curves():
    table = emit_model_curves(FailureModel(), range(1, 21))
    assert table.first_over_budget() == 13
    row13 = table.rows[12]
    assert row13.token_cost == 65528 and row13.moves == 8191
    assert table.rows[0].p_success == table.p_list
    csv = table.to_csv().splitlines()
    assert csv[0] == "n,moves,token_cost,p_success_0.99999,p_success_0.9999,p_success_0.999"
    assert len(csv) == 21
    moves = [r.moves for r in table.rows]
    assert moves == sorted(set(moves))
    for j in range(3):
        ps = [r.p_success[j] for r in table.rows]
        assert all(a >= b for a, b in zip(ps, ps[1:]))


def test_curves_single_p():
    table = emit_model_curves(FailureModel(p=0.999), [10], [0.999])
    assert table.rows[0].p_success[0] < 0.5


def test_model_validation():
    with pytest.raises(InvalidParameter):
        FailureModel(p=1.2)
    with pytest.raises(InvalidParameter):
        FailureModel(overhead=64000)


def test_hanoi_moves():
    assert [hanoi_moves(n) for n in range(1, 5)] == [1, 3, 7, 15]
    assert math.isclose(FailureModel(overhead=100).effective_budget, 63900)
