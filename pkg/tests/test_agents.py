from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from puzzlebench.adjudicator import Status, adjudicate_text
from puzzlebench.agents import (IMPOSSIBLE_CLAIM, AgentConfig, Archetype, FinalAnswer, Observation, Resign,
                                ToolCall, fixated_schedule, initial_observation, is_resignation, make_agent,
                                next_action, random_move, text_answer)
from puzzlebench.analytics import token_cost
from puzzlebench.errors import InvalidParameter
from puzzlebench.puzzles import PuzzleInstance, new_instance
from puzzlebench.solvers import reference_solution
from puzzlebench.traces import parse_trace

HANOI3 = "[[1,0,2],[2,0,1],[1,2,1],[3,0,2],[1,1,0],[2,1,2],[1,0,2]]"


def agent(text, seed=0):
    return make_agent(AgentConfig.parse(text, seed=seed))


class TestConfig:
    def test_parse_and_label(self):
        cfg = AgentConfig.parse("noisy:p=0.999")
        assert cfg.archetype is Archetype.NOISY and cfg.p == 0.999
        assert cfg.label == "noisy(p=0.999)"
        assert AgentConfig.parse("truncating").token_budget == 64000
        assert AgentConfig.parse("truncating:budget=100,tpm=4").tokens_per_move == 4
        assert AgentConfig.parse("give-up:t=10").threshold == 10

    @pytest.mark.parametrize("text", ["noisy", "noisy:p=0", "noisy:p=1.5", "perfect:p=0.5", "forgetful:w=0",
                                      "wizard", "noisy:p"])
    def test_invalid(self, text):
        with pytest.raises(InvalidParameter):
            AgentConfig.parse(text)

    def test_dict_round_trip(self):
        cfg = AgentConfig.parse("forgetful:w=5", seed=3)
        assert AgentConfig.from_dict(cfg.to_dict(), seed=3) == cfg

    def test_make_agent_rejects_garbage(self):
        with pytest.raises(InvalidParameter):
            make_agent("perfect")


def test_perfect():
    assert text_answer(agent("perfect"), PuzzleInstance("hanoi", 3)) == HANOI3
    obs = initial_observation(PuzzleInstance("hanoi", 2), None, 64000, 0)
    assert next_action(agent("perfect"), obs) == FinalAnswer("[[1,0,1],[2,0,2],[1,1,2]]")


def test_perfect_on_unsolvable_resigns():
    obs = initial_observation(PuzzleInstance("river", 6, k=3), None, 64000, 0)
    assert isinstance(next_action(agent("perfect"), obs), Resign)


def test_noisy_is_seeded():
    inst = PuzzleInstance("hanoi", 9)
    a = text_answer(agent("noisy:p=0.99", 7), inst)
    assert a == text_answer(agent("noisy:p=0.99", 7), inst)
    assert a != text_answer(agent("noisy:p=0.99", 8), inst)
    assert text_answer(agent("noisy:p=1.0"), inst) == text_answer(agent("perfect"), inst)


def test_noisy_slip_rate():
    inst = PuzzleInstance("hanoi", 12)
    ref = list(reference_solution(inst).trace)
    diffs = [sum(a != b for a, b in zip(parse_trace("hanoi", text_answer(agent("noisy:p=0.99", s), inst)), ref))
             for s in range(20)]
    rate = sum(diffs) / (20 * len(ref))
    assert 0.008 < rate < 0.012


@settings(max_examples=30)
@given(st.sampled_from([PuzzleInstance("hanoi", 4), PuzzleInstance("checker", 3), PuzzleInstance("river", 4, k=3),
                        new_instance("blocks", 5, blocks=1)]), st.integers(0, 2**32))
def test_random_moves_are_well_formed(inst, seed):
    rng = np.random.default_rng(seed)
    for _ in range(10):
        move = random_move(inst, rng)
        assert type(move) is type(reference_solution(inst).trace[0])


@pytest.mark.parametrize("n", range(1, 17))
def test_truncating_cliff(n):
    inst = PuzzleInstance("hanoi", n)
    res = adjudicate_text(inst, text_answer(agent("truncating"), inst))
    assert res.solved == (token_cost(n, 8) <= 64000)


def test_truncating_text_is_cut():
    text = text_answer(agent("truncating:budget=80,tpm=8"), PuzzleInstance("hanoi", 4))
    assert text.startswith("[[1,0,1]") and not text.endswith("]]")
    assert text.count("[") == 11


def test_forgetful():
    inst = PuzzleInstance("hanoi", 8)
    assert adjudicate_text(inst, text_answer(agent("forgetful:w=1000"), inst)).solved
    small = adjudicate_text(inst, text_answer(agent("forgetful:w=3"), inst))
    assert not small.solved


@pytest.mark.parametrize("threshold", [0, 4, 5, 10, 11, 100])
def test_give_up_threshold(threshold):
    inst = PuzzleInstance("river", 5, k=3)
    length = len(reference_solution(inst).trace)
    text = text_answer(agent(f"giveup:t={threshold}"), inst)
    assert is_resignation(text) == (length > threshold)


def test_resignation_detection():
    assert is_resignation(IMPOSSIBLE_CLAIM)
    assert not is_resignation("[[1,0,2]]")


def test_fixated_schedules():
    assert fixated_schedule(PuzzleInstance("hanoi", 2)) == list(parse_trace("hanoi", "[[1,0,2],[1,2,1],[1,1,0]]"))
    river = adjudicate_text(PuzzleInstance("river", 20, k=4),
                            text_answer(agent("fixated"), PuzzleInstance("river", 20, k=4)))
    assert river.status is Status.ILLEGAL_MOVE and river.failure_reason.value == "SafetyViolation"


def _failure_obs(inst, sid):
    response = {"id": 1, "error": {"code": "ILLEGAL_MOVE", "message": "SafetyViolation",
                                   "data": {"reason": "SafetyViolation"}}}
    return Observation("tool_result", inst, sid, response, 60000, 100)


def test_self_correcting_resets_then_applies_revised_plan():
    inst = PuzzleInstance("river", 20, k=4)
    bot = agent("selfcorrecting")
    first = bot.next_action(initial_observation(inst, "s1", 64000, 200))
    assert isinstance(first, ToolCall) and first.method == "apply"
    reset = bot.next_action(_failure_obs(inst, "s1"))
    assert reset == ToolCall("reset", {"session_id": "s1"})
    assert bot.revisions == 1
    ok = Observation("tool_result", inst, "s1", {"id": 2, "result": {"ok": True}}, 60000, 99)
    nxt = bot.next_action(ok)
    revised = reference_solution(inst).trace[0]
    assert nxt.method == "apply" and sorted(nxt.params["move"]) == sorted(revised.passengers)


def test_fixated_answers_with_unrevised_schedule():
    inst = PuzzleInstance("river", 20, k=4)
    bot = agent("fixated")
    bot.next_action(initial_observation(inst, "s1", 64000, 200))
    answer = bot.next_action(_failure_obs(inst, "s1"))
    assert isinstance(answer, FinalAnswer)
    assert parse_trace("river", answer.text).moves == tuple(fixated_schedule(inst))


def test_budget_exhaustion_forces_answer():
    inst = PuzzleInstance("hanoi", 4)
    bot = agent("selfcorrecting")
    bot.next_action(initial_observation(inst, "s1", 64000, 200))
    out = bot.next_action(Observation("budget_exhausted", inst, "s1", None, 0, 0))
    assert isinstance(out, FinalAnswer) and out.text == "[]"


def test_observation_rejects_negative_budget():
    with pytest.raises(ValueError):
        Observation("task", PuzzleInstance("hanoi", 1), tokens_remaining=-1)
