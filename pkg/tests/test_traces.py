from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from puzzlebench.errors import ParseError
from puzzlebench.puzzles import BlocksMove, CheckerMove, HanoiMove, PuzzleKind, river_move
from puzzlebench.traces import Trace, format_trace, parse_trace


def test_hanoi_round_trip():
    trace = parse_trace("hanoi", "[[1,0,2],[2,0,1]]")
    assert trace.moves == (HanoiMove(1, 0, 2), HanoiMove(2, 0, 1))
    assert format_trace(trace) == "[[1,0,2],[2,0,1]]"


def test_empty():
    assert len(parse_trace("hanoi", "[]")) == 0
    assert format_trace(Trace("hanoi", ())) == "[]"


def test_river_ids_sorted():
    trace = parse_trace("river", '[["a1","a2"],["a1"]]')
    assert len(trace) == 2
    assert format_trace(Trace("river", [river_move("a1", "A1")])) == '[["A1","a1"]]'


def test_whitespace_and_prefix():
    text = 'moves = [ [1, 0, 2] ,\n [2,0,1]\t]'
    assert format_trace(parse_trace("hanoi", text)) == "[[1,0,2],[2,0,1]]"


def test_escaped_strings_go_through_strict_parser():
    with pytest.raises(ParseError):
        parse_trace("river", '[["a\\u0031"]]')


@pytest.mark.parametrize("kind,text", [
    ("hanoi", "[[1,0]]"),
    ("hanoi", "[[1,0,2]"),
    ("hanoi", "[[1,0,2.5]]"),
    ("hanoi", "[[1,0,2]] trailing"),
    ("checker", '[["0",1]]'),
    ("river", "[[]]"),
    ("river", '[["b1"]]'),
    ("blocks", "[[true,1]]"),
    ("hanoi", ""),
])
def test_malformed(kind, text):
    with pytest.raises(ParseError) as exc:
        parse_trace(kind, text)
    assert exc.value.position >= 0


def test_error_position_points_at_problem():
    with pytest.raises(ParseError) as exc:
        parse_trace("hanoi", "[[1,0,2],[1,x,2]]")
    assert exc.value.position == 12


def test_trace_rejects_foreign_moves():
    with pytest.raises(TypeError):
        Trace("hanoi", [CheckerMove(0, 1)])


ints = st.integers(-5, 50)
_moves = {
    PuzzleKind.HANOI: st.builds(HanoiMove, ints, ints, ints),
    PuzzleKind.CHECKER: st.builds(CheckerMove, ints, ints),
    PuzzleKind.BLOCKS: st.builds(BlocksMove, ints, ints),
    PuzzleKind.RIVER: st.sets(st.sampled_from(["a1", "a2", "a10", "A1", "A2", "A10"]), min_size=1)
                        .map(lambda s: river_move(*s)),
}


@settings(max_examples=150)
@given(st.sampled_from(list(PuzzleKind)).flatmap(
    lambda k: st.tuples(st.just(k), st.lists(_moves[k], max_size=12))))
def test_format_parse_identity(kind_moves):
    kind, moves = kind_moves
    trace = Trace(kind, moves)
    text = format_trace(trace)
    assert parse_trace(kind, text) == trace
    assert format_trace(parse_trace(kind, text)) == text


@given(st.text(max_size=40))
def test_parser_never_crashes(text):
    for kind in PuzzleKind:
        try:
            parse_trace(kind, text)
        except ParseError:
            pass
