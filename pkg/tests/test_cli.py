from __future__ import annotations

import pytest

from puzzlebench.cli import parse_range, run_cli
from puzzlebench.harness import load_episodes, persist_episodes


def run(capsys, *argv):
    code = run_cli(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_hanoi(capsys):
    code, out, _ = run(capsys, "solve", "--kind", "hanoi", "--n", "3")
    assert code == 0
    assert out.strip() == "[[1,0,2],[2,0,1],[1,2,1],[3,0,2],[1,1,0],[2,1,2],[1,0,2]]"


def test_solve_unsolvable(capsys):
    code, out, _ = run(capsys, "solve", "--kind", "river", "--n", "6", "--k", "3")
    assert code == 1 and out.startswith("UNSOLVABLE (states_explored=")


def test_model_table(capsys):
    code, out, _ = run(capsys, "model", "--budget", "64000", "--tokens-per-move", "8", "--n-range", "1..20")
    assert code == 0
    rows = [line.split(",") for line in out.splitlines()[1:]]
    first_over = next(int(r[0]) for r in rows if int(r[2]) > 64000)
    assert first_over == 13 and len(rows) == 20


@pytest.mark.parametrize("argv", [
    ["solve", "--kind", "hanoi", "--n", "4"],
    ["validate", "--kind", "hanoi", "--n", "4", "--trace-file", "x"],
    ["model", "--n-range", "1..12", "--p-list", "0.999"],
])
def test_byte_stable(capsys, tmp_path, argv):
    if argv[0] == "validate":
        (tmp_path / "x").write_text("[[1,0,1]]")
        argv = argv[:-1] + [str(tmp_path / "x")]
    first = run(capsys, *argv)
    assert first == run(capsys, *argv)


@pytest.mark.parametrize("kind,n,k", [("hanoi", 6, None), ("checker", 5, None), ("river", 3, 2), ("river", 5, 3),
                                      ("river", 12, 4), ("blocks", 9, None)])
def test_validate_accepts_solve_output(capsys, tmp_path, kind, n, k):
    extra = ["--k", str(k)] if k else []
    code, out, _ = run(capsys, "solve", "--kind", kind, "--n", str(n), *extra)
    assert code == 0
    path = tmp_path / "t.txt"
    path.write_text(out)
    code, out, _ = run(capsys, "validate", "--kind", kind, "--n", str(n), *extra, "--trace-file", str(path))
    assert code == 0 and out.startswith("status=Solved")


def test_validate_reports_failure(capsys, tmp_path):
    path = tmp_path / "t.txt"
    path.write_text("[[1,0,2],[2,0,2]]")
    code, out, _ = run(capsys, "validate", "--kind", "hanoi", "--n", "2", "--trace-file", str(path))
    assert code == 1
    assert "first_failure_index=1" in out and "reason=LargerOnSmaller" in out


@pytest.mark.parametrize("argv", [
    [],
    ["solve", "--kind", "hanoi"],
    ["solve", "--kind", "nim", "--n", "3"],
    ["solve", "--kind", "river", "--n", "3"],
    ["model", "--n-range", "5..1"],
    ["sweep", "--agent", "noisy", "--kind", "hanoi", "--n-range", "1..2"],
    ["validate", "--kind", "hanoi", "--n", "2", "--trace-file", "/nonexistent/x"],
])
def test_usage_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and err and not out


def test_sweep_and_replay(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("PUZZLEBENCH_OUT_DIR", str(tmp_path))
    monkeypatch.setenv("PUZZLEBENCH_SEED", "11")
    code, out, _ = run(capsys, "sweep", "--agent", "noisy:p=0.99", "--agent", "perfect", "--kind", "hanoi",
                       "--n-range", "3..5", "--samples", "4", "--resamples", "200")
    assert code == 0
    assert out == (tmp_path / "report.csv").read_text()
    assert len(out.splitlines()) == 7
    records = load_episodes(tmp_path / "episodes.jsonl")
    assert len(records) == 24
    code, out, _ = run(capsys, "replay", "--episodes", str(tmp_path / "episodes.jsonl"))
    assert code == 0 and "0 verdict changes" in out


def test_replay_detects_tampering(capsys, tmp_path):
    code, _, _ = run(capsys, "sweep", "--agent", "perfect", "--kind", "hanoi", "--n-range", "2",
                     "--samples", "1", "--resamples", "200", "--out-dir", str(tmp_path))
    records = load_episodes(tmp_path / "episodes.jsonl")
    records[0].answer_or_transcript = "[[1,0,1]]"
    persist_episodes(records, tmp_path / "bad.jsonl")
    code, out, _ = run(capsys, "replay", "--episodes", str(tmp_path / "bad.jsonl"))
    assert code == 1 and "1 verdict changes" in out


def test_parse_range():
    assert parse_range("1..3") == [1, 2, 3]
    assert parse_range("4") == [4]
    assert parse_range("2,5") == [2, 5]
