"""Command-line interface: exit codes, reports, replays, codes, play."""

import json

import pytest
from click.testing import CliRunner

from cliquerace.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


# -- verification commands ----------------------------------------------------

def test_verify_k3_passes_and_writes_report(runner, tmp_path):
    report = tmp_path / "k3.json"
    result = runner.invoke(
        main, ["verify-k3", "--n", "5", "--report", str(report)]
    )
    assert result.exit_code == 0, result.output
    line = result.output.splitlines()[0]
    assert line.startswith("Verified n=5")
    assert "max_fp_moves=4" in line
    data = json.loads(report.read_text())
    assert data["outcome"] == "Verified"
    assert data["board_size"] == 5
    assert data["max_fp_moves"] == 4


def test_verify_exhausted_budget_exits_3(runner):
    result = runner.invoke(
        main,
        [
            "verify", "--n", "17", "--mode", "paper",
            "--budget-nodes", "2000", "--no-progress",
        ],
    )
    assert result.exit_code == 3
    assert result.output.startswith("ResourceLimit")
    assert "budget" in result.output


def test_verify_counterexample_exits_1_with_script(runner, tmp_path):
    report = tmp_path / "cex.json"
    result = runner.invoke(
        main,
        [
            "verify", "--n", "8", "--mode", "full", "--no-progress",
            "--report", str(report),
        ],
    )
    assert result.exit_code == 1
    assert result.output.startswith("CounterexampleFound")
    # The counterexample replays as a script (printed and in the report).
    assert "board 8" in result.output
    data = json.loads(report.read_text())
    assert data["outcome"] == "CounterexampleFound"
    assert data["counterexample"].startswith("board 8\nFP ")


def test_verify_rejects_unknown_mode(runner):
    result = runner.invoke(main, ["verify", "--mode", "maybe"])
    assert result.exit_code == 2


def test_board_size_env_override(runner):
    result = runner.invoke(
        main, ["play"], input="q\n", env={"CLIQUERACE_BOARD_N": "6"}
    )
    assert result.exit_code == 0
    assert "board K^6" in result.output


# -- replay -------------------------------------------------------------------

GOOD_SCRIPT = "board 6\nFP 0-1\nSP 2-3\nFP 1-2\n"


def _write_pair(tmp_path, script, sidecar):
    sp = tmp_path / "game.game"
    sp.write_text(script)
    (tmp_path / "game.json").write_text(json.dumps(sidecar))
    return str(sp)


def test_replay_green(runner, tmp_path):
    path = _write_pair(
        tmp_path,
        GOOD_SCRIPT,
        {"assertions": [{"predicate": "NoK4Either", "after_move": "all"}]},
    )
    result = runner.invoke(main, ["replay", path])
    assert result.exit_code == 0, result.output
    assert "game: ok checked=3" in result.output


def test_replay_failure_exits_1(runner, tmp_path):
    path = _write_pair(
        tmp_path,
        GOOD_SCRIPT,
        {"assertions": [{"predicate": "FPDoubleThreat", "after_move": 0}]},
    )
    result = runner.invoke(main, ["replay", path])
    assert result.exit_code == 1
    assert "game: FAIL" in result.output
    assert "completion edge" in result.output


def test_replay_missing_sidecar_is_a_usage_error(runner, tmp_path):
    script = tmp_path / "lonely.game"
    script.write_text(GOOD_SCRIPT)
    result = runner.invoke(main, ["replay", str(script)])
    assert result.exit_code == 2
    assert "sidecar" in result.output


def test_replay_missing_file_is_a_usage_error(runner):
    result = runner.invoke(main, ["replay", "no/such/file.game"])
    assert result.exit_code == 2


# -- canonical codes ----------------------------------------------------------

def test_canon_prints_identical_codes_for_relabelled_games(runner, tmp_path):
    a = tmp_path / "a.game"
    a.write_text("board 7\nFP 0-1\nSP 1-2\nFP 0-2\n")
    b = tmp_path / "b.game"
    # Same position under the relabelling 0->5, 1->3, 2->6, moves reordered.
    b.write_text("board 7\nFP 5-6\nSP 3-6\nFP 3-5\n")
    c = tmp_path / "c.game"
    c.write_text("board 7\nFP 0-1\nSP 1-2\nFP 2-3\n")

    outs = {}
    for path in (a, b, c):
        result = runner.invoke(main, ["canon", str(path)])
        assert result.exit_code == 0
        outs[path.name] = result.output.strip()
        int(outs[path.name], 16)  # a hex string
    assert outs["a.game"] == outs["b.game"]
    assert outs["a.game"] != outs["c.game"]


# -- interactive play ---------------------------------------------------------

def test_play_quits_cleanly(runner):
    result = runner.invoke(main, ["play", "--n", "17"], input="q\n")
    assert result.exit_code == 0
    assert "you are the second player" in result.output
    assert "engine claims" in result.output
    assert "game abandoned" in result.output


def test_play_rejects_malformed_and_taken_edges(runner):
    # First engine move on K^17 claims 0-1, so 0-1 is taken for the human.
    result = runner.invoke(
        main,
        ["play", "--n", "17"],
        input="zap\n0-1\n2-3\nq\n",
    )
    assert result.exit_code == 0
    assert "enter two vertex numbers" in result.output
    assert "rejected" in result.output
    # The reply to the legal move 2-3 appears before the quit.
    assert result.output.count("engine claims") >= 2


def test_play_refuses_boards_below_the_minimum(runner):
    result = runner.invoke(main, ["play", "--n", "4"], input="")
    assert result.exit_code == 2
