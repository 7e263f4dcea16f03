"""Cross-validation of the verifier's building blocks on small boards.

* Triangle game over K^5: every node of the engine's own game tree is
  independently confirmed as a forced win by the minimax oracle.
* Quad-game tactical sub-verdicts (win available / double threat /
  double forcible in one move) match the oracle exactly, both
  directions, on thousands of sampled trace positions.
* The transposition cache and the worker split never change a report.
"""

from __future__ import annotations

import random

import pytest

from cliquerace.board import Player, new_board
from cliquerace.patterns import double_threat
from cliquerace.strategy import StrategyState, fp_move, k3_move, note_sp_move
from cliquerace.verifier import (
    OracleVerdict,
    VerificationMode,
    VerificationOutcome,
    minimax_oracle,
    verify,
    verify_k3,
    minimax_oracle as oracle,
)
from cliquerace import _kernel

from .conftest import fill_kernel, random_history

FP, SP = int(Player.FP), int(Player.SP)


def _board_of(core, n):
    board = new_board(n)
    for u in range(n):
        for v in range(u + 1, n):
            s = core.state(u, v)
            if s == FP:
                board = board.claim(Player.FP, u, v)
            elif s == SP:
                board = board.claim(Player.SP, u, v)
    return board


def test_triangle_tree_on_k5_matches_oracle_at_every_node():
    """Walk the engine's triangle tree over K^5; at each node the oracle
    must confirm a forced triangle within the remaining budget."""
    n = 5
    seen = set()
    checked = 0

    def walk(core, state, fp_used):
        nonlocal checked
        dec = k3_move(core, state)
        u, v = dec.edge
        core.claim(u, v, FP)
        try:
            fp_used_now = fp_used + 1
            tri = _has_triangle(core, FP)
            if not tri:
                assert fp_used_now < 4, "triangle must land within four moves"
                remaining = 2 * (4 - fp_used_now)
                board = _board_of(core, n)
                assert (
                    oracle(board, Player.SP, target="K3", max_plies=remaining)
                    is OracleVerdict.FP_WIN
                )
                checked += 1
                free = [
                    (a, b)
                    for a in range(n)
                    for b in range(a + 1, n)
                    if core.state(a, b) == 0
                ]
                for a, b in free:
                    core.claim(a, b, SP)
                    key = (tuple(core.fp), tuple(core.sp))
                    try:
                        assert not _has_triangle(core, SP), (
                            "opponent completed a triangle first"
                        )
                        if key not in seen:
                            seen.add(key)
                            nxt = note_sp_move(dec.next_state, (a, b))
                            walk(core, nxt, fp_used_now)
                    finally:
                        core.unclaim(a, b, SP)
        finally:
            core.unclaim(u, v, FP)

    walk(_kernel.BitBoard(n), StrategyState(), 0)
    # The raw-keyed deduplicated tree over K^5 is small; the point is that
    # every interior engine node got an oracle confirmation.
    assert checked >= 15


def _has_triangle(core, who):
    n = core.n
    verts = [v for v in range(n) if core.degree(v, who) >= 2]
    for i, a in enumerate(verts):
        for b in verts[i + 1 :]:
            if core.state(a, b) != who:
                continue
            for c in verts:
                if c in (a, b):
                    continue
                if core.state(a, c) == who and core.state(b, c) == who:
                    return True
    return False


def _sampled_positions(count, seed):
    """Quad-game trace positions touching at most seven vertices."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.choice([7, 8, 9])
        span = 7
        hist = random_history(n, rng.randrange(4, 18), rng, max_vertices=span)
        out.append((n, hist))
    return out


@pytest.mark.parametrize("chunk", range(4))
def test_tactical_subverdicts_match_oracle(chunk):
    """Exact two-way agreement between kernel sub-verdicts and minimax.

    win available      <=> oracle(FP to move, 1 ply)  == FP_WIN
    double threat      <=> oracle(SP to move, 2 plies) == FP_WIN
    double forcible    <=> oracle(FP to move, 3 plies) == FP_WIN
    """
    for n, hist in _sampled_positions(2500, 9100 + chunk):
        core = fill_kernel(_kernel.BitBoard, hist)
        board = _board_of(core, n)

        win_now = bool(core.completion_edges(FP))
        assert win_now == (
            oracle(board, Player.FP, max_plies=1) is OracleVerdict.FP_WIN
        )

        dbl = double_threat(board, Player.FP)
        sp_win_now = bool(core.completion_edges(SP))
        want_dbl = (
            oracle(board, Player.SP, max_plies=2) is OracleVerdict.FP_WIN
        )
        if sp_win_now:
            # With his own completion available the opponent just wins.
            assert not want_dbl
        else:
            assert dbl == want_dbl, (
                f"double-threat mismatch: n={n} "
                f"moves={[(int(m.player), m.u, m.v) for m in hist.moves]}"
            )

        if not win_now and not sp_win_now:
            forcible = False
            for u in range(n):
                for v in range(u + 1, n):
                    if core.state(u, v) != 0:
                        continue
                    core.claim(u, v, FP)
                    if len(core.completion_edges(FP)) >= 2:
                        forcible = True
                    core.unclaim(u, v, FP)
                    if forcible:
                        break
                if forcible:
                    break
            assert (forcible or win_now) == (
                oracle(board, Player.FP, max_plies=3) is OracleVerdict.FP_WIN
            ), (
                f"forcible-double mismatch: n={n} "
                f"moves={[(int(m.player), m.u, m.v) for m in hist.moves]}"
            )


def test_transposition_cache_soundness_small_boards():
    """With and without the cache the verifier tells the same story."""
    for n in (5, 6):
        a = verify(n, VerificationMode.PAPER_RESTRICTED, 21, use_cache=True)
        b = verify(n, VerificationMode.PAPER_RESTRICTED, 21, use_cache=False)
        assert a.outcome == b.outcome
        assert a.max_fp_moves == b.max_fp_moves
        if a.counterexample is not None or b.counterexample is not None:
            assert a.counterexample.moves == b.counterexample.moves


def test_worker_split_does_not_change_the_report():
    for n in (5, 6):
        one = verify(n, VerificationMode.PAPER_RESTRICTED, 21, workers=1)
        many = verify(n, VerificationMode.PAPER_RESTRICTED, 21, workers=4)
        assert one.outcome == many.outcome
        assert one.max_fp_moves == many.max_fp_moves
        if one.counterexample is not None:
            assert many.counterexample is not None
            assert one.counterexample.moves == many.counterexample.moves


def test_k3_verification_small_boards():
    for n in (5, 6):
        rep = verify_k3(n)
        assert rep.outcome is VerificationOutcome.VERIFIED
        assert rep.max_fp_moves == 4
