"""The minimax oracle itself, validated against an independent naive
minimax and hand-checkable game facts before anything else trusts it."""

from __future__ import annotations

import random

import pytest

from cliquerace.board import Player, new_board
from cliquerace.verifier import OracleVerdict, minimax_oracle

from ._oracles import edges_of, first_player_forces
from .conftest import random_history

FP, SP = Player.FP, Player.SP


def _board_from(n, fp_edges, sp_edges):
    board = new_board(n)
    for u, v in fp_edges:
        board = board.claim(FP, u, v)
    for u, v in sp_edges:
        board = board.claim(SP, u, v)
    return board


def test_triangle_game_known_values():
    # Moving first on K^5, the triangle builder forces a win; the naive
    # minimax agrees, and both say the same on the empty K^4, where the
    # breaker side holds out.
    empty5 = new_board(5)
    assert minimax_oracle(empty5, FP, target="K3", max_plies=9) is OracleVerdict.FP_WIN
    assert first_player_forces(5, frozenset(), frozenset(), 3, 9, True)

    empty4 = new_board(4)
    assert (
        minimax_oracle(empty4, FP, target="K3", max_plies=12)
        is OracleVerdict.SP_SURVIVES
    )
    assert not first_player_forces(4, frozenset(), frozenset(), 3, 12, True)


def test_quad_game_small_positions_match_naive_minimax():
    rng = random.Random(42)
    agree = 0
    for trial in range(60):
        n = rng.choice([5, 6])
        hist = random_history(n, rng.randrange(0, 10), rng)
        board = hist.final_board()
        fp = edges_of((m.u, m.v) for m in hist.moves if m.player is FP)
        sp = edges_of((m.u, m.v) for m in hist.moves if m.player is SP)
        plies = 5
        mover = FP if len(hist.moves) % 2 == 0 else SP
        got = minimax_oracle(board, mover, target="K4", max_plies=plies)
        # Either way the question is whether the first player's colour
        # completes a quad first within the ply budget.
        want = first_player_forces(n, fp, sp, 4, plies, mover is FP)
        assert (got is OracleVerdict.FP_WIN) == want, (
            f"trial {trial}: n={n} fp={sorted(fp)} sp={sorted(sp)} mover={mover}"
        )
        agree += 1
    assert agree == 60


def test_oracle_sees_immediate_win_and_forced_block():
    # Five red edges on a quad with the sixth free: to-move side wins.
    fp = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]
    board = _board_from(6, fp, [])
    assert minimax_oracle(board, FP, max_plies=1) is OracleVerdict.FP_WIN
    # The defender to move must block; with the block in, shallow search
    # finds no forced win for the threat's owner.
    board2 = _board_from(6, fp, [(2, 3)])
    assert minimax_oracle(board2, FP, max_plies=3) is OracleVerdict.SP_SURVIVES


def test_double_threat_is_a_forced_win():
    # Two disjoint completions: defender blocks one, attacker takes the
    # other.  Oracle must see it at depth 3.
    fp = [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3)]
    board = _board_from(7, fp, [])
    # Completions 2-4 ({0,1,2,4}) and 3-4 ({0,1,3,4}): both open.
    assert minimax_oracle(board, SP, max_plies=3) is OracleVerdict.FP_WIN
