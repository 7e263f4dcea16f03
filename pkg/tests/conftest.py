"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import random
from typing import List, Optional, Tuple

import pytest

from cliquerace import _kernel
from cliquerace._kernel import py_impl
from cliquerace.board import GameHistory, Player

Edge = Tuple[int, int]

BACKENDS = [("pure", py_impl.BitBoard)]
if _kernel.BACKEND != "pure":
    BACKENDS.insert(0, (_kernel.BACKEND, _kernel.BitBoard))


@pytest.fixture(params=BACKENDS, ids=[name for name, _ in BACKENDS])
def bitboard_cls(request):
    """Parametrise a test over every available kernel backend."""
    return request.param[1]


def random_history(
    n: int,
    plies: int,
    rng: random.Random,
    max_vertices: Optional[int] = None,
) -> GameHistory:
    """A legal alternating game prefix; no player completes a quad.

    ``max_vertices`` confines play to the first so-many vertices so small
    positions on large boards can be sampled.
    """
    span = max_vertices if max_vertices is not None else n
    hist = GameHistory(n)
    free: List[Edge] = [
        (u, v) for u in range(span) for v in range(u + 1, span)
    ]
    rng.shuffle(free)
    player = Player.FP
    core = py_impl.BitBoard(n)
    for u, v in free:
        if len(hist.moves) >= plies:
            break
        core.claim(u, v, int(player))
        if core.find_k4(int(player)) is not None:
            core.unclaim(u, v, int(player))
            continue
        hist.append(player, u, v)
        player = Player.SP if player is Player.FP else Player.FP
    return hist


def fill_kernel(cls, hist: GameHistory):
    """Replay a history onto a fresh kernel of the given backend."""
    core = cls(hist.n)
    for mv in hist.moves:
        core.claim(mv.u, mv.v, int(mv.player))
    return core
