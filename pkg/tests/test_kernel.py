"""Kernel correctness: every fast query equals the naive oracle, and the
compiled backend equals the pure one bit for bit."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from cliquerace import _kernel
from cliquerace._kernel import py_impl
from cliquerace.board import Player

from ._oracles import (
    all_edges,
    completion_edges,
    edges_of,
    find_k4,
    k4minus_creating,
    threat_seeds,
    threats,
)
from .conftest import BACKENDS, fill_kernel, random_history

FP, SP = int(Player.FP), int(Player.SP)


def _edge_sets(core, n):
    fp = edges_of(
        (u, v) for u in range(n) for v in range(u + 1, n) if core.state(u, v) == FP
    )
    sp = edges_of(
        (u, v) for u in range(n) for v in range(u + 1, n) if core.state(u, v) == SP
    )
    return fp, sp


@pytest.mark.parametrize("seed", range(40))
def test_queries_match_naive_oracle(bitboard_cls, seed):
    rng = random.Random(seed)
    n = rng.choice([5, 6, 7, 8])
    hist = random_history(n, rng.randrange(0, n * (n - 1) // 2), rng)
    core = fill_kernel(bitboard_cls, hist)
    fp, sp = _edge_sets(core, n)

    for player, own, other in ((FP, fp, sp), (SP, sp, fp)):
        assert core.completion_edges(player) == completion_edges(n, own, other)
        got_threats = {(tuple(q), tuple(e)) for q, e in core.threats(player)}
        want_threats = {(q, e) for q, e in threats(n, own, other)}
        assert got_threats == want_threats
        got_seeds = {tuple(q) for q, _kind in core.threat_seeds(player)}
        assert got_seeds == set(threat_seeds(n, own, other))
        if not completion_edges(n, own, other):
            # The kernel documents this query as meaningful only while no
            # completion stands (five-after-claim can then never mean six).
            assert sorted(core.k4minus_creating_edges(player)) == k4minus_creating(
                n, own, other
            )
        got_k4 = core.find_k4(player)
        want_k4 = find_k4(n, own)
        assert (got_k4 is None) == (want_k4 is None)
        if want_k4 is not None:
            assert tuple(got_k4) == want_k4


@pytest.mark.parametrize("seed", range(25))
def test_backends_agree(seed):
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend unavailable")
    rng = random.Random(1000 + seed)
    n = rng.choice([5, 7, 9, 12, 17])
    hist = random_history(n, rng.randrange(0, 30), rng)
    fast = fill_kernel(BACKENDS[0][1], hist)
    pure = fill_kernel(py_impl.BitBoard, hist)

    for u, v in all_edges(n):
        assert fast.state(u, v) == pure.state(u, v)
    for player in (FP, SP):
        assert list(fast.completion_edges(player)) == list(
            pure.completion_edges(player)
        )
        assert [tuple(q) for q, _ in fast.threats(player)] == [
            tuple(q) for q, _ in pure.threats(player)
        ]
        assert sorted(map(tuple, fast.k4minus_creating_edges(player))) == sorted(
            map(tuple, pure.k4minus_creating_edges(player))
        )
        fk, pk = fast.find_k4(player), pure.find_k4(player)
        assert (fk is None) == (pk is None)
        if fk is not None:
            assert tuple(fk) == tuple(pk)
    for v in range(n):
        assert fast.degree(v, FP) == pure.degree(v, FP)
        assert fast.degree(v, SP) == pure.degree(v, SP)
        assert fast.is_fresh(v) == pure.is_fresh(v)


def test_claim_unclaim_roundtrip(bitboard_cls):
    core = bitboard_cls(8)
    core.claim(0, 1, FP)
    core.claim(2, 3, SP)
    before = [core.state(u, v) for u, v in all_edges(8)]
    core.claim(4, 5, FP)
    core.unclaim(4, 5, FP)
    after = [core.state(u, v) for u, v in all_edges(8)]
    assert before == after


@given(st.integers(5, 8), st.randoms(use_true_random=False))
@settings(max_examples=60, deadline=None)
def test_find_k4_iff_naive(n, rng):
    """Property: the kernel sees a quad exactly when one exists."""
    plies = rng.randrange(0, n * (n - 1) // 2)
    h = random_history(n, plies, rng)
    core = fill_kernel(_kernel.BitBoard, h)
    # random_history never lets a quad complete, so force a few claims.
    extra = [e for e in all_edges(n) if core.state(*e) == 0][:6]
    for u, v in extra:
        core.claim(u, v, FP)
    fp, sp = _edge_sets(core, n)
    assert (core.find_k4(FP) is not None) == (find_k4(n, fp) is not None)
    assert (core.find_k4(SP) is not None) == (find_k4(n, sp) is not None)
