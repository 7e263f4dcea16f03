"""Canonical-code soundness.

Two directions, checked against brute force:

* invariance — relabelling a position never changes its code;
* exactness — equal codes imply colour-preserving isomorphism.

The exhaustive half enumerates *every* 2-coloured graph with at most
seven claimed edges on five vertices and compares code equality with a
naive canonical key (minimum encoding over all 120 relabellings), which
decides both directions at once.  The sampled half drives 10^5 random
positions on up to eight vertices through random permutations.
"""

from __future__ import annotations

import random
from itertools import combinations, permutations

import pytest

from cliquerace._kernel import canonical_form
from cliquerace.board import Player

from ._oracles import all_edges, apply_perm, edges_of
from .conftest import fill_kernel, random_history
from cliquerace import _kernel

FP, SP = int(Player.FP), int(Player.SP)


def _code(n, fp_edges, sp_edges):
    core = _kernel.BitBoard(n)
    for u, v in fp_edges:
        core.claim(u, v, FP)
    for u, v in sp_edges:
        core.claim(u, v, SP)
    code, _ = canonical_form(n, core.fp, core.sp)
    return code


def test_exhaustive_small_graphs_code_equality_is_isomorphism():
    n = 5
    slots = all_edges(n)  # 10 slots
    perms = [dict(enumerate(p)) for p in permutations(range(n))]
    # Permutation tables on edge-slot indices.
    slot_index = {e: i for i, e in enumerate(slots)}
    tables = []
    for perm in perms:
        tables.append(
            tuple(
                slot_index[
                    tuple(sorted((perm[slots[i][0]], perm[slots[i][1]])))
                ]
                for i in range(len(slots))
            )
        )

    def naive_key(coloring):
        best = None
        for tbl in tables:
            cand = tuple(coloring[tbl[i]] for i in range(len(slots)))
            if best is None or cand < best:
                best = cand
        return best

    by_code = {}
    checked = 0
    for k in range(0, 8):
        for edge_ids in combinations(range(len(slots)), k):
            for colors in range(2 ** k if k else 1):
                coloring = [0] * len(slots)
                for j, ei in enumerate(edge_ids):
                    coloring[ei] = FP if (colors >> j) & 1 == 0 else SP
                fp_edges = [slots[i] for i in range(10) if coloring[i] == FP]
                sp_edges = [slots[i] for i in range(10) if coloring[i] == SP]
                code = _code(n, fp_edges, sp_edges)
                key = naive_key(tuple(coloring))
                prev = by_code.get(code)
                if prev is None:
                    by_code[code] = key
                else:
                    assert prev == key, (
                        f"code collision across isomorphism classes: {fp_edges} {sp_edges}"
                    )
                checked += 1
    # Equal naive keys must also mean equal codes (no class split).
    seen_keys = {}
    for code, key in by_code.items():
        assert key not in seen_keys, "one isomorphism class got two codes"
        seen_keys[key] = code
    assert checked == sum(
        _comb(10, k) * (2 ** k) for k in range(0, 8)
    )


def _comb(n, k):
    from math import comb

    return comb(n, k)


@pytest.mark.parametrize("chunk", range(4))
def test_sampled_permutation_invariance(chunk):
    rng = random.Random(7000 + chunk)
    for _ in range(25_000):
        n = rng.choice([5, 6, 7, 8])
        hist = random_history(n, rng.randrange(0, 16), rng)
        core = fill_kernel(_kernel.BitBoard, hist)
        fp = edges_of(
            (u, v)
            for u in range(n)
            for v in range(u + 1, n)
            if core.state(u, v) == FP
        )
        sp = edges_of(
            (u, v)
            for u in range(n)
            for v in range(u + 1, n)
            if core.state(u, v) == SP
        )
        perm = dict(enumerate(rng.sample(range(n), n)))
        assert _code(n, fp, sp) == _code(
            n, apply_perm(fp, perm), apply_perm(sp, perm)
        )
