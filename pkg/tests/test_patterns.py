"""Pattern fixtures, subgraph matching, and plan mapping."""

import itertools
import random

from cliquerace.board import Player, new_board
from cliquerace.patterns import (
    PatternFixture,
    all_embeddings,
    fixtures,
    load_fixtures,
    match_pattern,
    plan_edges,
)

FORCING = [f"forcing_{i}" for i in range(1, 7)]
ENTRIES = [
    "split_entry_1",
    "split_entry_2",
    "split_entry_3",
    "split_entry_4",
    "pin_entry_1",
    "pin_entry_2",
]


# -- fixture catalogue --------------------------------------------------------

def test_catalogue_names_and_kinds():
    fx = load_fixtures()
    assert sorted(fx) == sorted(FORCING + ENTRIES)
    for name in FORCING:
        assert fx[name].kind == "forcing"
    for name in ENTRIES:
        assert fx[name].kind == "endgame_entry"


def test_fixtures_accessor_caches():
    assert fixtures() is fixtures()
    assert fixtures().keys() == load_fixtures().keys()


def test_forcing_fixtures_share_the_hub_shape():
    """Every forcing pattern holds the full a-star plus the bc base; the
    first one has already banked the extra cd edge of its finished line."""
    for name in FORCING:
        fx = fixtures()[name]
        others = [v for v in fx.vertices if v != "a"]
        star = {tuple(sorted(("a", v))) for v in others}
        extras = set(fx.fp_edges) - star
        assert star <= set(fx.fp_edges), name
        want = {("b", "c"), ("c", "d")} if name == "forcing_1" else {("b", "c")}
        assert extras == want, name
        assert fx.plan, name
        # No planned edge may be claimed in the pattern itself.
        assert set(fx.plan) <= fx.unclaimed_required
        # Safety pairs are hypothetical: never actually claimed.
        assert not fx.vulnerable & (fx.fp_edges | fx.sp_edges)


def test_only_the_sixth_forcing_pattern_has_an_optional_pair():
    for name in FORCING:
        fx = fixtures()[name]
        if name == "forcing_6":
            assert fx.optional_sp_edges == frozenset({("b", "d")})
        else:
            assert not fx.optional_sp_edges


def test_unclaimed_required_is_the_pair_complement():
    fx = fixtures()["forcing_1"]
    assert fx.unclaimed_required == frozenset(
        {("b", "e"), ("c", "e"), ("d", "e")}
    )
    for name in FORCING + ENTRIES:
        f = fixtures()[name]
        k = len(f.vertices)
        classified = (
            len(f.fp_edges)
            + len(f.sp_edges)
            + len(f.optional_sp_edges)
            + len(f.unclaimed_required)
        )
        assert classified == k * (k - 1) // 2, name


def test_entry_fixtures_fp_shape():
    """Each entry keeps the engine triangle plus pendant(s) intact."""
    for name in ENTRIES:
        fx = fixtures()[name]
        expected = 5 if name.startswith("split") else 4
        assert len(fx.fp_edges) == expected, name
        assert len(fx.sp_edges) in (4, 5), name
        assert not fx.plan  # entries switch routines, they carry no line


# -- matching vs a brute-force oracle ----------------------------------------

def _embeds(board, fixture):
    """All embeddings by naive permutation search (shares no engine code)."""
    core = board.kernel_view()
    touched = [v for v in range(board.n) if not board.is_fresh(v)]
    k = len(fixture.vertices)
    if fixture.kind == "endgame_entry" and len(touched) != k:
        return set()
    idx = {name: i for i, name in enumerate(fixture.vertices)}
    classes = {}
    for i, u in enumerate(fixture.vertices):
        for v in fixture.vertices[i + 1 :]:
            key = (u, v) if u < v else (v, u)
            if key in fixture.fp_edges:
                classes[(idx[u], idx[v])] = (1,)
            elif key in fixture.sp_edges:
                classes[(idx[u], idx[v])] = (2,)
            elif key in fixture.optional_sp_edges:
                classes[(idx[u], idx[v])] = (0, 2)
            else:
                classes[(idx[u], idx[v])] = (0,)
    found = set()
    for image in itertools.permutations(touched, k):
        if all(
            core.state(image[i], image[j]) in allowed
            for (i, j), allowed in classes.items()
        ):
            if fixture.kind == "endgame_entry":
                inside = set(image)
                if any(
                    not (u in inside and v in inside)
                    for p in (1, 2)
                    for (u, v) in core.edges(p)
                ):
                    continue
            found.add(image)
    return found


def _plant(board, fixture, slots, *, with_optional=False):
    """Claim the fixture's edges over the given board vertices."""
    vmap = dict(zip(fixture.vertices, slots))
    for u, v in sorted(fixture.fp_edges):
        board = board.claim(Player.FP, vmap[u], vmap[v])
    sp = sorted(fixture.sp_edges)
    if with_optional:
        sp += sorted(fixture.optional_sp_edges)
    for u, v in sp:
        board = board.claim(Player.SP, vmap[u], vmap[v])
    return board, vmap


def _as_images(embeddings, fixture):
    return {
        tuple(e[name] for name in fixture.vertices) for e in embeddings
    }


def test_all_embeddings_matches_brute_force_on_plants():
    rng = random.Random(404)
    for name in FORCING + ENTRIES:
        fx = fixtures()[name]
        k = len(fx.vertices)
        for trial in range(4):
            n = k + rng.randint(0, 2)
            slots = rng.sample(range(n), k)
            board, _ = _plant(
                new_board(n), fx, slots, with_optional=bool(trial % 2)
            )
            got = _as_images(all_embeddings(board, fx), fx)
            want = _embeds(board, fx)
            assert got == want, (name, trial)
            assert tuple(slots) in got, (name, trial)


def test_forcing_patterns_tolerate_outside_noise_entries_do_not():
    rng = random.Random(405)
    for name in FORCING + ENTRIES:
        fx = fixtures()[name]
        k = len(fx.vertices)
        n = k + 3
        slots = list(range(k))
        board, _ = _plant(new_board(n), fx, slots)
        # one extra claimed edge entirely outside the image
        noisy = board.claim(Player.SP, k, k + 1)
        got = _as_images(all_embeddings(noisy, fx), fx)
        want = _embeds(noisy, fx)
        assert got == want, name
        if fx.kind == "forcing":
            assert tuple(slots) in got, name
        else:
            assert got == set(), name


def test_wrong_colour_never_matches():
    fx = fixtures()["forcing_2"]
    k = len(fx.vertices)
    board = new_board(k)
    vmap = dict(zip(fx.vertices, range(k)))
    edges = sorted(fx.fp_edges)
    # Flip one pattern edge to the opponent.
    for u, v in edges[:-1]:
        board = board.claim(Player.FP, vmap[u], vmap[v])
    u, v = edges[-1]
    board = board.claim(Player.SP, vmap[u], vmap[v])
    assert all_embeddings(board, fx) == []
    assert match_pattern(board, fx) is None


def test_empty_board_has_no_embeddings():
    for name in FORCING + ENTRIES:
        assert all_embeddings(new_board(10), fixtures()[name]) == []


def test_match_pattern_returns_the_least_embedding():
    fx = fixtures()["pin_entry_2"]
    # b and c are interchangeable, so a clean plant embeds at least twice.
    board, vmap = _plant(new_board(8), fx, [3, 5, 4, 2, 7, 6])
    embeddings = all_embeddings(board, fx)
    assert len(embeddings) >= 2
    best = match_pattern(board, fx)
    key = tuple(best[name] for name in fx.vertices)
    assert key == min(
        tuple(e[name] for name in fx.vertices) for e in embeddings
    )
    # Roles are fixed by degrees even when names permute: a and p anchor.
    assert best["a"] == vmap["a"]
    assert best["p"] == vmap["p"]


def test_optional_pair_matches_claimed_and_unclaimed():
    fx = fixtures()["forcing_6"]
    k = len(fx.vertices)
    for with_optional in (False, True):
        board, vmap = _plant(
            new_board(k), fx, list(range(k)), with_optional=with_optional
        )
        got = match_pattern(board, fx)
        assert got is not None
        assert got == vmap


def test_plan_edges_maps_and_normalizes():
    fx = fixtures()["forcing_3"]
    embedding = {"a": 9, "b": 4, "c": 7, "d": 0, "e": 2, "f": 5}
    assert fx.plan == (("c", "f"), ("c", "d"), ("c", "e"))
    assert plan_edges(fx, embedding) == ((5, 7), (0, 7), (2, 7))


def test_plan_edges_round_trip_through_plants():
    rng = random.Random(406)
    for name in FORCING:
        fx = fixtures()[name]
        k = len(fx.vertices)
        slots = rng.sample(range(k + 2), k)
        board, vmap = _plant(new_board(k + 2), fx, slots)
        edges = plan_edges(fx, vmap)
        assert len(edges) == len(fx.plan)
        for u, v in edges:
            assert u < v
            assert board.state(u, v) is None, name
