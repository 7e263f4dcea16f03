"""Pattern engine: threats, seeds, canonical codes and fixture matching.

A *threat* is a quad where one player owns five of the six pairs and the
sixth is still unclaimed; claiming it completes a K4.  A *seed* is one move
short of a threat.  Canonical codes give exact equality-up-to-isomorphism
for claimed subgraphs and are the backbone of the verifier's transposition
table.

Fixtures (loaded from ``data/patterns.toml``) describe partial positions:
the ``forcing`` family is matched as induced subpatterns anywhere on the
board, the ``endgame_entry`` family as exact isomorphs of the whole claimed
graph.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from cliquerace._kernel import BitBoard, canonical_form
from cliquerace.board import ColoredBoard, Player

__all__ = [
    "CanonicalCode",
    "PatternFixture",
    "ThreatRecord",
    "ThreatSeed",
    "all_embeddings",
    "canonical_code",
    "completion_edges",
    "double_threat",
    "find_k4",
    "load_fixtures",
    "match_pattern",
    "plan_edges",
    "threat_seeds",
    "threats",
]

Edge = Tuple[int, int]

CanonicalCode = bytes

MARK_SP_FIRST = 1
MARK_SP_LAST = 2


@dataclass(frozen=True)
class ThreatRecord:
    player: Player
    quad: Tuple[int, int, int, int]
    missing: Edge


@dataclass(frozen=True)
class ThreatSeed:
    player: Player
    quad: Tuple[int, int, int, int]
    kind: str  # "C4" or "TrianglePlusEdge"


def threats(board: ColoredBoard, player: Player) -> List[ThreatRecord]:
    core = board.kernel_view()
    return [
        ThreatRecord(player, quad, missing)
        for quad, missing in core.threats(int(player))
    ]


def completion_edges(board: ColoredBoard, player: Player) -> List[Edge]:
    """Unclaimed edges that would complete a K4 for *player*, sorted."""
    return board.kernel_view().completion_edges(int(player))


def double_threat(board: ColoredBoard, player: Player) -> bool:
    return len(completion_edges(board, player)) >= 2


def threat_seeds(board: ColoredBoard, player: Player) -> List[ThreatSeed]:
    core = board.kernel_view()
    return [
        ThreatSeed(player, quad, kind)
        for quad, kind in core.threat_seeds(int(player))
    ]


def find_k4(board: ColoredBoard, player: Player) -> Optional[Tuple[int, int, int, int]]:
    """Lexicographically least fully-claimed quad, or None."""
    return board.kernel_view().find_k4(int(player))


def canonical_code(
    board: ColoredBoard,
    labels: Optional[Dict[str, Sequence[int]]] = None,
    sp_first: Optional[Edge] = None,
    sp_last: Optional[Edge] = None,
) -> CanonicalCode:
    code, _ = canonical_placement(board, labels, sp_first, sp_last)
    return code


def canonical_placement(
    board: ColoredBoard,
    labels: Optional[Dict[str, Sequence[int]]] = None,
    sp_first: Optional[Edge] = None,
    sp_last: Optional[Edge] = None,
) -> Tuple[CanonicalCode, Dict[int, int]]:
    """Canonical code plus the vertex -> canonical position map.

    Two boards get equal codes iff some vertex bijection maps claimed edges
    onto claimed edges preserving owner, the role ``labels`` (name-for-name),
    and the two optional marked edges.  Vertices without claimed edges or
    labels are interchangeable and never affect the code.
    """
    core = board.kernel_view()
    vertex_classes: Optional[Dict[int, int]] = None
    if labels:
        vertex_classes = {}
        for rank, name in enumerate(sorted(labels)):
            for v in labels[name]:
                vertex_classes[v] = vertex_classes.get(v, 0) * 64 + rank + 1
    edge_marks: Dict[Edge, int] = {}
    if sp_first is not None:
        e = tuple(sorted(sp_first))
        edge_marks[e] = edge_marks.get(e, 0) | MARK_SP_FIRST
    if sp_last is not None:
        e = tuple(sorted(sp_last))
        edge_marks[e] = edge_marks.get(e, 0) | MARK_SP_LAST
    return canonical_form(
        core.n, core.fp, core.sp, vertex_classes, edge_marks or None
    )


# -- fixtures ------------------------------------------------------------

@dataclass(frozen=True)
class PatternFixture:
    """A partial position over named pattern vertices.

    ``unclaimed_required`` is every vertex pair not otherwise classified:
    matching demands those pairs be free on the board (the pattern is an
    induced coloured subgraph of the claimed union).
    """

    name: str
    kind: str  # "forcing" | "endgame_entry"
    vertices: Tuple[str, ...]
    fp_edges: FrozenSet[Tuple[str, str]]
    sp_edges: FrozenSet[Tuple[str, str]]
    optional_sp_edges: FrozenSet[Tuple[str, str]] = frozenset()
    vulnerable: FrozenSet[Tuple[str, str]] = frozenset()
    plan: Tuple[Tuple[str, str], ...] = ()

    @property
    def unclaimed_required(self) -> FrozenSet[Tuple[str, str]]:
        taken = self.fp_edges | self.sp_edges | self.optional_sp_edges
        out = set()
        for i, u in enumerate(self.vertices):
            for v in self.vertices[i + 1 :]:
                if _key(u, v) not in taken:
                    out.add(_key(u, v))
        return frozenset(out)


def _key(u: str, v: str) -> Tuple[str, str]:
    return (u, v) if u < v else (v, u)


def _parse_edges(items: Sequence[str]) -> FrozenSet[Tuple[str, str]]:
    out = set()
    for item in items:
        if len(item) != 2 or item[0] == item[1]:
            raise ValueError(f"bad pattern edge {item!r}")
        out.add(_key(item[0], item[1]))
    return frozenset(out)


def load_fixtures() -> Dict[str, PatternFixture]:
    raw = resources.files("cliquerace").joinpath("data/patterns.toml").read_bytes()
    data = tomllib.loads(raw.decode())
    fixtures: Dict[str, PatternFixture] = {}
    for name, entry in data.items():
        fixtures[name] = PatternFixture(
            name=name,
            kind=entry["kind"],
            vertices=tuple(entry["vertices"]),
            fp_edges=_parse_edges(entry["fp"]),
            sp_edges=_parse_edges(entry.get("sp", ())),
            optional_sp_edges=_parse_edges(entry.get("optional_sp", ())),
            vulnerable=_parse_edges(entry.get("vulnerable", ())),
            plan=tuple(
                _key(e[0], e[1]) for e in entry.get("plan", ())
            ),
        )
    return fixtures


_FIXTURES: Optional[Dict[str, PatternFixture]] = None


def fixtures() -> Dict[str, PatternFixture]:
    global _FIXTURES
    if _FIXTURES is None:
        _FIXTURES = load_fixtures()
    return _FIXTURES


def _pair_requirement(fixture: PatternFixture) -> List[Tuple[int, int, str]]:
    """Per pattern-vertex-index pair: required board state class."""
    idx = {name: i for i, name in enumerate(fixture.vertices)}
    reqs = []
    for i, u in enumerate(fixture.vertices):
        for v in fixture.vertices[i + 1 :]:
            key = _key(u, v)
            if key in fixture.fp_edges:
                cls = "fp"
            elif key in fixture.sp_edges:
                cls = "sp"
            elif key in fixture.optional_sp_edges:
                cls = "sp_or_free"
            else:
                cls = "free"
            reqs.append((idx[u], idx[v], cls))
    return reqs


def all_embeddings(
    board: ColoredBoard, fixture: PatternFixture
) -> List[Dict[str, int]]:
    """Every injective placement of the fixture onto the board.

    For ``forcing`` fixtures the pattern is matched as an induced coloured
    subgraph (board may hold anything outside the image).  For
    ``endgame_entry`` fixtures the image must in addition cover every vertex
    that carries a claimed edge, i.e. the whole claimed graph is isomorphic
    to the pattern.
    """
    core = board.kernel_view()
    k = len(fixture.vertices)
    exact = fixture.kind == "endgame_entry"

    touched = [v for v in range(core.n) if not core.is_fresh(v)]
    if exact:
        if len(touched) != k:
            return []
        candidates = touched
        fp_count = core.edge_count(1)
        if fp_count != len(fixture.fp_edges) or core.edge_count(2) != len(
            fixture.sp_edges
        ):
            return []
    else:
        # Fresh vertices can stand in for pattern vertices whose pattern
        # edges are all "free"; none of the shipped fixtures has such a
        # vertex, so touched vertices suffice.
        candidates = touched

    reqs = _pair_requirement(fixture)
    by_vertex: List[List[Tuple[int, int, str]]] = [[] for _ in range(k)]
    for i, j, cls in reqs:
        hi = max(i, j)
        by_vertex[hi].append((min(i, j), hi, cls))

    out: List[Dict[str, int]] = []
    image: List[int] = []

    def ok(i: int, j: int, cls: str) -> bool:
        s = core.state(image[i], image[j])
        if cls == "fp":
            return s == 1
        if cls == "sp":
            return s == 2
        if cls == "free":
            return s == 0
        return s in (0, 2)

    def extend(depth: int) -> None:
        if depth == k:
            out.append(
                {name: image[i] for i, name in enumerate(fixture.vertices)}
            )
            return
        for v in candidates:
            if v in image:
                continue
            image.append(v)
            if all(ok(i, j, cls) for i, j, cls in by_vertex[depth]):
                extend(depth + 1)
            image.pop()

    extend(0)
    return out


def match_pattern(
    board: ColoredBoard, fixture: PatternFixture
) -> Optional[Dict[str, int]]:
    """Lexicographically least embedding of *fixture*, or None.

    Least by the tuple of board vertices in pattern-vertex order.
    """
    embeddings = all_embeddings(board, fixture)
    if not embeddings:
        return None
    return min(
        embeddings, key=lambda e: tuple(e[name] for name in fixture.vertices)
    )


def plan_edges(
    fixture: PatternFixture, embedding: Dict[str, int]
) -> Tuple[Edge, ...]:
    """The fixture's forced line mapped through *embedding* to board edges."""
    out = []
    for a, b in fixture.plan:
        u, v = embedding[a], embedding[b]
        out.append((u, v) if u < v else (v, u))
    return tuple(out)
