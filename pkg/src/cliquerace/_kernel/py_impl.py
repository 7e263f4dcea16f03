"""Pure-Python board kernel: bitmask adjacency plus the hot scans.

Everything in here operates on plain integers and lists so that the optional
compiled twin (``cliquerace._fastcore``) can mirror it field by field with
C-level types.  Boards are capped at 64 vertices so a row of the adjacency
matrix always fits one machine word.

The kernel is deliberately free of game semantics: it knows about two edge
colours (1 = first player, 2 = second player), complete subgraphs on four
vertices, near-complete ones missing a single pair, and exact canonical
labelling of the claimed subgraph.  Turn order, stages and strategy live in
higher layers.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

MAX_VERTICES = 64

FP = 1
SP = 2

BACKEND = "pure"

Edge = Tuple[int, int]
Quad = Tuple[int, int, int, int]


def _bits(mask: int) -> Iterable[int]:
    """Yield set bit positions of *mask* in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class BitBoard:
    """Mutable two-coloured edge set over ``n`` vertices.

    ``fp[v]`` / ``sp[v]`` are adjacency bitmasks.  Mutation is in place
    (``claim`` / ``unclaim``); callers that need persistence copy first.
    """

    __slots__ = ("n", "fp", "sp", "touched")

    def __init__(self, n: int):
        if not 1 <= n <= MAX_VERTICES:
            raise ValueError(f"board size must be in 1..{MAX_VERTICES}, got {n}")
        self.n = n
        self.fp: List[int] = [0] * n
        self.sp: List[int] = [0] * n
        self.touched: int = 0

    def copy(self) -> "BitBoard":
        b = BitBoard.__new__(BitBoard)
        b.n = self.n
        b.fp = self.fp[:]
        b.sp = self.sp[:]
        b.touched = self.touched
        return b

    def adj(self, player: int) -> List[int]:
        return self.fp if player == FP else self.sp

    def state(self, u: int, v: int) -> int:
        if (self.fp[u] >> v) & 1:
            return FP
        if (self.sp[u] >> v) & 1:
            return SP
        return 0

    def claim(self, u: int, v: int, player: int) -> None:
        a = self.adj(player)
        a[u] |= 1 << v
        a[v] |= 1 << u
        self.touched |= (1 << u) | (1 << v)

    def unclaim(self, u: int, v: int, player: int) -> None:
        a = self.adj(player)
        a[u] &= ~(1 << v)
        a[v] &= ~(1 << u)
        if not (self.fp[u] | self.sp[u]):
            self.touched &= ~(1 << u)
        if not (self.fp[v] | self.sp[v]):
            self.touched &= ~(1 << v)

    def edge_count(self, player: int) -> int:
        return sum(m.bit_count() for m in self.adj(player)) // 2

    def degree(self, v: int, player: int) -> int:
        return self.adj(player)[v].bit_count()

    def is_fresh(self, v: int) -> bool:
        return not (self.touched >> v) & 1

    def fresh_vertex(self) -> int:
        """Lowest-index vertex with no claimed edge, or -1 if none."""
        for v in range(self.n):
            if not (self.touched >> v) & 1:
                return v
        return -1

    def edges(self, player: int) -> List[Edge]:
        a = self.adj(player)
        out = []
        for u in range(self.n):
            for v in _bits(a[u] >> (u + 1)):
                out.append((u, u + 1 + v))
        return out

    def unclaimed_edges(self) -> List[Edge]:
        out = []
        for u in range(self.n):
            blocked = (self.fp[u] | self.sp[u]) >> (u + 1)
            free = ((1 << (self.n - u - 1)) - 1) & ~blocked
            for v in _bits(free):
                out.append((u, u + 1 + v))
        return out

    # -- clique scans ---------------------------------------------------

    def completes_k4(self, u: int, v: int, player: int) -> bool:
        """Would claiming (u, v) give *player* a complete quad?"""
        a = self.adj(player)
        common = a[u] & a[v]
        for w in _bits(common):
            if a[w] & common & ~((1 << (w + 1)) - 1):
                return True
        return False

    def completes_k3(self, u: int, v: int, player: int) -> bool:
        """Would claiming (u, v) give *player* a triangle?"""
        a = self.adj(player)
        return bool(a[u] & a[v])

    def has_k3(self, player: int) -> bool:
        a = self.adj(player)
        for u in range(self.n):
            row = a[u] >> (u + 1)
            for dv in _bits(row):
                if a[u + 1 + dv] & a[u]:
                    return True
        return False

    def in_triangle(self, v: int, player: int) -> bool:
        """Is *v* a corner of some fully-claimed triangle of *player*?"""
        a = self.adj(player)
        row = a[v]
        for w in _bits(row):
            if a[w] & row & ~((1 << (w + 1)) - 1):
                return True
        return False

    def find_k4(self, player: int) -> Optional[Quad]:
        """Lexicographically least fully-claimed quad of *player*, if any."""
        a = self.adj(player)
        verts = [v for v in range(self.n) if a[v].bit_count() >= 3]
        for i, u in enumerate(verts):
            for v in verts[i + 1 :]:
                if not (a[u] >> v) & 1:
                    continue
                common = a[u] & a[v] & ~((1 << (v + 1)) - 1)
                for w in _bits(common):
                    rest = a[w] & common & ~((1 << (w + 1)) - 1)
                    for x in _bits(rest):
                        return (u, v, w, x)
        return None

    def has_k4(self, player: int) -> bool:
        a = self.adj(player)
        for u in range(self.n):
            row = a[u] >> (u + 1)
            for dv in _bits(row):
                v = u + 1 + dv
                common = a[u] & a[v]
                for w in _bits(common):
                    if a[w] & common & ~((1 << (w + 1)) - 1):
                        return True
        return False

    def threats(self, player: int) -> List[Tuple[Quad, Edge]]:
        """All quads where *player* owns five pairs and the sixth is unclaimed.

        Each is reported once, as (sorted quad, missing edge).  The missing
        pair is by definition claimable, i.e. claiming it completes a K4.
        """
        a = self.adj(player)
        out: List[Tuple[Quad, Edge]] = []
        for u in range(self.n):
            row = a[u] >> (u + 1)
            for dv in _bits(row):
                v = u + 1 + dv
                common = a[u] & a[v]
                for w in _bits(common):
                    rest = common & ~((1 << (w + 1)) - 1) & ~a[w]
                    for x in _bits(rest):
                        if self.state(w, x) == 0:
                            quad = tuple(sorted((u, v, w, x)))
                            out.append((quad, (w, x)))  # type: ignore[arg-type]
        out.sort()
        return out

    def completion_edges(self, player: int) -> List[Edge]:
        """Unclaimed edges whose claim completes a K4 for *player*, sorted.

        Same missing edges as :meth:`threats`, computed without assembling
        the quads: for every claimed pair, any two common neighbours whose
        own pair is unclaimed name a missing edge.
        """
        a = self.adj(player)
        o = self.adj(3 - player)
        out = set()
        for u in range(self.n):
            row = a[u] >> (u + 1)
            for dv in _bits(row):
                v = u + 1 + dv
                common = a[u] & a[v]
                for w in _bits(common):
                    rest = common & ~((1 << (w + 1)) - 1) & ~a[w] & ~o[w]
                    for x in _bits(rest):
                        out.add((w, x))
        return sorted(out)

    def threat_seeds(self, player: int) -> List[Tuple[Quad, str]]:
        """Quads holding exactly four *player* edges, no opponent edge, and
        both remaining pairs unclaimed.

        One more move turns such a quad into a threat.  The four edges form
        either a 4-cycle (the two free pairs are disjoint) or a triangle with
        a pendant edge (they share a vertex).
        """
        a = self.adj(player)
        verts = [v for v in range(self.n) if a[v]]
        out: List[Tuple[Quad, str]] = []
        m = len(verts)
        for i in range(m):
            for j in range(i + 1, m):
                for k in range(j + 1, m):
                    for l in range(k + 1, m):
                        quad = (verts[i], verts[j], verts[k], verts[l])
                        own = 0
                        free: List[Edge] = []
                        ok = True
                        for x in range(4):
                            for y in range(x + 1, 4):
                                s = self.state(quad[x], quad[y])
                                if s == player:
                                    own += 1
                                elif s == 0:
                                    free.append((quad[x], quad[y]))
                                else:
                                    ok = False
                            if not ok:
                                break
                        if ok and own == 4 and len(free) == 2:
                            e1, e2 = free
                            shared = set(e1) & set(e2)
                            kind = "TrianglePlusEdge" if shared else "C4"
                            out.append((quad, kind))
        return out

    def k4minus_creating_edges(self, player: int) -> List[Edge]:
        """Unclaimed edges whose claim leaves some quad with exactly five
        *player* edges (the sixth pair may be anything but the player's own).

        Only meaningful while the player has no completion available:
        then five-after-claim can never mean six.
        """
        a = self.adj(player)
        verts = [v for v in range(self.n) if a[v]]
        out: List[Edge] = []
        for i, u in enumerate(verts):
            for v in verts[i + 1 :]:
                if self.state(u, v) != 0:
                    continue
                found = False
                for w in verts:
                    if w == u or w == v:
                        continue
                    uw = (a[u] >> w) & 1
                    vw = (a[v] >> w) & 1
                    if not (uw or vw):
                        continue
                    for x in verts:
                        if x <= w or x == u or x == v:
                            continue
                        cnt = (
                            uw
                            + vw
                            + ((a[u] >> x) & 1)
                            + ((a[v] >> x) & 1)
                            + ((a[w] >> x) & 1)
                        )
                        if cnt >= 4:
                            found = True
                            break
                    if found:
                        break
                if found:
                    out.append((u, v))
        return out


# -- canonical labelling ------------------------------------------------

def _refine(t: int, ecol: List[List[int]], colors: List[int]) -> List[int]:
    """Colour refinement: split classes by multiset of (edge colour, class)
    over claimed incidences until stable."""
    while True:
        sigs = []
        for i in range(t):
            row = ecol[i]
            nb = sorted((row[j], colors[j]) for j in range(t) if row[j])
            sigs.append((colors[i], tuple(nb)))
        ranking = {s: r for r, s in enumerate(sorted(set(sigs)))}
        new = [ranking[s] for s in sigs]
        if new == colors:
            return new
        colors = new


class _CanonSearch:
    """Backtracking search for the lexicographically least encoding.

    Leaves discovered to encode identically yield automorphisms; the induced
    vertex partition prunes sibling branches inside one orbit.
    """

    def __init__(self, t: int, ecol: List[List[int]], init: List[int]):
        self.t = t
        self.ecol = ecol
        self.init = init
        self.best: Optional[bytes] = None
        self.best_perm: Optional[List[int]] = None
        self.uf = list(range(t))

    def _find(self, x: int) -> int:
        while self.uf[x] != x:
            self.uf[x] = self.uf[self.uf[x]]
            x = self.uf[x]
        return x

    def _union(self, x: int, y: int) -> None:
        rx, ry = self._find(x), self._find(y)
        if rx != ry:
            self.uf[max(rx, ry)] = min(rx, ry)

    def _encode(self, order: List[int]) -> bytes:
        t = self.t
        out = bytearray([t])
        out.extend(self.init[v] for v in order)
        acc = 0
        nibbles = 0
        for a in range(t):
            ra = self.ecol[order[a]]
            for b in range(a + 1, t):
                acc = (acc << 4) | ra[order[b]]
                nibbles += 1
                if nibbles == 2:
                    out.append(acc)
                    acc = nibbles = 0
        if nibbles:
            out.append(acc << 4)
        return bytes(out)

    def run(self, colors: List[int]) -> None:
        cells: Dict[int, List[int]] = {}
        for v, c in enumerate(colors):
            cells.setdefault(c, []).append(v)
        target = None
        for c in sorted(cells):
            if len(cells[c]) > 1:
                target = cells[c]
                break
        if target is None:
            order = [v for _, v in sorted((c, v) for v, c in enumerate(colors))]
            code = self._encode(order)
            if self.best is None or code < self.best:
                self.best = code
                self.best_perm = order
            elif code == self.best and self.best_perm is not None:
                for a, b in zip(self.best_perm, order):
                    self._union(a, b)
            return
        seen_orbits = set()
        for v in target:
            root = self._find(v)
            if root in seen_orbits:
                continue
            seen_orbits.add(root)
            branched = [c * 2 for c in colors]
            branched[v] -= 1
            self.run(_refine(self.t, self.ecol, branched))


def canonical_form(
    n: int,
    fp_adj: Sequence[int],
    sp_adj: Sequence[int],
    vertex_classes: Optional[Dict[int, int]] = None,
    edge_marks: Optional[Dict[Edge, int]] = None,
) -> Tuple[bytes, Dict[int, int]]:
    """Exact canonical form of the claimed subgraph.

    Two positions yield equal bytes iff a bijection of their included
    vertices preserves edge colours (claim owner plus any ``edge_marks``
    flags) and ``vertex_classes``.  Included vertices are those with at
    least one claimed edge, plus any mentioned in ``vertex_classes``;
    everything else is interchangeable padding and is stripped.

    Returns ``(code, placement)`` where ``placement`` maps each included
    original vertex to its position in the canonical ordering.
    """
    touched = 0
    for v in range(n):
        if fp_adj[v] | sp_adj[v]:
            touched |= 1 << v
    include = sorted(set(_bits(touched)) | set(vertex_classes or ()))
    t = len(include)
    if t == 0:
        return b"\x00", {}
    if t > 255:
        raise ValueError("too many active vertices to encode")
    local = {v: i for i, v in enumerate(include)}

    ecol = [[0] * t for _ in range(t)]
    for i, u in enumerate(include):
        for j in range(i + 1, t):
            v = include[j]
            c = 0
            if (fp_adj[u] >> v) & 1:
                c = FP
            elif (sp_adj[u] >> v) & 1:
                c = SP
            ecol[i][j] = ecol[j][i] = c
    if edge_marks:
        for (u, v), flag in edge_marks.items():
            if u in local and v in local and ecol[local[u]][local[v]]:
                i, j = local[u], local[v]
                c = ecol[i][j] | (flag << 2)
                if c > 15:
                    raise ValueError("edge mark overflows nibble encoding")
                ecol[i][j] = ecol[j][i] = c

    keys = []
    for v in include:
        if vertex_classes and v in vertex_classes:
            keys.append((1, vertex_classes[v]))
        else:
            keys.append((0, 0))
    ranking = {k: r for r, k in enumerate(sorted(set(keys)))}
    init = [ranking[k] for k in keys]

    search = _CanonSearch(t, ecol, init)
    search.run(_refine(t, ecol, init))
    assert search.best is not None and search.best_perm is not None
    placement = {include[v]: pos for pos, v in enumerate(search.best_perm)}
    return search.best, placement


# -- minimax oracle -----------------------------------------------------

def minimax_first_player_forces(
    board: BitBoard,
    side_to_move: int,
    clique_size: int,
    plies: int,
    memo: Optional[dict] = None,
) -> bool:
    """True iff the first player can force completing a ``clique_size``-clique
    within ``plies`` further moves, against optimal resistance, with the
    second player winning (or surviving) otherwise.

    A completed second-player clique ends the game as a first-player failure.
    Strategy-free reference search; intended for small boards.
    """
    if memo is None:
        memo = {}
    target_edges = clique_size * (clique_size - 1) // 2

    def wins(side: int, depth: int) -> bool:
        key = (tuple(board.fp), tuple(board.sp), side, depth)
        cached = memo.get(key)
        if cached is not None:
            return cached
        result = False
        if depth > 0:
            moves = board.unclaimed_edges()
            # Try completing / blocking moves first: cheap cutoffs.
            if clique_size == 3:
                own = board.adj(side)
                moves.sort(key=lambda e: not (own[e[0]] & own[e[1]]))
            else:
                hot = set(board.completion_edges(FP)) | set(
                    board.completion_edges(SP)
                )
                if hot:
                    moves.sort(key=lambda e: e not in hot)
            if side == FP:
                for u, v in moves:
                    board.claim(u, v, FP)
                    done = _has_clique(board, FP, clique_size, target_edges)
                    if done or wins(SP, depth - 1):
                        board.unclaim(u, v, FP)
                        result = True
                        break
                    board.unclaim(u, v, FP)
            else:
                result = True
                for u, v in moves:
                    board.claim(u, v, SP)
                    done = _has_clique(board, SP, clique_size, target_edges)
                    if done or not wins(FP, depth - 1):
                        board.unclaim(u, v, SP)
                        result = False
                        break
                    board.unclaim(u, v, SP)
                if not moves:
                    result = False
        memo[key] = result
        return result

    return wins(side_to_move, plies)


def _has_clique(board: BitBoard, player: int, size: int, min_edges: int) -> bool:
    if board.edge_count(player) < min_edges:
        return False
    if size == 4:
        return board.has_k4(player)
    if size == 3:
        a = board.adj(player)
        for u in range(board.n):
            row = a[u] >> (u + 1)
            for dv in _bits(row):
                if a[u] & a[u + 1 + dv]:
                    return True
        return False
    raise ValueError(f"unsupported clique size {size}")


__all__ = [
    "BACKEND",
    "BitBoard",
    "FP",
    "SP",
    "MAX_VERTICES",
    "canonical_form",
    "minimax_first_player_forces",
]
