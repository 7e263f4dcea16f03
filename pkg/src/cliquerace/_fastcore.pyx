# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled board kernel: the pure-Python twin at C speed.

Mirrors ``cliquerace._kernel.py_impl`` name for name — same classes, same
methods, same results — so the package can pick whichever imports.  Rows are
stored in C arrays; the ``fp``/``sp``/``adj`` views hand out fresh lists, so
unlike the pure twin they are snapshots, not aliases.  All callers treat the
rows as read-only, which makes the two behaviours indistinguishable.
"""

from libc.string cimport memcmp, memcpy, memset

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil

MAX_VERTICES = 64

FP = 1
SP = 2

BACKEND = "compiled"

DEF MAXV = 64
# 1 (size byte) + 64 (vertex classes) + ceil(64*63/2 / 2) (edge nibbles)
DEF ENCMAX = 1088

ctypedef unsigned long long u64

cdef int _FP = 1
cdef int _SP = 2


cdef class BitBoard:
    """Mutable two-coloured edge set over ``n`` vertices (compiled twin)."""

    cdef u64 fp_[MAXV]
    cdef u64 sp_[MAXV]
    cdef u64 touched_
    cdef readonly int n

    def __cinit__(self, int n = 0):
        memset(self.fp_, 0, sizeof(self.fp_))
        memset(self.sp_, 0, sizeof(self.sp_))
        self.touched_ = 0
        self.n = 0

    def __init__(self, int n):
        if not 1 <= n <= MAXV:
            raise ValueError(f"board size must be in 1..{MAXV}, got {n}")
        self.n = n

    # -- row views (snapshots; the pure twin exposes live lists) ---------

    @property
    def fp(self):
        cdef int v
        return [self.fp_[v] for v in range(self.n)]

    @fp.setter
    def fp(self, rows):
        cdef int v
        for v in range(self.n):
            self.fp_[v] = rows[v]

    @property
    def sp(self):
        cdef int v
        return [self.sp_[v] for v in range(self.n)]

    @sp.setter
    def sp(self, rows):
        cdef int v
        for v in range(self.n):
            self.sp_[v] = rows[v]

    @property
    def touched(self):
        return self.touched_

    @touched.setter
    def touched(self, value):
        self.touched_ = value

    cdef inline u64* row_(self, int player):
        if player == _FP:
            return self.fp_
        return self.sp_

    cdef inline int state_(self, int u, int v):
        if (self.fp_[u] >> v) & 1:
            return _FP
        if (self.sp_[u] >> v) & 1:
            return _SP
        return 0

    def copy(self):
        cdef BitBoard b = BitBoard.__new__(BitBoard)
        b.n = self.n
        memcpy(b.fp_, self.fp_, sizeof(self.fp_))
        memcpy(b.sp_, self.sp_, sizeof(self.sp_))
        b.touched_ = self.touched_
        return b

    def adj(self, int player):
        cdef u64* a = self.row_(player)
        cdef int v
        return [a[v] for v in range(self.n)]

    def state(self, int u, int v):
        return self.state_(u, v)

    def claim(self, int u, int v, int player):
        cdef u64* a = self.row_(player)
        a[u] |= (<u64>1) << v
        a[v] |= (<u64>1) << u
        self.touched_ |= ((<u64>1) << u) | ((<u64>1) << v)

    def unclaim(self, int u, int v, int player):
        cdef u64* a = self.row_(player)
        a[u] &= ~((<u64>1) << v)
        a[v] &= ~((<u64>1) << u)
        if not (self.fp_[u] | self.sp_[u]):
            self.touched_ &= ~((<u64>1) << u)
        if not (self.fp_[v] | self.sp_[v]):
            self.touched_ &= ~((<u64>1) << v)

    def edge_count(self, int player):
        cdef u64* a = self.row_(player)
        cdef int v, total = 0
        for v in range(self.n):
            total += __builtin_popcountll(a[v])
        return total // 2

    def degree(self, int v, int player):
        return __builtin_popcountll(self.row_(player)[v])

    def is_fresh(self, int v):
        return not (self.touched_ >> v) & 1

    def fresh_vertex(self):
        """Lowest-index vertex with no claimed edge, or -1 if none."""
        cdef int v
        for v in range(self.n):
            if not (self.touched_ >> v) & 1:
                return v
        return -1

    def edges(self, int player):
        cdef u64* a = self.row_(player)
        cdef int u
        cdef u64 m
        out = []
        for u in range(self.n):
            m = a[u] >> u >> 1
            while m:
                out.append((u, u + 1 + __builtin_ctzll(m)))
                m &= m - 1
        return out

    def unclaimed_edges(self):
        cdef int u
        cdef u64 blocked, free
        out = []
        for u in range(self.n):
            blocked = (self.fp_[u] | self.sp_[u]) >> u >> 1
            free = (((<u64>1) << (self.n - u - 1)) - 1) & ~blocked
            while free:
                out.append((u, u + 1 + __builtin_ctzll(free)))
                free &= free - 1
        return out

    # -- clique scans ---------------------------------------------------

    def completes_k4(self, int u, int v, int player):
        """Would claiming (u, v) give *player* a complete quad?"""
        cdef u64* a = self.row_(player)
        cdef u64 common = a[u] & a[v]
        cdef u64 m = common
        cdef int w
        while m:
            w = __builtin_ctzll(m)
            m &= m - 1
            if a[w] & common & ~((((<u64>1) << w) << 1) - 1):
                return True
        return False

    def completes_k3(self, int u, int v, int player):
        """Would claiming (u, v) give *player* a triangle?"""
        cdef u64* a = self.row_(player)
        return bool(a[u] & a[v])

    def has_k3(self, int player):
        cdef u64* a = self.row_(player)
        cdef int u
        cdef u64 row
        for u in range(self.n):
            row = a[u] >> u >> 1
            while row:
                if a[u + 1 + __builtin_ctzll(row)] & a[u]:
                    return True
                row &= row - 1
        return False

    def in_triangle(self, int v, int player):
        """Is *v* a corner of some fully-claimed triangle of *player*?"""
        cdef u64* a = self.row_(player)
        cdef u64 row = a[v], m = a[v]
        cdef int w
        while m:
            w = __builtin_ctzll(m)
            m &= m - 1
            if a[w] & row & ~((((<u64>1) << w) << 1) - 1):
                return True
        return False

    def find_k4(self, int player):
        """Lexicographically least fully-claimed quad of *player*, if any."""
        cdef u64* a = self.row_(player)
        cdef int i, j, u, v, w, x, count = 0
        cdef int verts[MAXV]
        cdef u64 common, m, rest
        for i in range(self.n):
            if __builtin_popcountll(a[i]) >= 3:
                verts[count] = i
                count += 1
        for i in range(count):
            u = verts[i]
            for j in range(i + 1, count):
                v = verts[j]
                if not (a[u] >> v) & 1:
                    continue
                common = a[u] & a[v] & ~((((<u64>1) << v) << 1) - 1)
                m = common
                while m:
                    w = __builtin_ctzll(m)
                    m &= m - 1
                    rest = a[w] & common & ~((((<u64>1) << w) << 1) - 1)
                    if rest:
                        x = __builtin_ctzll(rest)
                        return (u, v, w, x)
        return None

    def has_k4(self, int player):
        cdef u64* a = self.row_(player)
        cdef int u, v, w
        cdef u64 row, common, m
        for u in range(self.n):
            row = a[u] >> u >> 1
            while row:
                v = u + 1 + __builtin_ctzll(row)
                row &= row - 1
                common = a[u] & a[v]
                m = common
                while m:
                    w = __builtin_ctzll(m)
                    m &= m - 1
                    if a[w] & common & ~((((<u64>1) << w) << 1) - 1):
                        return True
        return False

    def threats(self, int player):
        """All quads where *player* owns five pairs and the sixth is unclaimed.

        Each is reported once, as (sorted quad, missing edge).  The missing
        pair is by definition claimable, i.e. claiming it completes a K4.
        """
        cdef u64* a = self.row_(player)
        cdef u64* o = self.row_(3 - player)
        cdef int u, v, w, x
        cdef u64 row, common, ws, rest
        cdef int q[4]
        out = []
        for u in range(self.n):
            row = a[u] >> u >> 1
            while row:
                v = u + 1 + __builtin_ctzll(row)
                row &= row - 1
                common = a[u] & a[v]
                ws = common
                while ws:
                    w = __builtin_ctzll(ws)
                    ws &= ws - 1
                    rest = common & ~((((<u64>1) << w) << 1) - 1) & ~a[w] & ~o[w]
                    while rest:
                        x = __builtin_ctzll(rest)
                        rest &= rest - 1
                        q[0] = u; q[1] = v; q[2] = w; q[3] = x
                        _sort4(q)
                        out.append(((q[0], q[1], q[2], q[3]), (w, x)))
        out.sort()
        return out

    def completion_edges(self, int player):
        """Unclaimed edges whose claim completes a K4 for *player*, sorted.

        Same missing edges as :meth:`threats`, computed without assembling
        the quads: for every claimed pair, any two common neighbours whose
        own pair is unclaimed name a missing edge.
        """
        cdef u64* a = self.row_(player)
        cdef u64* o = self.row_(3 - player)
        cdef int u, v, w, x
        cdef u64 row, common, ws, rest
        found = set()
        for u in range(self.n):
            row = a[u] >> u >> 1
            while row:
                v = u + 1 + __builtin_ctzll(row)
                row &= row - 1
                common = a[u] & a[v]
                ws = common
                while ws:
                    w = __builtin_ctzll(ws)
                    ws &= ws - 1
                    rest = common & ~((((<u64>1) << w) << 1) - 1) & ~a[w] & ~o[w]
                    while rest:
                        x = __builtin_ctzll(rest)
                        rest &= rest - 1
                        found.add((w, x))
        return sorted(found)

    def threat_seeds(self, int player):
        """Quads holding exactly four *player* edges, no opponent edge, and
        both remaining pairs unclaimed.

        One more move turns such a quad into a threat.  The four edges form
        either a 4-cycle (the two free pairs are disjoint) or a triangle with
        a pendant edge (they share a vertex).
        """
        cdef u64* a = self.row_(player)
        cdef int i, j, k, l, x, y, s, count = 0, own, free_n
        cdef int verts[MAXV]
        cdef int quad[4]
        cdef int fu[2]
        cdef int fv[2]
        cdef bint ok, shared
        for i in range(self.n):
            if a[i]:
                verts[count] = i
                count += 1
        out = []
        for i in range(count):
            for j in range(i + 1, count):
                for k in range(j + 1, count):
                    for l in range(k + 1, count):
                        quad[0] = verts[i]; quad[1] = verts[j]
                        quad[2] = verts[k]; quad[3] = verts[l]
                        own = 0
                        free_n = 0
                        ok = True
                        for x in range(4):
                            for y in range(x + 1, 4):
                                s = self.state_(quad[x], quad[y])
                                if s == player:
                                    own += 1
                                elif s == 0:
                                    if free_n < 2:
                                        fu[free_n] = quad[x]
                                        fv[free_n] = quad[y]
                                    free_n += 1
                                else:
                                    ok = False
                            if not ok:
                                break
                        if ok and own == 4 and free_n == 2:
                            shared = (
                                fu[0] == fu[1] or fu[0] == fv[1]
                                or fv[0] == fu[1] or fv[0] == fv[1]
                            )
                            kind = "TrianglePlusEdge" if shared else "C4"
                            out.append(
                                ((quad[0], quad[1], quad[2], quad[3]), kind)
                            )
        return out

    def k4minus_creating_edges(self, int player):
        """Unclaimed edges whose claim leaves some quad with exactly five
        *player* edges (the sixth pair may be anything but the player's own).

        Only meaningful while the player has no completion available:
        then five-after-claim can never mean six.
        """
        cdef u64* a = self.row_(player)
        cdef int i, j, k, l, u, v, w, x, count = 0, cnt, uw, vw
        cdef int verts[MAXV]
        cdef bint found
        for i in range(self.n):
            if a[i]:
                verts[count] = i
                count += 1
        out = []
        for i in range(count):
            u = verts[i]
            for j in range(i + 1, count):
                v = verts[j]
                if self.state_(u, v) != 0:
                    continue
                found = False
                for k in range(count):
                    w = verts[k]
                    if w == u or w == v:
                        continue
                    uw = (a[u] >> w) & 1
                    vw = (a[v] >> w) & 1
                    if not (uw or vw):
                        continue
                    for l in range(count):
                        x = verts[l]
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


cdef void _sort4(int* q):
    cdef int a, b, tmp
    for a in range(3):
        for b in range(a + 1, 4):
            if q[b] < q[a]:
                tmp = q[a]; q[a] = q[b]; q[b] = tmp


# -- canonical labelling ------------------------------------------------

cdef class _Canon:
    """Backtracking search for the lexicographically least encoding.

    C port of the pure twin's refinement-plus-orbit-pruning search.  Output
    must stay byte-identical to the pure implementation: transposition keys
    and boundary sets are compared across backends.
    """

    cdef int t
    cdef unsigned char ecol[MAXV][MAXV]
    cdef int init[MAXV]
    cdef int uf[MAXV]
    cdef unsigned char best[ENCMAX]
    cdef unsigned char scratch[ENCMAX]
    cdef int enc_len
    cdef bint has_best
    cdef int best_perm[MAXV]
    # refinement workspace: per vertex [colour, sorted packed pairs...]
    cdef int sig[MAXV][MAXV + 1]
    cdef int siglen[MAXV]

    cdef int find(self, int x):
        while self.uf[x] != x:
            self.uf[x] = self.uf[self.uf[x]]
            x = self.uf[x]
        return x

    cdef void union_(self, int x, int y):
        cdef int rx = self.find(x)
        cdef int ry = self.find(y)
        if rx != ry:
            if rx < ry:
                self.uf[ry] = rx
            else:
                self.uf[rx] = ry

    cdef int cmp_sig(self, int i, int j):
        """Mirror of tuple comparison on (colour, sorted neighbour pairs)."""
        cdef int a = self.sig[i][0]
        cdef int b = self.sig[j][0]
        cdef int la, lb, k, m
        if a != b:
            return -1 if a < b else 1
        la = self.siglen[i]
        lb = self.siglen[j]
        m = la if la < lb else lb
        for k in range(m):
            a = self.sig[i][k + 1]
            b = self.sig[j][k + 1]
            if a != b:
                return -1 if a < b else 1
        if la != lb:
            return -1 if la < lb else 1
        return 0

    cdef void refine(self, int* colors):
        """Split classes by multiset of (edge colour, class) until stable.

        Packed pairs (ecol << 9) + colour + 1 order exactly as the pure
        twin's (ecol, colour) tuples: ecol <= 15 and colours sit in
        [-1, 2t - 2], well under the 512 slot.
        """
        cdef int t = self.t
        cdef int i, j, k, m, packed, pos, rank
        cdef int idx[MAXV]
        cdef int newc[MAXV]
        cdef bint same
        while True:
            for i in range(t):
                self.sig[i][0] = colors[i]
                m = 0
                for j in range(t):
                    if self.ecol[i][j]:
                        packed = (self.ecol[i][j] << 9) + colors[j] + 1
                        pos = m
                        while pos > 0 and self.sig[i][pos] > packed:
                            self.sig[i][pos + 1] = self.sig[i][pos]
                            pos -= 1
                        self.sig[i][pos + 1] = packed
                        m += 1
                self.siglen[i] = m
            for i in range(t):
                idx[i] = i
            for i in range(1, t):
                j = idx[i]
                k = i - 1
                while k >= 0 and self.cmp_sig(idx[k], j) > 0:
                    idx[k + 1] = idx[k]
                    k -= 1
                idx[k + 1] = j
            rank = 0
            newc[idx[0]] = 0
            for i in range(1, t):
                if self.cmp_sig(idx[i], idx[i - 1]) != 0:
                    rank += 1
                newc[idx[i]] = rank
            same = True
            for i in range(t):
                if newc[i] != colors[i]:
                    same = False
                    break
            if same:
                return
            for i in range(t):
                colors[i] = newc[i]

    cdef void encode(self, int* order, unsigned char* out):
        cdef int t = self.t
        cdef int a, b, ra, acc = 0, nib = 0, pos = 0
        out[pos] = <unsigned char>t
        pos += 1
        for a in range(t):
            out[pos] = <unsigned char>self.init[order[a]]
            pos += 1
        for a in range(t):
            ra = order[a]
            for b in range(a + 1, t):
                acc = (acc << 4) | self.ecol[ra][order[b]]
                nib += 1
                if nib == 2:
                    out[pos] = <unsigned char>acc
                    pos += 1
                    acc = 0
                    nib = 0
        if nib:
            out[pos] = <unsigned char>(acc << 4)
            pos += 1
        self.enc_len = pos

    cdef void run(self, int* colors):
        """Individualise the smallest splittable class, refine, recurse.

        Leaves encoding identically to the current best yield automorphisms;
        their orbit partition prunes sibling branches.
        """
        cdef int t = self.t
        cdef int i, v, target_color = -1, root
        cdef int cnt[MAXV]
        cdef int order[MAXV]
        cdef int branched[MAXV]
        cdef int seen[MAXV]
        cdef int seen_n = 0
        cdef bint skip
        memset(cnt, 0, sizeof(cnt))
        for i in range(t):
            cnt[colors[i]] += 1
        for i in range(t):
            if cnt[i] > 1:
                target_color = i
                break
        if target_color < 0:
            for i in range(t):
                order[colors[i]] = i
            self.encode(order, self.scratch)
            if not self.has_best or memcmp(self.scratch, self.best, self.enc_len) < 0:
                memcpy(self.best, self.scratch, self.enc_len)
                memcpy(self.best_perm, order, sizeof(self.best_perm))
                self.has_best = True
            elif memcmp(self.scratch, self.best, self.enc_len) == 0:
                for i in range(t):
                    self.union_(self.best_perm[i], order[i])
            return
        for v in range(t):
            if colors[v] != target_color:
                continue
            root = self.find(v)
            skip = False
            for i in range(seen_n):
                if seen[i] == root:
                    skip = True
                    break
            if skip:
                continue
            seen[seen_n] = root
            seen_n += 1
            for i in range(t):
                branched[i] = colors[i] * 2
            branched[v] -= 1
            self.refine(branched)
            self.run(branched)


def canonical_form(int n, fp_adj, sp_adj, vertex_classes=None, edge_marks=None):
    """Exact canonical form of the claimed subgraph.

    Two positions yield equal bytes iff a bijection of their included
    vertices preserves edge colours (claim owner plus any ``edge_marks``
    flags) and ``vertex_classes``.  Included vertices are those with at
    least one claimed edge, plus any mentioned in ``vertex_classes``;
    everything else is interchangeable padding and is stripped.

    Returns ``(code, placement)`` where ``placement`` maps each included
    original vertex to its position in the canonical ordering.  Output is
    byte-identical to the pure implementation.
    """
    cdef u64 frow[MAXV]
    cdef u64 srow[MAXV]
    cdef int i, j, t, c, u, w
    cdef int v = 0
    cdef u64 touched = 0

    for v in range(n):
        frow[v] = fp_adj[v]
        srow[v] = sp_adj[v]
        if frow[v] | srow[v]:
            touched |= (<u64>1) << v

    incl_set = set()
    for v in range(n):
        if (touched >> v) & 1:
            incl_set.add(v)
    if vertex_classes:
        incl_set |= set(vertex_classes)
    incl = sorted(incl_set)
    t = len(incl)
    if t == 0:
        return b"\x00", {}
    if incl[t - 1] >= n:
        raise IndexError("vertex class key out of board range")
    local = {orig: pos for pos, orig in enumerate(incl)}

    cdef _Canon canon = _Canon.__new__(_Canon)
    canon.t = t
    canon.has_best = False
    canon.enc_len = 0
    memset(canon.ecol, 0, sizeof(canon.ecol))
    for i in range(t):
        canon.uf[i] = i
    for i in range(t):
        u = incl[i]
        for j in range(i + 1, t):
            w = incl[j]
            c = 0
            if (frow[u] >> w) & 1:
                c = _FP
            elif (srow[u] >> w) & 1:
                c = _SP
            canon.ecol[i][j] = <unsigned char>c
            canon.ecol[j][i] = <unsigned char>c
    if edge_marks:
        for (eu, ev), flag in edge_marks.items():
            if eu in local and ev in local and canon.ecol[local[eu]][local[ev]]:
                i = local[eu]
                j = local[ev]
                c = canon.ecol[i][j] | (flag << 2)
                if c > 15:
                    raise ValueError("edge mark overflows nibble encoding")
                canon.ecol[i][j] = <unsigned char>c
                canon.ecol[j][i] = <unsigned char>c

    keys = []
    for orig in incl:
        if vertex_classes and orig in vertex_classes:
            keys.append((1, vertex_classes[orig]))
        else:
            keys.append((0, 0))
    ranking = {k: r for r, k in enumerate(sorted(set(keys)))}

    cdef int colors[MAXV]
    for i in range(t):
        canon.init[i] = ranking[keys[i]]
        colors[i] = canon.init[i]
    canon.refine(colors)
    canon.run(colors)

    placement = {}
    for i in range(t):
        placement[incl[canon.best_perm[i]]] = i
    code = canon.best[:canon.enc_len]
    return bytes(code), placement


# -- minimax oracle -----------------------------------------------------

def minimax_first_player_forces(
    BitBoard board, int side_to_move, int clique_size, int plies, memo=None
):
    """True iff the first player can force completing a ``clique_size``-clique
    within ``plies`` further moves, against optimal resistance, with the
    second player winning (or surviving) otherwise.

    A completed second-player clique ends the game as a first-player failure.
    Strategy-free reference search; intended for small boards.
    """
    if clique_size not in (3, 4):
        raise ValueError(f"unsupported clique size {clique_size}")
    if memo is None:
        memo = {}
    cdef int target_edges = clique_size * (clique_size - 1) // 2
    return _mm_wins(board, side_to_move, plies, clique_size, target_edges, memo)


cdef bint _mm_has(BitBoard board, int player, int size, int min_edges):
    if board.edge_count(player) < min_edges:
        return False
    if size == 4:
        return board.has_k4(player)
    return board.has_k3(player)


cdef bint _mm_wins(
    BitBoard board, int side, int depth, int clique_size, int target_edges, dict memo
):
    cdef int u, v
    cdef bint done, result

    key = (_rows_key(board), side, depth)
    cached = memo.get(key)
    if cached is not None:
        return cached
    result = False
    if depth > 0:
        moves = board.unclaimed_edges()
        # Try completing / blocking moves first: cheap cutoffs.
        if clique_size == 3:
            moves.sort(key=lambda e: not board.completes_k3(e[0], e[1], side))
        else:
            hot = set(board.completion_edges(_FP)) | set(board.completion_edges(_SP))
            if hot:
                moves.sort(key=lambda e: e not in hot)
        if side == _FP:
            for u, v in moves:
                board.claim(u, v, _FP)
                done = _mm_has(board, _FP, clique_size, target_edges)
                if done or _mm_wins(board, _SP, depth - 1, clique_size, target_edges, memo):
                    board.unclaim(u, v, _FP)
                    result = True
                    break
                board.unclaim(u, v, _FP)
        else:
            result = True
            for u, v in moves:
                board.claim(u, v, _SP)
                done = _mm_has(board, _SP, clique_size, target_edges)
                if done or not _mm_wins(board, _FP, depth - 1, clique_size, target_edges, memo):
                    board.unclaim(u, v, _SP)
                    result = False
                    break
                board.unclaim(u, v, _SP)
            if not moves:
                result = False
    memo[key] = result
    return result


cdef bytes _rows_key(BitBoard board):
    cdef unsigned char buf[2 * 8 * MAXV]
    cdef int v, k, pos = 0
    for v in range(board.n):
        for k in range(8):
            buf[pos] = <unsigned char>((board.fp_[v] >> (8 * k)) & 0xFF)
            pos += 1
    for v in range(board.n):
        for k in range(8):
            buf[pos] = <unsigned char>((board.sp_[v] >> (8 * k)) & 0xFF)
            pos += 1
    return buf[:pos]


__all__ = [
    "BACKEND",
    "BitBoard",
    "FP",
    "SP",
    "MAX_VERTICES",
    "canonical_form",
    "minimax_first_player_forces",
]
