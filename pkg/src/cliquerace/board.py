"""Board model: a complete graph whose edges are claimed by two players.

``ColoredBoard`` is the public, immutable view used by the service, the CLI
and tests; every mutation returns a fresh board.  The verifier talks to the
mutable kernel directly for speed, but always through the same semantics.

Also home to the plain-text move script format::

    # comment
    board 17
    FP 0-1
    SP 3-7

The header names the board size; each following line claims one edge for one
player.  Parsing reports offending line numbers; serialization of a parsed
history round-trips exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

from cliquerace._kernel import MAX_VERTICES, BitBoard

__all__ = [
    "AlreadyClaimed",
    "BoardError",
    "ColoredBoard",
    "GameHistory",
    "Move",
    "NoFreshVertex",
    "OutOfRange",
    "Player",
    "ScriptError",
    "new_board",
    "parse_script",
    "serialize_history",
]

DEFAULT_BOARD_SIZE = 17


class Player(enum.IntEnum):
    FP = 1
    SP = 2

    @property
    def opponent(self) -> "Player":
        return Player.SP if self is Player.FP else Player.FP


class BoardError(Exception):
    """Base class for board rule violations."""


class AlreadyClaimed(BoardError):
    def __init__(self, u: int, v: int, owner: Player):
        super().__init__(f"edge {u}-{v} already claimed by {owner.name}")
        self.edge = (u, v)
        self.owner = owner


class OutOfRange(BoardError):
    def __init__(self, message: str):
        super().__init__(message)


class NoFreshVertex(BoardError):
    def __init__(self, n: int):
        super().__init__(f"all {n} vertices already carry claimed edges")


@dataclass(frozen=True)
class Move:
    player: Player
    u: int
    v: int
    ply: int

    @property
    def edge(self) -> Tuple[int, int]:
        return (self.u, self.v) if self.u < self.v else (self.v, self.u)


def _normalize(n: int, u: int, v: int) -> Tuple[int, int]:
    if not (0 <= u < n and 0 <= v < n):
        raise OutOfRange(f"vertex out of range for board of size {n}: {u}-{v}")
    if u == v:
        raise OutOfRange(f"self-loop {u}-{v} is not an edge")
    return (u, v) if u < v else (v, u)


class ColoredBoard:
    """Immutable snapshot of claimed edges plus the move counter."""

    __slots__ = ("_core", "ply")

    def __init__(self, core: BitBoard, ply: int = 0):
        self._core = core
        self.ply = ply

    @property
    def n(self) -> int:
        return self._core.n

    def state(self, u: int, v: int) -> Optional[Player]:
        u, v = _normalize(self.n, u, v)
        s = self._core.state(u, v)
        return Player(s) if s else None

    def claim(self, player: Player, u: int, v: int) -> "ColoredBoard":
        u, v = _normalize(self.n, u, v)
        owner = self._core.state(u, v)
        if owner:
            raise AlreadyClaimed(u, v, Player(owner))
        core = self._core.copy()
        core.claim(u, v, int(player))
        return ColoredBoard(core, self.ply + 1)

    def degree(self, v: int, player: Player) -> int:
        if not 0 <= v < self.n:
            raise OutOfRange(f"vertex {v} out of range for board of size {self.n}")
        return self._core.degree(v, int(player))

    def is_fresh(self, v: int) -> bool:
        if not 0 <= v < self.n:
            raise OutOfRange(f"vertex {v} out of range for board of size {self.n}")
        return self._core.is_fresh(v)

    def fresh_vertex(self) -> int:
        v = self._core.fresh_vertex()
        if v < 0:
            raise NoFreshVertex(self.n)
        return v

    def edges(self, player: Player) -> List[Tuple[int, int]]:
        return self._core.edges(int(player))

    def unclaimed_edges(self) -> List[Tuple[int, int]]:
        return self._core.unclaimed_edges()

    def kernel(self) -> BitBoard:
        """Mutable copy of the underlying bitboard (the board stays frozen)."""
        return self._core.copy()

    def kernel_view(self) -> BitBoard:
        """The live underlying bitboard.  Callers must not mutate it."""
        return self._core


def new_board(n: int = DEFAULT_BOARD_SIZE) -> ColoredBoard:
    if not 1 <= n <= MAX_VERTICES:
        raise OutOfRange(f"board size must be in 1..{MAX_VERTICES}, got {n}")
    return ColoredBoard(BitBoard(n))


class GameHistory:
    """Ordered record of moves from an empty board of a given size."""

    def __init__(self, n: int, moves: Optional[Iterable[Move]] = None):
        self.n = n
        self.moves: List[Move] = list(moves or ())

    def append(self, player: Player, u: int, v: int) -> Move:
        move = Move(player, u, v, len(self.moves))
        self.moves.append(move)
        return move

    def final_board(self) -> ColoredBoard:
        board = new_board(self.n)
        for m in self.moves:
            board = board.claim(m.player, m.u, m.v)
        return board

    def boards(self) -> Iterable[ColoredBoard]:
        """Yield the board after each move, starting after the first."""
        board = new_board(self.n)
        for m in self.moves:
            board = board.claim(m.player, m.u, m.v)
            yield board

    def __len__(self) -> int:
        return len(self.moves)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GameHistory):
            return NotImplemented
        return self.n == other.n and self.moves == other.moves


class ScriptError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def parse_script(text: str) -> GameHistory:
    """Parse a move script into a :class:`GameHistory`.

    Raises :class:`ScriptError` with a 1-based line number on malformed
    input, including claims of already-taken edges and self-loops.
    """
    history: Optional[GameHistory] = None
    board: Optional[ColoredBoard] = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if history is None:
            if len(parts) != 2 or parts[0] != "board":
                raise ScriptError(line_no, "expected 'board <n>' header")
            try:
                n = int(parts[1])
            except ValueError:
                raise ScriptError(line_no, f"bad board size {parts[1]!r}") from None
            if not 1 <= n <= MAX_VERTICES:
                raise ScriptError(
                    line_no, f"board size must be in 1..{MAX_VERTICES}, got {n}"
                )
            history = GameHistory(n)
            board = new_board(n)
            continue
        if len(parts) != 2 or parts[0] not in ("FP", "SP"):
            raise ScriptError(line_no, f"expected 'FP u-v' or 'SP u-v', got {raw!r}")
        player = Player.FP if parts[0] == "FP" else Player.SP
        bits = parts[1].split("-")
        if len(bits) != 2:
            raise ScriptError(line_no, f"expected edge 'u-v', got {parts[1]!r}")
        try:
            u, v = int(bits[0]), int(bits[1])
        except ValueError:
            raise ScriptError(line_no, f"bad edge {parts[1]!r}") from None
        assert board is not None
        try:
            board = board.claim(player, u, v)
        except BoardError as exc:
            raise ScriptError(line_no, str(exc)) from None
        history.append(player, u, v)
    if history is None:
        raise ScriptError(1, "empty script: missing 'board <n>' header")
    return history


def serialize_history(history: GameHistory) -> str:
    lines = [f"board {history.n}"]
    lines.extend(f"{m.player.name} {m.u}-{m.v}" for m in history.moves)
    return "\n".join(lines) + "\n"
