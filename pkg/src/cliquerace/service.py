"""Live play against the quad-building engine over HTTP.

The engine owns the first player's seat; callers submit second-player
moves and read back the engine's reply, the current threat picture, and a
what-if analysis panel.  Sessions persist in an embedded SQLite store with
the serialized move history as the source of truth — every load replays
the history onto a fresh board, so stored state can never drift from the
rules.

Usage::

    from cliquerace.service import create_app
    app = create_app("sessions.db")      # or ":memory:" for throwaway use

    # uvicorn cliquerace.service:app ... via the CLI: `cliquerace serve`

Endpoints:

    POST   /sessions            {"n": 17}        -> session view
    GET    /sessions/{id}                        -> session view
    POST   /sessions/{id}/moves {"u": 3, "v": 9} -> move result
    GET    /sessions/{id}/analysis               -> threat/what-if panel
    DELETE /sessions/{id}                        -> {"deleted": true}

Errors come back as ``{"code": ..., "message": ...}`` with a matching
HTTP status.
"""

from __future__ import annotations

import secrets
import sqlite3
import threading
import time
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .board import (
    BoardError,
    ColoredBoard,
    GameHistory,
    Player,
    parse_script,
    serialize_history,
)
from . import patterns
from .strategy import (
    StrategyState,
    StrategyViolation,
    fp_move,
    initial_state,
    note_sp_move,
)

__all__ = [
    "MAX_BOARD",
    "MIN_BOARD",
    "ENGINE_MOVE_BOUND",
    "ServiceError",
    "SessionRecord",
    "SessionStore",
    "analysis_view",
    "create_app",
    "drop_session",
    "load_session",
    "open_session",
    "play_move",
    "session_view",
]

MIN_BOARD = 5
MAX_BOARD = 64

# The verified theorem bound; trips a hard assertion if ever exceeded.
ENGINE_MOVE_BOUND = 21

_STATUSES = ("AwaitingHuman", "EngineWon", "HumanWon", "Aborted")


class ServiceError(Exception):
    """An error with a stable code and an HTTP status."""

    def __init__(self, code: str, message: str, status: int):
        super().__init__(message)
        self.code = code
        self.message = message
        self.status = status


def _unknown_session(session_id: str) -> ServiceError:
    return ServiceError("UnknownSession", f"no session {session_id!r}", 404)


# -- persistence -------------------------------------------------------------

@dataclass
class SessionRecord:
    """One stored game; ``history`` is authoritative, the board derived."""

    id: str
    n: int
    status: str
    history: GameHistory
    state: StrategyState
    created: float
    updated: float

    def board(self) -> ColoredBoard:
        return self.history.final_board()


class SessionStore:
    """SQLite-backed map from session id to serialized session.

    One connection guarded by a lock (histories are tiny, writes are
    single-row); per-session locks serialize mutations on the same game
    while distinct sessions proceed in parallel.
    """

    def __init__(self, path: str = ":memory:"):
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.execute(
            """
            CREATE TABLE IF NOT EXISTS sessions (
                id      TEXT PRIMARY KEY,
                n       INTEGER NOT NULL,
                status  TEXT NOT NULL,
                history TEXT NOT NULL,
                state   TEXT NOT NULL,
                created REAL NOT NULL,
                updated REAL NOT NULL
            )
            """
        )
        self._conn.commit()
        self._db_lock = threading.Lock()
        self._locks: Dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def lock_for(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            lock = self._locks.get(session_id)
            if lock is None:
                lock = self._locks[session_id] = threading.Lock()
            return lock

    def save(self, rec: SessionRecord) -> None:
        row = (
            rec.id,
            rec.n,
            rec.status,
            serialize_history(rec.history),
            rec.state.to_text(),
            rec.created,
            rec.updated,
        )
        with self._db_lock:
            self._conn.execute(
                "INSERT OR REPLACE INTO sessions VALUES (?, ?, ?, ?, ?, ?, ?)",
                row,
            )
            self._conn.commit()

    def load(self, session_id: str) -> Optional[SessionRecord]:
        with self._db_lock:
            row = self._conn.execute(
                "SELECT id, n, status, history, state, created, updated"
                " FROM sessions WHERE id = ?",
                (session_id,),
            ).fetchone()
        if row is None:
            return None
        history = parse_script(row[3])
        if history.n != row[1]:
            raise ServiceError(
                "CorruptSession", "stored history does not match board size", 500
            )
        return SessionRecord(
            id=row[0],
            n=row[1],
            status=row[2],
            history=history,
            state=StrategyState.from_text(row[4]),
            created=row[5],
            updated=row[6],
        )

    def delete(self, session_id: str) -> bool:
        with self._db_lock:
            cur = self._conn.execute(
                "DELETE FROM sessions WHERE id = ?", (session_id,)
            )
            self._conn.commit()
        with self._locks_guard:
            self._locks.pop(session_id, None)
        return cur.rowcount > 0

    def close(self) -> None:
        with self._db_lock:
            self._conn.close()


# -- engine glue -------------------------------------------------------------

def _engine_turn(rec: SessionRecord) -> Dict[str, Any]:
    """Let the engine move on the session's current position.

    Returns the move view and mutates ``rec`` (history, state, status).
    Any rule breach (illegal edge, bound overrun) raises ``ServiceError``
    rather than corrupting the session.
    """
    board = rec.board()
    try:
        decision = fp_move(board.kernel(), rec.state)
    except StrategyViolation as exc:
        raise ServiceError("EngineInvariant", f"engine violation: {exc}", 500)
    u, v = decision.edge
    if board.state(u, v) is not None:
        raise ServiceError(
            "EngineInvariant", "engine chose an already-claimed edge", 500
        )
    if decision.next_state.fp_move_count > ENGINE_MOVE_BOUND:
        raise ServiceError(
            "EngineInvariant",
            f"engine exceeded its {ENGINE_MOVE_BOUND}-move bound",
            500,
        )
    move = rec.history.append(Player.FP, u, v)
    rec.state = decision.next_state
    after = rec.board()
    won = after.kernel().find_k4(int(Player.FP)) is not None
    if won:
        rec.status = "EngineWon"
    return {
        "player": "FP",
        "u": move.u,
        "v": move.v,
        "ply": move.ply,
        "reason": decision.reason,
        "detail": decision.detail,
    }


def _check_replay(rec: SessionRecord) -> None:
    """Re-assert that the stored history replays legally (cheap, run on
    every mutation)."""
    try:
        rec.history.final_board()
    except BoardError as exc:  # pragma: no cover - guarded by construction
        raise ServiceError("CorruptSession", f"history no longer replays: {exc}", 500)


# -- views -------------------------------------------------------------------

def _edges(board: ColoredBoard, player: Player) -> List[List[int]]:
    return [[u, v] for u, v in board.edges(player)]


def _threat_view(board: ColoredBoard, player: Player) -> List[Dict[str, Any]]:
    return [
        {"quad": list(quad), "missing": list(missing)}
        for quad, missing in board.kernel_view().threats(int(player))
    ]


def _seed_view(board: ColoredBoard, player: Player) -> List[Dict[str, Any]]:
    return [
        {"quad": list(quad), "shape": shape}
        for quad, shape in board.kernel_view().threat_seeds(int(player))
    ]


def session_view(rec: SessionRecord) -> Dict[str, Any]:
    board = rec.board()
    return {
        "id": rec.id,
        "n": rec.n,
        "status": rec.status,
        "created": rec.created,
        "updated": rec.updated,
        "board": {
            "fp": _edges(board, Player.FP),
            "sp": _edges(board, Player.SP),
        },
        "moves": [
            {"player": m.player.name, "u": m.u, "v": m.v, "ply": m.ply}
            for m in rec.history.moves
        ],
        "engine": {
            "move_count": rec.state.fp_move_count,
            "stage": rec.state.stage,
            "move_bound": ENGINE_MOVE_BOUND,
        },
    }


def analysis_view(rec: SessionRecord) -> Dict[str, Any]:
    board = rec.board()
    matched = []
    for fixture in patterns.fixtures().values():
        embedding = patterns.match_pattern(board, fixture)
        if embedding is not None:
            matched.append({"fixture": fixture.name, "embedding": embedding})
    return {
        "threats": {
            "fp": _threat_view(board, Player.FP),
            "sp": _threat_view(board, Player.SP),
        },
        "threat_seeds": {
            "fp": _seed_view(board, Player.FP),
            "sp": _seed_view(board, Player.SP),
        },
        "fixtures": matched,
        "labels": {
            name: list(verts) for name, verts in rec.state.labels
        },
        "stage": rec.state.stage,
    }


# -- session operations ------------------------------------------------------
# Plain functions over a store; the HTTP endpoints and the terminal player
# share them so both fronts enforce identical rules.

def open_session(store: SessionStore, n: Any) -> Dict[str, Any]:
    """Create a game on K^n; the engine claims the first edge immediately."""
    if not isinstance(n, int) or isinstance(n, bool) or not MIN_BOARD <= n <= MAX_BOARD:
        raise ServiceError(
            "InvalidBoardSize",
            f"n must be an integer in [{MIN_BOARD}, {MAX_BOARD}]",
            422,
        )
    now = time.time()
    rec = SessionRecord(
        id=secrets.token_urlsafe(12),
        n=n,
        status="AwaitingHuman",
        history=GameHistory(n),
        state=initial_state(),
        created=now,
        updated=now,
    )
    engine_move = _engine_turn(rec)
    _check_replay(rec)
    rec.updated = time.time()
    store.save(rec)
    view = session_view(rec)
    view["engine_move"] = engine_move
    return view


def load_session(store: SessionStore, session_id: str) -> SessionRecord:
    rec = store.load(session_id)
    if rec is None:
        raise _unknown_session(session_id)
    return rec


def play_move(
    store: SessionStore, session_id: str, u: Any, v: Any
) -> Dict[str, Any]:
    """Apply the human's edge, then the engine's reply if the game goes on."""
    with store.lock_for(session_id):
        rec = load_session(store, session_id)
        if rec.status != "AwaitingHuman":
            raise ServiceError(
                "NotYourTurn", f"session status is {rec.status}", 409
            )
        if (
            not isinstance(u, int) or isinstance(u, bool)
            or not isinstance(v, int) or isinstance(v, bool)
        ):
            raise ServiceError("BadEdge", "u and v must be integers", 422)
        board = rec.board()
        if not (0 <= u < rec.n and 0 <= v < rec.n) or u == v:
            raise ServiceError(
                "BadEdge", f"{u}-{v} is not an edge of this board", 422
            )
        if board.state(u, v) is not None:
            raise ServiceError("AlreadyClaimed", f"{u}-{v} is taken", 409)

        human = rec.history.append(Player.SP, u, v)
        rec.state = note_sp_move(rec.state, (u, v))
        after = rec.board()
        engine_move: Optional[Dict[str, Any]] = None
        if after.kernel().find_k4(int(Player.SP)) is not None:
            rec.status = "HumanWon"
        else:
            engine_move = _engine_turn(rec)
        _check_replay(rec)
        rec.updated = time.time()
        store.save(rec)

        final = rec.board()
        return {
            "session": session_view(rec),
            "human_move": {"player": "SP", "u": human.u, "v": human.v,
                           "ply": human.ply},
            "engine_move": engine_move,
            "threats": {
                "fp": _threat_view(final, Player.FP),
                "sp": _threat_view(final, Player.SP),
            },
        }


def drop_session(store: SessionStore, session_id: str) -> None:
    with store.lock_for(session_id):
        if not store.delete(session_id):
            raise _unknown_session(session_id)


# -- application -------------------------------------------------------------

def create_app(store_path: str = ":memory:") -> FastAPI:
    """Build the HTTP application over a session store at *store_path*."""
    app = FastAPI(title="cliquerace", docs_url=None, redoc_url=None)
    store = SessionStore(store_path)
    app.state.store = store

    @app.exception_handler(ServiceError)
    async def _service_error(_: Request, exc: ServiceError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message},
        )

    @app.post("/sessions", status_code=201)
    async def create_session(payload: Dict[str, Any]) -> Dict[str, Any]:
        return open_session(store, payload.get("n"))

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str) -> Dict[str, Any]:
        return session_view(load_session(store, session_id))

    @app.post("/sessions/{session_id}/moves")
    async def submit_move(session_id: str, payload: Dict[str, Any]) -> Dict[str, Any]:
        return play_move(store, session_id, payload.get("u"), payload.get("v"))

    @app.get("/sessions/{session_id}/analysis")
    async def analyze(session_id: str) -> Dict[str, Any]:
        return analysis_view(load_session(store, session_id))

    @app.delete("/sessions/{session_id}")
    async def delete_session(session_id: str) -> Dict[str, Any]:
        drop_session(store, session_id)
        return {"deleted": True}

    return app
