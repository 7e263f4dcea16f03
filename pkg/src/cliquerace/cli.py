"""Command-line entry point: verification, replays, canonical codes, play.

Usage::

    cliquerace verify --n 17 --mode paper --bound 21 --workers 8
    cliquerace verify-k3 --n 5
    cliquerace replay path/to/recorded.game
    cliquerace canon path/to/recorded.game
    cliquerace play --n 17
    cliquerace serve --port 8000 --store sessions.db

Exit codes: 0 verified / all assertions pass, 1 counterexample or fixture
failure, 2 usage error, 3 resource budget exhausted.  ``CLIQUERACE_BOARD_N``
and ``CLIQUERACE_WORKERS`` override the default board size and worker
count.  Progress accounting goes to standard error; standard output stays
machine-parseable.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click

from .board import parse_script, serialize_history
from .patterns import canonical_code
from .replay import load_fixture, run_fixture
from .verifier import VerificationOutcome, VerificationReport, verify, verify_k3

__all__ = ["main"]

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3

_MODES = {"full": "Full", "paper": "PaperRestricted"}


def _finish(report: VerificationReport, report_path: Optional[str]) -> int:
    """Print the one-line verdict, write the report, map outcome to exit."""
    if report_path:
        Path(report_path).write_text(json.dumps(report.as_dict(), indent=1))
    line = (
        f"{report.outcome.value} n={report.board_size} mode={report.mode.value}"
        f" max_fp_moves={report.max_fp_moves} nodes={report.nodes_expanded}"
        f" cache_hits={report.cache_hits}"
        f" states={report.distinct_canonical_states}"
        f" wall={report.wall_time:.1f}s"
    )
    if report.failure_reason:
        line += f" reason={report.failure_reason!r}"
    click.echo(line)
    if report.outcome is VerificationOutcome.VERIFIED:
        return EXIT_PASS
    if report.outcome is VerificationOutcome.RESOURCE_LIMIT:
        return EXIT_RESOURCE
    if report.counterexample is not None:
        click.echo(serialize_history(report.counterexample), err=True)
    return EXIT_FAIL


@click.group()
def main() -> None:
    """Exhaustively verified first-player engine for the quad-building game."""


@main.command("verify")
@click.option("--n", type=int, envvar="CLIQUERACE_BOARD_N", default=17,
              show_default=True, help="Board size (vertices of the complete graph).")
@click.option("--mode", type=click.Choice(sorted(_MODES)), default="paper",
              show_default=True,
              help="Opponent branching: every unclaimed edge (full) or the "
                   "published reduction (paper).")
@click.option("--bound", type=int, default=21, show_default=True,
              help="Maximum engine moves allowed on any branch.")
@click.option("--workers", type=int, envvar="CLIQUERACE_WORKERS", default=1,
              show_default=True, help="Worker processes (1 = in-process, "
              "bit-reproducible).")
@click.option("--budget-nodes", type=int, default=None,
              help="Abort with a resource verdict past this many nodes per worker.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False),
              default=None, help="Write the full report as JSON to this file.")
@click.option("--progress/--no-progress", default=True, show_default=True,
              help="Accounting lines on standard error (every millionth node).")
def verify_cmd(n: int, mode: str, bound: int, workers: int,
               budget_nodes: Optional[int], report_path: Optional[str],
               progress: bool) -> None:
    """Certify the engine against every opponent reply on K^n."""
    report = verify(
        n, _MODES[mode], bound,
        workers=workers, budget_nodes=budget_nodes, progress=progress,
    )
    sys.exit(_finish(report, report_path))


@main.command("verify-k3")
@click.option("--n", type=int, default=5, show_default=True,
              help="Board size for the triangle game.")
@click.option("--workers", type=int, envvar="CLIQUERACE_WORKERS", default=1,
              show_default=True)
@click.option("--budget-nodes", type=int, default=None)
@click.option("--report", "report_path", type=click.Path(dir_okay=False),
              default=None)
@click.option("--progress/--no-progress", default=False, show_default=True)
def verify_k3_cmd(n: int, workers: int, budget_nodes: Optional[int],
                  report_path: Optional[str], progress: bool) -> None:
    """Certify the triangle-building opening on K^n."""
    report = verify_k3(
        n, workers=workers, budget_nodes=budget_nodes, progress=progress
    )
    sys.exit(_finish(report, report_path))


@main.command()
@click.argument("script", type=click.Path(exists=True, dir_okay=False))
def replay(script: str) -> None:
    """Replay a recorded game and check its sidecar assertions.

    SCRIPT is a move list; a JSON sidecar with the same stem carries the
    assertions and the forced-move markers.
    """
    path = Path(script)
    sidecar = path.with_suffix(".json")
    if not sidecar.exists():
        raise click.UsageError(f"no assertion sidecar {sidecar}")
    fixture = load_fixture(path.read_text(), sidecar.read_text(), path.stem)
    result = run_fixture(fixture)
    click.echo(
        f"{result.name}: {'ok' if result.ok else 'FAIL'}"
        f" checked={result.checked}"
    )
    if not result.ok:
        click.echo(result.failure, err=True)
        sys.exit(EXIT_FAIL)
    sys.exit(EXIT_PASS)


@main.command()
@click.argument("script", type=click.Path(exists=True, dir_okay=False))
def canon(script: str) -> None:
    """Print the canonical code of a recorded game's final position.

    Isomorphic positions print identical codes regardless of vertex
    numbering or move order.
    """
    history = parse_script(Path(script).read_text())
    code = canonical_code(history.final_board())
    click.echo(code.hex())
    sys.exit(EXIT_PASS)


def _render_board(view: dict) -> str:
    """Adjacency panel: one row per vertex, F/S/. per pair."""
    n = view["n"]
    owner = {}
    for u, v in view["board"]["fp"]:
        owner[(u, v)] = "F"
    for u, v in view["board"]["sp"]:
        owner[(u, v)] = "S"
    header = "    " + " ".join(f"{v:>2}" for v in range(n))
    rows = [header]
    for u in range(n):
        cells = []
        for v in range(n):
            if u == v:
                cells.append(" \\")
            else:
                cells.append(" " + owner.get((min(u, v), max(u, v)), "."))
        rows.append(f"{u:>3} " + " ".join(cells))
    return "\n".join(rows)


def _echo_engine_move(move: Optional[dict]) -> None:
    if move:
        click.echo(
            f"engine claims {move['u']}-{move['v']}"
            f"  [{move['reason']}: {move['detail']}]"
        )


@main.command()
@click.option("--n", type=int, envvar="CLIQUERACE_BOARD_N", default=17,
              show_default=True, help="Board size.")
def play(n: int) -> None:
    """Play the second player against the engine in the terminal."""
    from .service import (
        ServiceError, SessionStore, open_session, play_move,
    )

    store = SessionStore(":memory:")
    try:
        view = open_session(store, n)
    except ServiceError as exc:
        raise click.UsageError(exc.message)
    session_id = view["id"]
    click.echo(f"board K^{n}; you are the second player; enter moves as u-v, q quits.")
    _echo_engine_move(view.get("engine_move"))

    while view["status"] == "AwaitingHuman":
        click.echo(_render_board(view))
        raw = click.prompt("your move", default="", show_default=False).strip()
        if raw.lower() in ("q", "quit", "exit"):
            click.echo("game abandoned")
            sys.exit(EXIT_PASS)
        parts = raw.replace(",", "-").replace(" ", "-").split("-")
        parts = [p for p in parts if p]
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            click.echo("enter two vertex numbers, e.g. 3-9")
            continue
        try:
            result = play_move(store, session_id, int(parts[0]), int(parts[1]))
        except ServiceError as exc:
            click.echo(f"rejected: {exc.message}")
            continue
        view = result["session"]
        _echo_engine_move(result["engine_move"])
        threats = result["threats"]["fp"]
        if threats and view["status"] == "AwaitingHuman":
            shown = ", ".join(
                f"{t['missing'][0]}-{t['missing'][1]} finishes {t['quad']}"
                for t in threats
            )
            click.echo(f"engine threatens: {shown}")

    click.echo(_render_board(view))
    if view["status"] == "EngineWon":
        click.echo(
            f"engine wins with {view['engine']['move_count']} moves "
            f"(bound {view['engine']['move_bound']})"
        )
    elif view["status"] == "HumanWon":
        click.echo("you win!")
    sys.exit(EXIT_PASS)


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--store", "store_path", type=click.Path(dir_okay=False),
              default=":memory:", show_default=True,
              help="SQLite file for session persistence.")
def serve(port: int, host: str, store_path: str) -> None:
    """Serve the HTTP game API."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(store_path), host=host, port=port)


if __name__ == "__main__":
    main()
