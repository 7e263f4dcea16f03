"""Executable move-script fixtures: recorded games plus position assertions.

A fixture is a plain-text script (see :mod:`cliquerace.board`) paired with a
JSON sidecar describing what must hold while it replays: double threats with
exact completion sets, absence of complete quads, final-position isomorphism
against a named pattern, and which moves were forced (the unique block of a
live threat).  The shipped fixtures are the two recorded courses in which a
published first-player recipe loses to a second-player double threat, and
the four short openings that trigger the diversion stage.

Usage::

    from cliquerace.replay import builtin_fixtures, run_fixture

    for fixture in builtin_fixtures().values():
        result = run_fixture(fixture)
        assert result.ok, result.failure
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, FrozenSet, List, Optional, Tuple

from cliquerace.board import (
    GameHistory,
    Player,
    ScriptError,
    new_board,
    parse_script,
)
from cliquerace import patterns

__all__ = [
    "IllegalScript",
    "FixtureResult",
    "ScriptAssertion",
    "ScriptFixture",
    "builtin_fixtures",
    "load_fixture",
    "run_fixture",
]

Edge = Tuple[int, int]

PREDICATES = ("SPDoubleThreat", "FPDoubleThreat", "NoK4Either", "MatchesFixture")


class IllegalScript(ValueError):
    """The script cannot be replayed (parse error, bad turn order, ...)."""


@dataclass(frozen=True)
class ScriptAssertion:
    """One claim about the position after a given move.

    ``after_move`` is the 0-based move index, or None for "after every
    move".  ``completions`` pins the exact completion-edge set of a double
    threat; ``fixture`` names the pattern a MatchesFixture assertion must
    match.
    """

    predicate: str
    after_move: Optional[int] = None
    completions: Optional[FrozenSet[Edge]] = None
    fixture: Optional[str] = None


@dataclass(frozen=True)
class ScriptFixture:
    """A recorded game with its assertions and labelling metadata.

    ``vertex_names`` maps board vertices back to the display names used in
    the source diagrams (vertices are numbered by first appearance);
    ``forced_moves`` lists move indices that must each be the unique block
    of a live opposing threat.
    """

    name: str
    history: GameHistory
    assertions: Tuple[ScriptAssertion, ...] = ()
    forced_moves: Tuple[int, ...] = ()
    vertex_names: Dict[int, str] = field(default_factory=dict)


@dataclass(frozen=True)
class FixtureResult:
    name: str
    ok: bool
    failure: str = ""
    checked: int = 0


def _check_alternation(history: GameHistory) -> None:
    for i, move in enumerate(history.moves):
        expected = Player.FP if i % 2 == 0 else Player.SP
        if move.player is not expected:
            raise IllegalScript(
                f"move {i} is {move.player.name}, expected {expected.name}"
            )


def _completion_set(board, player: Player) -> FrozenSet[Edge]:
    return frozenset(patterns.completion_edges(board, player))


def _eval(assertion: ScriptAssertion, board) -> Optional[str]:
    """None if the assertion holds on *board*, else a failure message."""
    p = assertion.predicate
    if p in ("SPDoubleThreat", "FPDoubleThreat"):
        player = Player.SP if p == "SPDoubleThreat" else Player.FP
        comps = _completion_set(board, player)
        if assertion.completions is not None:
            if comps != assertion.completions:
                return (
                    f"{p}: completion edges {sorted(comps)} != expected "
                    f"{sorted(assertion.completions)}"
                )
        if len(comps) < 2:
            return f"{p}: only {len(comps)} completion edge(s): {sorted(comps)}"
        return None
    if p == "NoK4Either":
        for player in (Player.FP, Player.SP):
            quad = patterns.find_k4(board, player)
            if quad is not None:
                return f"NoK4Either: {player.name} owns complete quad {quad}"
        return None
    if p == "MatchesFixture":
        assert assertion.fixture is not None
        pattern = patterns.fixtures()[assertion.fixture]
        if patterns.match_pattern(board, pattern) is None:
            return f"MatchesFixture: position does not match {assertion.fixture!r}"
        return None
    return f"unknown predicate {p!r}"


def run_fixture(fixture: ScriptFixture) -> FixtureResult:
    """Replay the fixture and evaluate every assertion.

    Assertions are checked in replay order; the result carries the first
    failure.  Raises :class:`IllegalScript` if the script itself cannot be
    replayed (assertion failures never raise).
    """
    history = fixture.history
    _check_alternation(history)
    length = len(history)
    for assertion in fixture.assertions:
        if assertion.after_move is not None and not (
            0 <= assertion.after_move < length
        ):
            raise IllegalScript(
                f"assertion after_move {assertion.after_move} out of range "
                f"for a {length}-move script"
            )
    for k in fixture.forced_moves:
        if not 0 <= k < length:
            raise IllegalScript(f"forced move index {k} out of range")

    checked = 0
    board = new_board(history.n)
    for i, move in enumerate(history.moves):
        if i in fixture.forced_moves:
            blocks = _completion_set(board, move.player.opponent)
            checked += 1
            if blocks != {move.edge}:
                return FixtureResult(
                    fixture.name,
                    False,
                    f"move {i} ({move.player.name} {move.u}-{move.v}) is not "
                    f"the unique block: open completions {sorted(blocks)}",
                    checked,
                )
        board = board.claim(move.player, move.u, move.v)
        for assertion in fixture.assertions:
            if assertion.after_move is not None and assertion.after_move != i:
                continue
            message = _eval(assertion, board)
            checked += 1
            if message:
                return FixtureResult(
                    fixture.name, False, f"after move {i}: {message}", checked
                )
    return FixtureResult(fixture.name, True, "", checked)


# -- loading ---------------------------------------------------------------

def _parse_sidecar(name: str, data: dict, history: GameHistory) -> ScriptFixture:
    assertions: List[ScriptAssertion] = []
    for item in data.get("assertions", ()):
        predicate = item["predicate"]
        if predicate not in PREDICATES:
            raise IllegalScript(f"{name}: unknown predicate {predicate!r}")
        after = item.get("after_move")
        if after == "all":
            after = None
        completions = None
        if "completions" in item:
            completions = frozenset(
                (min(u, v), max(u, v)) for u, v in item["completions"]
            )
        assertions.append(
            ScriptAssertion(
                predicate=predicate,
                after_move=after,
                completions=completions,
                fixture=item.get("fixture"),
            )
        )
    vertex_names = {int(k): str(v) for k, v in data.get("vertex_names", {}).items()}
    return ScriptFixture(
        name=name,
        history=history,
        assertions=tuple(assertions),
        forced_moves=tuple(data.get("forced_moves", ())),
        vertex_names=vertex_names,
    )


def load_fixture(script_text: str, sidecar_text: str, name: str) -> ScriptFixture:
    """Build a fixture from script and sidecar file contents."""
    try:
        history = parse_script(script_text)
    except ScriptError as exc:
        raise IllegalScript(f"{name}: {exc}") from exc
    return _parse_sidecar(name, json.loads(sidecar_text), history)


def builtin_fixtures() -> Dict[str, ScriptFixture]:
    """All fixtures shipped in the package data directory."""
    out: Dict[str, ScriptFixture] = {}
    root = resources.files("cliquerace").joinpath("data")
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if not entry.name.endswith(".game"):
            continue
        stem = entry.name[: -len(".game")]
        sidecar = root.joinpath(stem + ".json")
        script_text = entry.read_text()
        sidecar_text = sidecar.read_text() if sidecar.is_file() else "{}"
        out[stem] = load_fixture(script_text, sidecar_text, stem)
    return out
