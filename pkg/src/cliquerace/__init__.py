"""cliquerace: engine, exhaustive verifier and game service for the
K4-building game on a complete board.

Two players alternately claim edges of a complete graph, first player
first; whoever first owns all six edges on some four vertices wins.  The
package ships a deterministic first-player strategy, an exhaustive
verifier certifying it wins on 17 or more vertices within 21 first-player
moves, replayable historical game records, and an HTTP service for
interactive play.
"""

from cliquerace.board import (
    ColoredBoard,
    GameHistory,
    Move,
    Player,
    new_board,
    parse_script,
    serialize_history,
)

__version__ = "0.1.0"

__all__ = [
    "ColoredBoard",
    "GameHistory",
    "Move",
    "Player",
    "new_board",
    "parse_script",
    "serialize_history",
    "__version__",
]
