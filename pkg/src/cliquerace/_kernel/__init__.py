"""Kernel backend selection.

Prefers the compiled extension (``cliquerace._fastcore``) and falls back to
the pure-Python twin.  Set ``CLIQUERACE_PURE=1`` to force the fallback, e.g.
for benchmarking or when debugging the reference implementation.
"""

from __future__ import annotations

import os

from cliquerace._kernel import py_impl

if os.environ.get("CLIQUERACE_PURE") == "1":
    _impl = py_impl
else:
    try:
        from cliquerace import _fastcore as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = py_impl

BACKEND = _impl.BACKEND
BitBoard = _impl.BitBoard
canonical_form = _impl.canonical_form
minimax_first_player_forces = _impl.minimax_first_player_forces

FP = py_impl.FP
SP = py_impl.SP
MAX_VERTICES = py_impl.MAX_VERTICES

__all__ = [
    "BACKEND",
    "BitBoard",
    "FP",
    "SP",
    "MAX_VERTICES",
    "canonical_form",
    "minimax_first_player_forces",
    "py_impl",
]
