"""Benchmark the pure-Python board kernel against the compiled twin.

Each suite runs twice in subprocesses — once with ``CLIQUERACE_PURE=1``
forcing the fallback, once letting the import pick the compiled extension —
and reports wall times plus the speedup factor.

Usage::

    python3 benchmarks/bench_kernels.py           # full run
    python3 benchmarks/bench_kernels.py --quick   # ~5x smaller workloads
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

SUITE = r'''
import json, random, sys, time
import cliquerace._kernel as K

quick = bool(int(sys.argv[1]))
scale = 0.2 if quick else 1.0
random.seed(2024)


def mid_game_board(n: int, moves: int) -> "K.BitBoard":
    b = K.BitBoard(n)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    random.shuffle(pairs)
    for i in range(moves):
        u, v = pairs[i]
        b.claim(u, v, K.FP if i % 2 == 0 else K.SP)
    return b


timings = {}

# -- claim/unclaim churn ------------------------------------------------
b = K.BitBoard(17)
reps = int(400_000 * scale)
t0 = time.perf_counter()
for i in range(reps):
    b.claim(i % 16, 16, K.FP)
    b.unclaim(i % 16, 16, K.FP)
timings["claim/unclaim pair"] = (time.perf_counter() - t0, reps)

# -- completion scans on mid-game boards ---------------------------------
boards = [mid_game_board(17, m) for m in (10, 20, 30, 40)]
reps = int(40_000 * scale)
t0 = time.perf_counter()
for i in range(reps):
    board = boards[i % len(boards)]
    board.completion_edges(K.FP)
    board.completion_edges(K.SP)
timings["completion_edges x2"] = (time.perf_counter() - t0, reps)

reps = int(40_000 * scale)
t0 = time.perf_counter()
for i in range(reps):
    board = boards[i % len(boards)]
    board.threats(K.FP)
timings["threats"] = (time.perf_counter() - t0, reps)

reps = int(200_000 * scale)
t0 = time.perf_counter()
for i in range(reps):
    board = boards[i % len(boards)]
    board.completes_k4(0, 1, K.FP)
    board.has_k4(K.SP)
timings["completes_k4 + has_k4"] = (time.perf_counter() - t0, reps)

# -- canonical labelling --------------------------------------------------
cboards = [mid_game_board(17, m) for m in (8, 14, 22)]
classes = {0: 4096, 3: 4097, 5: 9}
marks = {}
for board in cboards:
    for e in board.edges(K.SP)[:2]:
        marks[e] = 1
reps = int(6_000 * scale)
t0 = time.perf_counter()
for i in range(reps):
    board = cboards[i % len(cboards)]
    K.canonical_form(board.n, board.fp, board.sp, classes, marks)
timings["canonical_form"] = (time.perf_counter() - t0, reps)

# -- minimax reference search --------------------------------------------
reps = 3 if quick else 10
t0 = time.perf_counter()
for _ in range(reps):
    board = K.BitBoard(6)
    K.minimax_first_player_forces(board, K.FP, 3, 7, {})
timings["minimax K3 on empty K6"] = (time.perf_counter() - t0, reps)

print(json.dumps({"backend": K.BACKEND, "timings": timings}))
'''


def run_suite(pure: bool, quick: bool) -> dict:
    env = dict(os.environ)
    if pure:
        env["CLIQUERACE_PURE"] = "1"
    else:
        env.pop("CLIQUERACE_PURE", None)
    proc = subprocess.run(
        [sys.executable, "-c", SUITE, str(int(quick))],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(proc.stdout)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()

    pure = run_suite(pure=True, quick=args.quick)
    fast = run_suite(pure=False, quick=args.quick)
    if fast["backend"] != "compiled":
        print("note: compiled kernel unavailable; comparing pure against itself")

    width = max(len(k) for k in pure["timings"])
    print(f"{'suite':<{width}}  {'pure':>9}  {'compiled':>9}  {'speedup':>8}")
    for name, (tp, reps) in pure["timings"].items():
        tf = fast["timings"][name][0]
        ratio = tp / tf if tf > 0 else float("inf")
        print(f"{name:<{width}}  {tp:>8.3f}s  {tf:>8.3f}s  {ratio:>7.1f}x")


if __name__ == "__main__":
    main()
