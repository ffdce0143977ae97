"""Command line: ``solve``, ``verify``, ``generate`` and ``bench``.

Exit codes: 0 success, 1 unreadable or malformed input, 2 solver failure
(internal invariant or budget), 3 verifier rejection, 4 timeout.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

from . import bench
from .game import InvalidGameError, ParityGame, ParseError, parse_pgsolver, parse_solution, write_pgsolver, write_solution
from .generate import GenSpec, generate
from .oracle import verify, zielonka
from .solver import VARIANTS, SolverConfig, SolverError, SolveTimeout, TangleSolver

ALL_VARIANTS = VARIANTS + ("zlk",)

log = logging.getLogger("tanglelearn")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_game(path: str) -> ParityGame:
    game = parse_pgsolver(_read_text(path))
    game.check()
    return game


def cmd_solve(args: argparse.Namespace) -> int:
    try:
        game = _load_game(args.game)
    except (OSError, ParseError, InvalidGameError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    deadline = time.monotonic() + args.timeout if args.timeout else None
    if args.variant == "zlk":
        sol = zielonka(game)
        if args.stats or args.stats_json:
            print("stats unavailable for zlk", file=sys.stderr)
        _emit(write_solution(game, sol), args.out)
        return 0
    cfg = SolverConfig(
        args.variant,
        skip_reduction=args.skip_reduction,
        self_loop_preprocess=args.self_loops,
        trace=args.trace,
        deadline=deadline,
    )
    solver = TangleSolver(game, cfg)
    try:
        sol = solver.run()
    except SolveTimeout:
        print(f"timeout after {args.timeout}s", file=sys.stderr)
        return 4
    except (SolverError, AssertionError, RecursionError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    if args.trace:
        for ev in solver.trace:
            kind = "dominion" if ev.dominion else "tangle"
            desc = ev.tangle.describe(game).split(" ", 1)[1]
            print(f"trace search={ev.search} {kind} {desc}", file=sys.stderr)
    if args.stats:
        print(solver.stats.line(), file=sys.stderr)
    if args.stats_json:
        print(solver.stats.to_json(), file=sys.stderr)
    _emit(write_solution(game, sol), args.out)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        game = _load_game(args.game)
        sol = parse_solution(_read_text(args.solution))
    except (OSError, ParseError, InvalidGameError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if len(sol.winner) != game.vertex_count:
        print(f"error: solution has {len(sol.winner)} vertices, game has {game.vertex_count}", file=sys.stderr)
        return 1
    verdict = verify(game, sol)
    if verdict.accepted:
        print("accepted")
        return 0
    for v in verdict.violations:
        print(f"{v.rule}: {v.detail}")
    return 3


def cmd_generate(args: argparse.Namespace) -> int:
    spec = GenSpec(
        args.vertices,
        args.max_priority,
        args.min_outdeg,
        args.max_outdeg,
        args.allow_self_loops,
        args.seed,
    )
    try:
        game = generate(spec)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(write_pgsolver(game), args.out)
    return 0


def _parse_gen(text: str, seed: int) -> list[GenSpec]:
    # N,maxprio,l,h[,count]; maxprio may be empty for the default.
    parts = text.split(",")
    if len(parts) not in (4, 5):
        raise argparse.ArgumentTypeError(f"bad generator spec {text!r}; expected N,maxprio,l,h[,count]")
    n, maxp, lo, hi = parts[:4]
    count = int(parts[4]) if len(parts) == 5 else 1
    return [
        GenSpec(int(n), int(maxp) if maxp else None, int(lo), int(hi), False, seed + i)
        for i in range(count)
    ]


def cmd_bench(args: argparse.Namespace) -> int:
    variants = args.variants.split(",")
    for v in variants:
        if v not in ALL_VARIANTS:
            print(f"error: unknown variant {v!r}", file=sys.stderr)
            return 1
    jobs = []
    try:
        if args.corpus:
            jobs += bench.corpus_jobs(args.corpus, variants, args.timeout, args.skip_reduction)
        specs = []
        for g in args.gen or []:
            specs += _parse_gen(g, args.seed)
        for s in specs:
            s.check()
        jobs += bench.spec_jobs(specs, variants, args.timeout, args.skip_reduction)
    except (OSError, ValueError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not jobs:
        print("error: nothing to run; give a corpus directory or --gen", file=sys.stderr)
        return 1
    records = bench.run_bench(jobs, args.workers)
    _emit(bench.to_csv(records), args.out)
    for r in records:
        if r.error:
            print(f"{r.game} {r.variant}: {r.error}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tanglelearn", description="Parity game solving by tangle learning.")
    p.add_argument("-v", "--verbose", action="store_true", help="log warnings such as deduplicated edges")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve a PGSolver game")
    s.add_argument("game", nargs="?", default="-", help="game file, or - for stdin")
    s.add_argument("--variant", choices=ALL_VARIANTS, default="tl")
    s.add_argument("--skip-reduction", action="store_true")
    s.add_argument("--self-loops", action="store_true", help="solve self-loops before tangle learning")
    s.add_argument("--stats", action="store_true", help="print a key=value stats line on stderr")
    s.add_argument("--stats-json", action="store_true", help="print stats as JSON on stderr")
    s.add_argument("--trace", action="store_true", help="print learned tangles on stderr")
    s.add_argument("--timeout", type=float, default=None, metavar="SEC")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a solution against a game")
    v.add_argument("game")
    v.add_argument("solution", nargs="?", default="-", help="solution file, or - for stdin")
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("generate", help="write a random game")
    g.add_argument("vertices", type=int)
    g.add_argument("max_priority", type=int, nargs="?", default=None)
    g.add_argument("min_outdeg", type=int, nargs="?", default=1)
    g.add_argument("max_outdeg", type=int, nargs="?", default=2)
    g.add_argument("--allow-self-loops", action="store_true")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_generate)

    b = sub.add_parser("bench", help="run variants over a corpus and write CSV")
    b.add_argument("corpus", nargs="?", default=None, help="directory of .pg files")
    b.add_argument("--gen", action="append", metavar="N,MAXPRIO,L,H[,COUNT]", help="generated games, seeds from --seed")
    b.add_argument("--variants", default=",".join(VARIANTS))
    b.add_argument("--skip-reduction", action="store_true")
    b.add_argument("--timeout", type=float, default=60.0, metavar="SEC")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR, format="%(levelname)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
