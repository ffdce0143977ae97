"""Parity game arena, vertex sets, subgame views and the PGSolver text formats."""

from __future__ import annotations

import itertools
import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence, TextIO

log = logging.getLogger(__name__)

EVEN = 0
ODD = 1


def player_name(player: int) -> str:
    return "Even" if player == EVEN else "Odd"


class Violation(NamedTuple):
    """One broken rule: where (vertex, edge or cycle), which rule, and a human-readable note."""

    where: object
    rule: str
    detail: str = ""


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class InvalidGameError(ValueError):
    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        shown = "; ".join(f"{v.rule} at {v.where}" for v in self.violations[:5])
        super().__init__(f"invalid game: {shown}")


@dataclass(frozen=True, eq=True)
class ParityGame:
    """An arena ``(V_Even, V_Odd, E, pr)`` over dense vertex ids ``0..n-1``.

    ``predecessors`` is the transpose of ``successors``; use :meth:`build` to
    have it computed.  Instances are never mutated after construction.
    """

    priority: tuple[int, ...]
    owner: tuple[int, ...]
    successors: tuple[tuple[int, ...], ...]
    predecessors: tuple[tuple[int, ...], ...]
    labels: tuple[str | None, ...] | None = None

    @classmethod
    def build(
        cls,
        priority: Sequence[int],
        owner: Sequence[int],
        successors: Sequence[Sequence[int]],
        labels: Sequence[str | None] | None = None,
    ) -> "ParityGame":
        n = len(priority)
        preds: list[list[int]] = [[] for _ in range(n)]
        for u, succ in enumerate(successors):
            for v in succ:
                if 0 <= v < n:
                    preds[v].append(u)
        return cls(
            tuple(priority),
            tuple(owner),
            tuple(tuple(s) for s in successors),
            tuple(tuple(p) for p in preds),
            tuple(labels) if labels is not None else None,
        )

    @property
    def vertex_count(self) -> int:
        return len(self.priority)

    @property
    def edge_count(self) -> int:
        return sum(len(s) for s in self.successors)

    def __len__(self) -> int:
        return len(self.priority)

    def name(self, v: int) -> str:
        if self.labels is not None and self.labels[v]:
            return self.labels[v]
        return str(v)

    def vertex_of(self, name: str) -> int:
        """Look up a vertex by label (falls back to the numeric id)."""
        if self.labels is not None:
            for v, label in enumerate(self.labels):
                if label == name:
                    return v
        return int(name)

    def vertices(self, names: Iterable[str]) -> list[int]:
        return [self.vertex_of(x) for x in names]

    def check(self) -> "ParityGame":
        problems = validate(self)
        if problems:
            raise InvalidGameError(problems)
        return self


class VertexSet:
    """Dense membership over ``[0, n)``; iteration is in ascending order."""

    __slots__ = ("mask", "_size")

    def __init__(self, n: int, members: Iterable[int] = ()):
        self.mask = bytearray(n)
        self._size = 0
        for v in members:
            self.add(v)

    @classmethod
    def full(cls, n: int) -> "VertexSet":
        s = cls(0)
        s.mask = bytearray(b"\x01") * n
        s._size = n
        return s

    @classmethod
    def from_mask(cls, mask: Sequence[int]) -> "VertexSet":
        s = cls(0)
        s.mask = bytearray(1 if x else 0 for x in mask)
        s._size = sum(s.mask)
        return s

    @property
    def capacity(self) -> int:
        return len(self.mask)

    def add(self, v: int) -> None:
        if not self.mask[v]:
            self.mask[v] = 1
            self._size += 1

    def discard(self, v: int) -> None:
        if self.mask[v]:
            self.mask[v] = 0
            self._size -= 1

    def copy(self) -> "VertexSet":
        s = VertexSet(0)
        s.mask = bytearray(self.mask)
        s._size = self._size
        return s

    def __contains__(self, v: object) -> bool:
        return isinstance(v, int) and 0 <= v < len(self.mask) and bool(self.mask[v])

    def __iter__(self) -> Iterator[int]:
        return itertools.compress(range(len(self.mask)), self.mask)

    def __len__(self) -> int:
        return self._size

    def __eq__(self, other: object) -> bool:
        if isinstance(other, VertexSet):
            return self.mask == other.mask
        if isinstance(other, (set, frozenset)):
            return set(self) == other
        return NotImplemented

    def __repr__(self) -> str:
        return f"VertexSet({sorted(self)})"


@dataclass
class SubgameMask:
    """The subgame of ``game`` induced by ``active``; edges leaving it are ignored."""

    game: ParityGame
    active: VertexSet = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.active is None:
            self.active = VertexSet.full(self.game.vertex_count)

    @classmethod
    def of(cls, game: ParityGame, vertices: Iterable[int]) -> "SubgameMask":
        return cls(game, VertexSet(game.vertex_count, vertices))

    def without(self, removed: Iterable[int]) -> "SubgameMask":
        active = self.active.copy()
        for v in removed:
            active.discard(v)
        return SubgameMask(self.game, active)

    def __contains__(self, v: object) -> bool:
        return v in self.active

    def __iter__(self) -> Iterator[int]:
        return iter(self.active)

    def __len__(self) -> int:
        return len(self.active)

    def successors(self, v: int) -> list[int]:
        mask = self.active.mask
        return [w for w in self.game.successors[v] if mask[w]]

    def top_priority(self) -> int | None:
        pr = self.game.priority
        return max((pr[v] for v in self.active), default=None)


@dataclass
class Solution:
    """Winner per vertex plus each player's strategy on the vertices it owns and wins."""

    winner: list[int]
    strategy: tuple[dict[int, int], dict[int, int]] = field(default_factory=lambda: ({}, {}))

    @classmethod
    def empty(cls, n: int) -> "Solution":
        return cls([-1] * n, ({}, {}))

    @property
    def strategy_even(self) -> dict[int, int]:
        return self.strategy[EVEN]

    @property
    def strategy_odd(self) -> dict[int, int]:
        return self.strategy[ODD]

    def region(self, player: int) -> set[int]:
        return {v for v, w in enumerate(self.winner) if w == player}

    def is_total(self) -> bool:
        return all(w in (EVEN, ODD) for w in self.winner)

    def copy(self) -> "Solution":
        return Solution(list(self.winner), (dict(self.strategy[0]), dict(self.strategy[1])))


def validate(game: ParityGame) -> list[Violation]:
    """Return every broken arena invariant (empty when the game is well formed)."""
    out: list[Violation] = []
    n = len(game.priority)
    if len(game.owner) != n or len(game.successors) != n or len(game.predecessors) != n:
        out.append(Violation(None, "shape", "per-vertex arrays differ in length"))
        return out
    if game.labels is not None and len(game.labels) != n:
        out.append(Violation(None, "shape", "label array length differs"))
    for v in range(n):
        if game.priority[v] < 0:
            out.append(Violation(v, "priority", f"negative priority {game.priority[v]}"))
        if game.owner[v] not in (EVEN, ODD):
            out.append(Violation(v, "owner", f"owner {game.owner[v]!r} is neither 0 nor 1"))
        succ = game.successors[v]
        if not succ:
            out.append(Violation(v, "left-total", "no successors"))
        if len(set(succ)) != len(succ):
            out.append(Violation(v, "duplicate-successor", f"successors {list(succ)}"))
        for w in succ:
            if not 0 <= w < n:
                out.append(Violation((v, w), "successor-range", f"successor {w} of {v} out of range"))
        for u in game.predecessors[v]:
            if not 0 <= u < n:
                out.append(Violation((u, v), "predecessor-range", f"predecessor {u} of {v} out of range"))
    expected: list[list[int]] = [[] for _ in range(n)]
    for u in range(n):
        for w in game.successors[u]:
            if 0 <= w < n:
                expected[w].append(u)
    for v in range(n):
        if sorted(expected[v]) != sorted(game.predecessors[v]):
            out.append(
                Violation(v, "transpose", f"predecessors {sorted(game.predecessors[v])} != {sorted(expected[v])}")
            )
    return out


# PGSolver text formats ---------------------------------------------------------

_HEADER = re.compile(r"parity[ \t]+(\d+)[ \t]*;")
_NODE = re.compile(r'(\d+)[ \t]+(\d+)[ \t]+([01])[ \t]+(\d+(?:[ \t]*,[ \t]*\d+)*)?(?:[ \t]+"([^"]*)")?[ \t]*;')


def parse_pgsolver(text: str | TextIO) -> ParityGame:
    """Parse a game in PGSolver format.

    Vertex ids must be dense from 0.  The header number is taken as an upper
    bound on the ids (files in the wild use both the maximum id and the vertex
    count there).  Duplicate successors are dropped with a warning.
    """
    if not isinstance(text, str):
        text = text.read()
    lines = text.splitlines()
    declared: int | None = None
    nodes: dict[int, tuple[int, int, list[int], str | None, int]] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("parity"):
            if declared is not None or nodes:
                raise ParseError("unexpected header", lineno)
            m = _HEADER.fullmatch(line)
            if not m:
                raise ParseError(f"malformed header {line!r}", lineno)
            declared = int(m.group(1))
            continue
        m = _NODE.fullmatch(line)
        if not m:
            if re.fullmatch(r"\d+[ \t]+\d+[ \t]+[01][ \t]*(\"[^\"]*\")?[ \t]*;", line):
                raise ParseError("vertex with empty successor list", lineno)
            raise ParseError(f"syntax error in {line!r}", lineno)
        vid, prio, own = int(m.group(1)), int(m.group(2)), int(m.group(3))
        if m.group(4) is None:
            raise ParseError("vertex with empty successor list", lineno)
        succ = [int(x) for x in m.group(4).replace(" ", "").replace("\t", "").split(",")]
        if vid in nodes:
            raise ParseError(f"duplicate vertex id {vid}", lineno)
        deduped = list(dict.fromkeys(succ))
        if len(deduped) != len(succ):
            log.warning("line %d: duplicate successors of vertex %d dropped", lineno, vid)
        nodes[vid] = (prio, own, deduped, m.group(5), lineno)

    if not nodes:
        raise ParseError("no vertices")
    n = max(nodes) + 1
    for vid, (_, _, succ, _, lineno) in nodes.items():
        if declared is not None and vid > declared:
            raise ParseError(f"vertex id {vid} exceeds declared maximum {declared}", lineno)
        for w in succ:
            if w >= n or w not in nodes:
                raise ParseError(f"successor {w} of vertex {vid} out of range", lineno)
    missing = [v for v in range(n) if v not in nodes]
    if missing:
        raise ParseError(f"vertex ids are not dense; missing {missing[:10]}")

    labels = [nodes[v][3] for v in range(n)]
    game = ParityGame.build(
        [nodes[v][0] for v in range(n)],
        [nodes[v][1] for v in range(n)],
        [nodes[v][2] for v in range(n)],
        labels if any(x is not None for x in labels) else None,
    )
    return game


def write_pgsolver(game: ParityGame) -> str:
    out = [f"parity {game.vertex_count - 1};\n"]
    labels = game.labels
    for v in range(game.vertex_count):
        succ = ",".join(map(str, game.successors[v]))
        label = f' "{labels[v]}"' if labels is not None and labels[v] is not None else ""
        out.append(f"{v} {game.priority[v]} {game.owner[v]} {succ}{label};\n")
    return "".join(out)


def read_game(path: str) -> ParityGame:
    with open(path, encoding="utf-8") as fh:
        return parse_pgsolver(fh.read())


def write_solution(game: ParityGame, solution: Solution) -> str:
    out = [f"paritysol {game.vertex_count - 1};\n"]
    for v in range(game.vertex_count):
        w = solution.winner[v]
        if w == game.owner[v] and v in solution.strategy[w]:
            out.append(f"{v} {w} {solution.strategy[w][v]};\n")
        else:
            out.append(f"{v} {w};\n")
    return "".join(out)


_SOL_LINE = re.compile(r"(\d+)[ \t]+([01])(?:[ \t]+(\d+))?[ \t]*;")


def parse_solution(text: str | TextIO) -> Solution:
    if not isinstance(text, str):
        text = text.read()
    declared: int | None = None
    rows: dict[int, tuple[int, int | None]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("paritysol"):
            m = re.fullmatch(r"paritysol[ \t]+(\d+)[ \t]*;", line)
            if not m or declared is not None or rows:
                raise ParseError(f"malformed solution header {line!r}", lineno)
            declared = int(m.group(1))
            continue
        m = _SOL_LINE.fullmatch(line)
        if not m:
            raise ParseError(f"syntax error in {line!r}", lineno)
        vid = int(m.group(1))
        if vid in rows:
            raise ParseError(f"duplicate vertex id {vid}", lineno)
        rows[vid] = (int(m.group(2)), int(m.group(3)) if m.group(3) is not None else None)
    if not rows:
        raise ParseError("empty solution")
    n = (declared + 1) if declared is not None else max(rows) + 1
    if max(rows) >= n or len(rows) != n:
        raise ParseError(f"solution ids are not dense over 0..{n - 1}")
    sol = Solution.empty(n)
    for v, (w, s) in rows.items():
        sol.winner[v] = w
        if s is not None:
            sol.strategy[w][v] = s
    return sol


# Preprocessing -----------------------------------------------------------------


def _plain_attractor(game: ParityGame, active: bytearray, player: int, seed: Iterable[int], strategy: dict[int, int]) -> list[int]:
    # Local queue-based attractor; the solver's attractor lives in attractors.py.
    inz = bytearray(len(active))
    order = []
    for v in seed:
        if active[v] and not inz[v]:
            inz[v] = 1
            order.append(v)
    remaining: dict[int, int] = {}
    i = 0
    owner, succs, preds = game.owner, game.successors, game.predecessors
    while i < len(order):
        v = order[i]
        i += 1
        for u in preds[v]:
            if not active[u] or inz[u]:
                continue
            if owner[u] == player:
                strategy[u] = v
            else:
                c = remaining.get(u)
                if c is None:
                    c = sum(1 for w in succs[u] if active[w])
                c -= 1
                remaining[u] = c
                if c > 0:
                    continue
            inz[u] = 1
            order.append(u)
    return order


def solve_self_loops(game: ParityGame) -> tuple[Solution, SubgameMask]:
    """Win every vertex whose self-loop settles it, together with its attractor.

    Returns the partial solution (``winner == -1`` for unsolved vertices) and the
    remaining subgame.
    """
    n = game.vertex_count
    sol = Solution.empty(n)
    active = bytearray(b"\x01") * n
    for player in (EVEN, ODD):
        seeds = []
        for v in range(n):
            if not active[v] or v not in game.successors[v]:
                continue
            won_by_owner = game.owner[v] == player and game.priority[v] % 2 == player
            forced = len(game.successors[v]) == 1 and game.priority[v] % 2 == player
            if won_by_owner or forced:
                seeds.append(v)
                if game.owner[v] == player:
                    sol.strategy[player][v] = v
        if not seeds:
            continue
        for v in _plain_attractor(game, active, player, seeds, sol.strategy[player]):
            sol.winner[v] = player
            active[v] = 0
    return sol, SubgameMask(game, VertexSet.from_mask(active))
