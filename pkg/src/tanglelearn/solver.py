"""Tangle learning: the search loop over top-down decompositions and the solve loop around it."""

from __future__ import annotations

import bisect
import json
import time
from dataclasses import asdict, dataclass, field

from .attractors import attract
from .game import EVEN, ODD, ParityGame, Solution, SubgameMask, solve_self_loops
from .tangles import (
    Tangle,
    TangleStore,
    check_tangle,
    extract_marked,
    losing_cycles,
    store_add,
    store_prune,
)

VARIANTS = ("tl", "atl", "otftl", "otfatl")
UNASSIGNED = -1


class SolverError(RuntimeError):
    """An internal invariant failed."""


class BudgetExceeded(SolverError):
    pass


class SolveTimeout(RuntimeError):
    pass


@dataclass
class SolverConfig:
    variant: str = "tl"
    skip_reduction: bool = False
    self_loop_preprocess: bool = False
    trace: bool = False
    debug: bool = False
    budget: int = 10**7
    deadline: float | None = None

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {', '.join(VARIANTS)}")

    @property
    def alternating(self) -> bool:
        return self.variant in ("atl", "otfatl")

    @property
    def on_the_fly(self) -> bool:
        return self.variant in ("otftl", "otfatl")


@dataclass
class SolverStats:
    tangles_learned: int = 0
    dominions_found: int = 0
    search_calls: int = 0
    decomposition_iterations: int = 0
    turns: int = 0
    tangle_attractions: int = 0
    max_region_count: int = 0
    attractor_steps: int = 0

    def line(self) -> str:
        return " ".join(f"{k}={v}" for k, v in asdict(self).items())

    def as_dict(self) -> dict[str, int]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=False)


@dataclass
class TraceEvent:
    """One learned tangle (or returned dominion) as seen when it was extracted."""

    tangle: Tangle
    search: int
    escape_regions: tuple[int, ...]
    active: bytes
    shortcut: bool = False

    @property
    def dominion(self) -> bool:
        return self.tangle.is_dominion


@dataclass(slots=True)
class _Region:
    priority: int
    vertices: list[int]
    highest: bool


class TangleSolver:
    """Single-use solver state for one game (or one subgame of it).

    ``run`` solves everything still active; ``search`` finds one dominion.
    """

    def __init__(
        self,
        game: ParityGame,
        config: SolverConfig | None = None,
        subgame: SubgameMask | None = None,
        store: TangleStore | None = None,
    ):
        self.game = game
        self.config = config or SolverConfig()
        n = game.vertex_count
        self.n = n
        if subgame is not None:
            self.active = bytearray(subgame.active.mask)
        else:
            self.active = bytearray(b"\x01") * n
        self.remaining = sum(self.active)
        self.free = bytearray(self.active)
        self.r = [UNASSIGNED] * n
        self.strat = [-1] * n
        self.store = store if store is not None else TangleStore(n)
        self.stats = SolverStats()
        self.trace: list[TraceEvent] = []
        pr = game.priority
        self.order = sorted(range(n), key=lambda v: -pr[v])
        self._neg = [-pr[v] for v in self.order]
        self.ptr = 0
        self.regions: list[_Region] = []
        self.region_count = [0, 0]
        self.solution = Solution.empty(n)

    # decomposition ------------------------------------------------------------

    def _check_clock(self) -> None:
        deadline = self.config.deadline
        if deadline is not None and time.monotonic() > deadline:
            raise SolveTimeout("deadline passed")

    def _next_region(self) -> _Region | None:
        if self.config.deadline is not None:
            self._check_clock()
        order, free, pr = self.order, self.free, self.game.priority
        i, end = self.ptr, len(order)
        while i < end and not free[order[i]]:
            i += 1
        if i == end:
            self.ptr = i
            return None
        p = pr[order[i]]
        seed = []
        while i < end and pr[order[i]] == p:
            if free[order[i]]:
                seed.append(order[i])
            i += 1
        self.ptr = i
        player = p & 1
        fired: list[int] = []
        z, steps = attract(self.game, free, player, seed, self.strat, self.store, fired)
        self.stats.attractor_steps += steps
        self.stats.tangle_attractions += len(fired)
        if self.config.debug:
            self._check_region(p, z, seed)
        r = self.r
        for v in z:
            free[v] = 0
            r[v] = p
        counts = self.region_count
        region = _Region(p, z, counts[player] == 0)
        regions = self.regions
        regions.append(region)
        counts[player] += 1
        if len(regions) > self.stats.max_region_count:
            self.stats.max_region_count = len(regions)
        return region

    def _pop_region(self) -> _Region:
        region = self.regions.pop()
        self.region_count[region.priority & 1] -= 1
        active, free, r = self.active, self.free, self.r
        for v in region.vertices:
            r[v] = UNASSIGNED
            free[v] = active[v]
        return region

    def _reset_to(self, q: int) -> None:
        """Forget all regions with priority <= q."""
        while self.regions and self.regions[-1].priority <= q:
            self._pop_region()
        self.ptr = bisect.bisect_left(self._neg, -q)

    def _reset_all(self) -> None:
        while self.regions:
            self._pop_region()
        self.ptr = 0

    # tangles --------------------------------------------------------------------

    def _extract(self, region: _Region) -> list[Tangle]:
        return extract_marked(
            self.game,
            self.active,
            self.r,
            region.priority,
            region.vertices,
            self.strat,
            region.highest,
            self.config.skip_reduction,
        )

    def _note(self, t: Tangle, shortcut: bool) -> TraceEvent | None:
        if not (self.config.trace or self.config.debug):
            return None
        r = self.r
        ev = TraceEvent(t, self.stats.search_calls, tuple(r[v] for v in t.escapes), bytes(self.active), shortcut)
        if self.config.debug:
            self._check_emitted(ev)
        return ev

    def _harvest(self, region: _Region, tangles: list[Tangle], pending: list) -> Tangle | None:
        """Return a dominion among ``tangles`` or queue them all on ``pending``."""
        for t in tangles:
            if t.is_dominion:
                t.id = self.store.issue_id()
                self.stats.tangles_learned += 1
                ev = self._note(t, region.highest)
                if ev is not None and self.config.trace:
                    self.trace.append(ev)
                return t
        for t in tangles:
            pending.append((t, self._note(t, False)))
        return None

    def _merge(self, pending: list) -> int:
        added = 0
        for t, ev in pending:
            if store_add(self.store, t):
                added += 1
                if ev is not None and self.config.trace:
                    self.trace.append(ev)
        self.stats.tangles_learned += added
        if self.stats.tangles_learned > self.config.budget:
            raise BudgetExceeded(f"learned more than {self.config.budget} tangles")
        if pending and not added:
            raise SolverError("every tangle of the decomposition was already known")
        return added

    # search ---------------------------------------------------------------------

    def top_priority(self) -> int | None:
        pr, active = self.game.priority, self.active
        for v in self.order:
            if active[v]:
                return pr[v]
        return None

    def search(self) -> Tangle:
        """Return a dominion of the active game, learning tangles on the way."""
        if not self.remaining:
            raise ValueError("search on an empty game")
        self.stats.search_calls += 1
        if self.config.on_the_fly:
            return self._search_otf()
        return self._search_standard()

    def _first_turn(self) -> int:
        self.stats.turns += 1
        return self.top_priority() & 1

    def _search_standard(self) -> Tangle:
        alternating = self.config.alternating
        turn = self._first_turn() if alternating else None
        while True:
            self._reset_all()
            self.stats.decomposition_iterations += 1
            pending: list = []
            while (region := self._next_region()) is not None:
                if alternating and region.priority & 1 != turn:
                    continue
                d = self._harvest(region, self._extract(region), pending)
                if d is not None:
                    return d
            if alternating and not pending:
                turn ^= 1
                self.stats.turns += 1
                for region in self.regions:
                    if region.priority & 1 != turn:
                        continue
                    d = self._harvest(region, self._extract(region), pending)
                    if d is not None:
                        return d
            if not pending:
                raise SolverError("a full decomposition yielded no tangle")
            self._merge(pending)

    def _search_otf(self) -> Tangle:
        alternating = self.config.alternating
        turn = self._first_turn() if alternating else None
        self._reset_all()
        self.stats.decomposition_iterations += 1
        while True:
            region = self._next_region()
            if region is None:
                if not alternating:
                    raise SolverError("a full decomposition yielded no tangle")
                turn ^= 1
                self.stats.turns += 1
                for region in list(self.regions):
                    if region.priority & 1 != turn:
                        continue
                    tangles = self._extract(region)
                    if tangles:
                        d = self._refine(region, tangles, recorded=True)
                        if d is not None:
                            return d
                        break
                else:
                    raise SolverError("a full decomposition yielded no tangle for either player")
                continue
            if alternating and region.priority & 1 != turn:
                continue
            tangles = self._extract(region)
            if tangles:
                d = self._refine(region, tangles, recorded=False)
                if d is not None:
                    return d

    def _refine(self, region: _Region, tangles: list[Tangle], recorded: bool) -> Tangle | None:
        pending: list = []
        d = self._harvest(region, tangles, pending)
        if d is not None:
            return d
        if not recorded:
            self._pop_region()
        r = self.r
        q = -1
        for t, _ in pending:
            low = min(r[v] for v in t.escapes)
            if low == UNASSIGNED:
                raise SolverError(f"tangle escapes to an unassigned vertex: {t.describe(self.game)}")
            q = max(q, low)
        self._reset_to(q)
        self._merge(pending)
        self.stats.decomposition_iterations += 1
        return None

    # solve ----------------------------------------------------------------------

    def _claim(self, d: Tangle) -> list[int]:
        """Attract the dominion ``d`` for its winner, record the win, and drop it from the game."""
        alpha = d.player
        strat = self.strat
        game = self.game
        avail = self.active
        dom, steps = attract(game, avail, alpha, d.vertices, strat)
        self.stats.attractor_steps += steps
        sol = self.solution
        own = sol.strategy[alpha]
        owner = game.owner
        for v in dom:
            avail[v] = 0
            self.free[v] = 0
            sol.winner[v] = alpha
            if owner[v] == alpha:
                own[v] = strat[v]
        own.update(d.witness)
        self.remaining -= len(dom)
        store_prune(self.store, dom)
        return dom

    def run(self) -> Solution:
        if self.config.self_loop_preprocess:
            partial, rest = solve_self_loops(self.game)
            for v in range(self.n):
                if self.active[v] and not rest.active.mask[v]:
                    self.active[v] = 0
                    self.free[v] = 0
                    self.remaining -= 1
                    w = partial.winner[v]
                    self.solution.winner[v] = w
                    if v in partial.strategy[w]:
                        self.solution.strategy[w][v] = partial.strategy[w][v]
        while self.remaining:
            d = self.search()
            self.stats.dominions_found += 1
            self._reset_all()
            self._claim(d)
        return self.solution

    # debug checks -------------------------------------------------------------

    def _check_region(self, p: int, z: list[int], seed: list[int]) -> None:
        game, player = self.game, p & 1
        avail = bytearray(self.free)
        for v in z:
            avail[v] = 1
        again, _ = attract(game, avail, player, z, [-1] * self.n, self.store)
        if len(again) != len(z):
            raise SolverError(f"region {p} is not maximal")
        inside = set(z)
        strat, owner, succs = self.strat, game.owner, game.successors

        def succ(v: int) -> list[int]:
            if owner[v] == player:
                return [strat[v]] if strat[v] in inside else []
            return [w for w in succs[v] if w in inside]

        if losing_cycles(z, succ, game.priority, player):
            raise SolverError(f"region {p} holds a cycle won by the opponent")
        back: dict[int, list[int]] = {v: [] for v in z}
        for v in z:
            for w in succ(v):
                back[w].append(v)
        seen = set(seed)
        stack = list(seed)
        while stack:
            v = stack.pop()
            for u in back[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        if len(seen) != len(inside):
            raise SolverError(f"region {p} has vertices that cannot reach priority {p}")

    def _check_emitted(self, ev: TraceEvent) -> None:
        t = ev.tangle
        from .game import VertexSet

        problems = check_tangle(self.game, t, VertexSet.from_mask(ev.active))
        if ev.shortcut:
            problems = [x for x in problems if x.rule != "strongly-connected"]
        if problems:
            raise SolverError(f"emitted tangle is malformed: {problems[:3]}")
        for q in ev.escape_regions:
            if q <= t.priority or q & 1 != t.player:
                raise SolverError(f"escape of {t.describe(self.game)} lies in region {q}")


def solve(game: ParityGame, config: SolverConfig | None = None) -> tuple[Solution, SolverStats]:
    """Solve ``game`` with tangle learning; the solution is total."""
    game.check()
    solver = TangleSolver(game, config)
    sol = solver.run()
    return sol, solver.stats


def search(
    subgame: SubgameMask, store: TangleStore, config: SolverConfig | None = None
) -> tuple[TangleStore, Tangle, SolverStats]:
    """One search call: learn tangles in ``subgame`` until a dominion turns up."""
    solver = TangleSolver(subgame.game, config, subgame, store)
    d = solver.search()
    solver.stats.dominions_found += 1
    return solver.store, d, solver.stats


def _variant_search(variant: str):
    def run(subgame: SubgameMask, store: TangleStore, config: SolverConfig | None = None):
        base = config or SolverConfig()
        cfg = SolverConfig(variant, base.skip_reduction, base.self_loop_preprocess, base.trace, base.debug, base.budget, base.deadline)
        return search(subgame, store, cfg)

    return run


search_alternating = _variant_search("atl")
search_otf = _variant_search("otftl")

__all__ = [
    "EVEN",
    "ODD",
    "VARIANTS",
    "BudgetExceeded",
    "SolveTimeout",
    "SolverConfig",
    "SolverError",
    "SolverStats",
    "TangleSolver",
    "TraceEvent",
    "search",
    "search_alternating",
    "search_otf",
    "solve",
]
