"""Tangles: representation, well-formedness check, extraction from regions, and storage."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

from .game import ParityGame, SubgameMask, VertexSet, Violation


@dataclass(eq=False)
class Tangle:
    priority: int
    vertices: tuple[int, ...]
    witness: dict[int, int]
    escapes: tuple[int, ...]
    id: int = -1

    @property
    def player(self) -> int:
        return self.priority & 1

    @property
    def is_dominion(self) -> bool:
        return not self.escapes

    def __len__(self) -> int:
        return len(self.vertices)

    def describe(self, game: ParityGame | None = None) -> str:
        name = game.name if game is not None else str
        vs = ",".join(name(v) for v in self.vertices)
        es = ",".join(name(v) for v in self.escapes)
        return f"tangle {self.id} p={self.priority} V={{{vs}}} esc={{{es}}}"


def strongly_connected_components(nodes: Iterable[int], successors: Callable[[int], Iterable[int]]) -> list[list[int]]:
    """Tarjan's algorithm with an explicit stack.

    Components come out in reverse topological order (sinks first).  Successors
    outside ``nodes`` are ignored.
    """
    nodes = list(nodes)
    member = set(nodes)
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    onstack: set[int] = set()
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        onstack.add(root)
        work = [(root, iter(successors(root)))]
        while work:
            v, it = work[-1]
            pushed = False
            for w in it:
                if w not in member:
                    continue
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    onstack.add(w)
                    work.append((w, iter(successors(w))))
                    pushed = True
                    break
                if w in onstack and index[w] < low[v]:
                    low[v] = index[w]
            if pushed:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    onstack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def losing_cycles(
    nodes: Iterable[int],
    successors: Callable[[int], Iterable[int]],
    priority: Sequence[int],
    player: int,
) -> list[list[int]]:
    """Strongly connected pieces holding a cycle whose top priority is not ``player``'s parity.

    Nontrivial components are inspected one at a time: a component topped by a
    priority of the wrong parity is reported, otherwise its top vertices are
    dropped and the rest is decomposed again.
    """
    bad: list[list[int]] = []
    work = [list(nodes)]
    while work:
        part = work.pop()
        inside = set(part)

        def succ(v: int, inside=inside) -> Iterable[int]:
            return (w for w in successors(v) if w in inside)

        for comp in strongly_connected_components(part, succ):
            if len(comp) == 1:
                v = comp[0]
                if v not in set(successors(v)):
                    continue
            top = max(priority[v] for v in comp)
            if top % 2 != player:
                bad.append(sorted(comp))
                continue
            rest = [v for v in comp if priority[v] != top]
            if rest:
                work.append(rest)
    return bad


def restricted_successors(game: ParityGame, vertices: Iterable[int], witness: Mapping[int, int], player: int) -> Callable[[int], list[int]]:
    """Edges of the witness-restricted graph: ``player`` follows the witness, the opponent moves freely inside."""
    inside = set(vertices)
    owner, succs = game.owner, game.successors

    def succ(v: int) -> list[int]:
        if owner[v] == player:
            w = witness.get(v)
            return [w] if w is not None and w in inside else []
        return [w for w in succs[v] if w in inside]

    return succ


def compute_escapes(game: ParityGame, vertices: Iterable[int], player: int, within: Sequence[int] | None = None) -> tuple[int, ...]:
    inside = set(vertices)
    out = set()
    for v in inside:
        if game.owner[v] != player:
            for w in game.successors[v]:
                if w not in inside and (within is None or within[w]):
                    out.add(w)
    return tuple(sorted(out))


def check_tangle(game: ParityGame, t: Tangle, within: VertexSet | None = None) -> list[Violation]:
    """Every way ``t`` fails to be a tangle of ``game``.

    Escapes are recomputed against ``within`` (the current subgame) when given,
    against the whole game otherwise.
    """
    out: list[Violation] = []
    n = game.vertex_count
    U = list(t.vertices)
    if not U:
        return [Violation(t.id, "nonempty", "tangle has no vertices")]
    if any(not 0 <= v < n for v in U):
        return [Violation(t.id, "range", "vertex id out of range")]
    if list(U) != sorted(set(U)):
        out.append(Violation(t.id, "sorted", "vertex list is not sorted and duplicate-free"))
    inside = set(U)
    top = max(game.priority[v] for v in U)
    if top != t.priority:
        out.append(Violation(t.id, "priority", f"pr(U)={top} but tangle priority is {t.priority}"))
    alpha = t.player
    for v in U:
        if game.owner[v] == alpha:
            w = t.witness.get(v)
            if w is None:
                out.append(Violation(v, "witness-total", f"no witness move for {game.name(v)}"))
            elif w not in inside:
                out.append(Violation(v, "witness-inside", f"witness move {game.name(v)}->{game.name(w)} leaves the tangle"))
            elif w not in game.successors[v]:
                out.append(Violation(v, "witness-edge", f"{game.name(v)}->{game.name(w)} is not an edge"))
    for v in t.witness:
        if v not in inside or game.owner[v] != alpha:
            out.append(Violation(v, "witness-domain", f"witness defined on {v} outside the tangle's {alpha}-vertices"))
    succ = restricted_successors(game, U, t.witness, alpha)
    comps = strongly_connected_components(U, succ)
    if len(comps) != 1:
        out.append(Violation(t.id, "strongly-connected", f"{len(comps)} components"))
    elif len(U) == 1 and U[0] not in succ(U[0]):
        out.append(Violation(t.id, "strongly-connected", "single vertex without a cycle"))
    for cyc in losing_cycles(U, succ, game.priority, alpha):
        out.append(Violation(tuple(cyc), "cycles-won", f"opponent wins a cycle through {[game.name(v) for v in cyc]}"))
    expected = compute_escapes(game, U, alpha, within.mask if within is not None else None)
    if tuple(t.escapes) != expected:
        out.append(Violation(t.id, "escapes", f"escapes {list(t.escapes)} != recomputed {list(expected)}"))
    return out


@dataclass
class TangleStore:
    """Learned tangles with per-vertex indices.

    ``tangles[id]`` is the tangle with that id, or ``None`` once pruned (or for
    ids handed out to dominions that were never stored).
    """

    n: int
    tangles: list[Tangle | None] = field(default_factory=list)
    vertex_index: list[list[int]] = field(default=None)  # type: ignore[assignment]
    escape_index: list[list[int]] = field(default=None)  # type: ignore[assignment]
    fingerprints: dict[tuple[int, ...], int] = field(default_factory=dict)
    live: int = 0

    def __post_init__(self) -> None:
        if self.vertex_index is None:
            self.vertex_index = [[] for _ in range(self.n)]
        if self.escape_index is None:
            self.escape_index = [[] for _ in range(self.n)]

    def __len__(self) -> int:
        return self.live

    def __iter__(self):
        return (t for t in self.tangles if t is not None)

    def issue_id(self) -> int:
        self.tangles.append(None)
        return len(self.tangles) - 1

    def find(self, vertices: Iterable[int]) -> Tangle | None:
        tid = self.fingerprints.get(tuple(sorted(vertices)))
        return None if tid is None else self.tangles[tid]


def store_add(store: TangleStore, t: Tangle) -> bool:
    """Add ``t`` unless a tangle with the same vertex set is stored; True when added."""
    key = t.vertices
    if key in store.fingerprints:
        return False
    t.id = len(store.tangles)
    store.tangles.append(t)
    store.fingerprints[key] = t.id
    for v in t.vertices:
        store.vertex_index[v].append(t.id)
    for v in t.escapes:
        store.escape_index[v].append(t.id)
    store.live += 1
    return True


def store_prune(store: TangleStore, removed: Iterable[int]) -> TangleStore:
    """Drop tangles meeting ``removed`` and escape entries pointing into it (in place)."""
    removed = list(removed)
    gone = set(removed)
    tangles = store.tangles
    for v in removed:
        for tid in store.vertex_index[v]:
            t = tangles[tid]
            if t is not None:
                tangles[tid] = None
                del store.fingerprints[t.vertices]
                store.live -= 1
        store.vertex_index[v] = []
    for v in removed:
        for tid in store.escape_index[v]:
            t = tangles[tid]
            if t is not None and gone.intersection(t.escapes):
                # copy, so tangles already handed out (e.g. in a trace) keep their escapes
                tangles[tid] = replace(t, escapes=tuple(w for w in t.escapes if w not in gone))
        store.escape_index[v] = []
    return store


# Extraction ----------------------------------------------------------------------


def reduce_marked(
    game: ParityGame,
    active: Sequence[int],
    rmap: Sequence[int],
    p: int,
    region: Iterable[int],
    strat: Sequence[int],
    player: int,
    seeds_only_check: bool = False,
) -> tuple[set[int], bool]:
    """Shrink a region to the part where the opponent cannot leave for a lower region.

    Region membership is ``rmap[v] == p``; a vertex ``w`` is in a lower region
    when ``active[w]`` and ``rmap[w] < p``.  Returns the reduced set and whether
    any vertex escaped at all.
    """
    owner, succs, preds, pr = game.owner, game.successors, game.predecessors, game.priority
    alive = set(region)
    queue = []
    for v in alive:
        if seeds_only_check and pr[v] != p:
            continue
        if owner[v] == player:
            s = strat[v]
            if s < 0 or rmap[s] != p or not active[s]:
                queue.append(v)
        else:
            for w in succs[v]:
                if active[w] and rmap[w] < p:
                    queue.append(v)
                    break
    escaped = bool(queue)
    for v in queue:
        alive.discard(v)
    i = 0
    while i < len(queue):
        v = queue[i]
        i += 1
        for u in preds[v]:
            if u in alive and (owner[u] != player or strat[u] == v):
                alive.discard(u)
                queue.append(u)
    return alive, escaped


def extract_marked(
    game: ParityGame,
    active: Sequence[int],
    rmap: Sequence[int],
    p: int,
    region: Sequence[int],
    strat: Sequence[int],
    highest: bool,
    skip_reduction: bool = False,
) -> list[Tangle]:
    player = p & 1
    if skip_reduction:
        reduced, escaped = reduce_marked(game, active, rmap, p, region, strat, player, seeds_only_check=True)
        if escaped:
            return []
    else:
        reduced, _ = reduce_marked(game, active, rmap, p, region, strat, player)
    if not reduced:
        return []
    owner, succs = game.owner, game.successors

    def make(vs: Iterable[int]) -> Tangle:
        vs = sorted(vs)
        witness = {v: strat[v] for v in vs if owner[v] == player}
        return Tangle(p, tuple(vs), witness, compute_escapes(game, vs, player, active))

    if highest:
        return [make(reduced)]

    def succ(v: int) -> list[int]:
        if owner[v] == player:
            return [strat[v]]
        return [w for w in succs[v] if w in reduced]

    out = []
    comp_of: dict[int, int] = {}
    comps = strongly_connected_components(sorted(reduced), succ)
    for i, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = i
    for i, comp in enumerate(comps):
        if len(comp) == 1 and comp[0] not in succ(comp[0]):
            continue
        if all(comp_of[w] == i for v in comp for w in succ(v)):
            out.append(make(comp))
    return out


def _marks_for(subgame: SubgameMask, region: Iterable[int], p: int, strategy: Mapping[int, int]) -> tuple[bytearray, list[int], list[int]]:
    n = subgame.game.vertex_count
    active = bytearray(subgame.active.mask)
    rmap = [-1] * n
    region = list(region)
    for v in region:
        rmap[v] = p
    strat = [-1] * n
    for v, w in strategy.items():
        strat[v] = w
    return active, rmap, strat


def reduce_region(subgame: SubgameMask, region: Iterable[int], strategy: Mapping[int, int], player: int, p: int) -> VertexSet:
    """Greatest subset of ``region`` the opponent cannot leave for the rest of ``subgame``
    while ``player`` follows ``strategy``."""
    region = list(region)
    active, rmap, strat = _marks_for(subgame, region, p, strategy)
    reduced, _ = reduce_marked(subgame.game, active, rmap, p, region, strat, player)
    return VertexSet(subgame.game.vertex_count, reduced)


def extract_tangles(
    subgame: SubgameMask,
    region: Iterable[int],
    strategy: Mapping[int, int],
    player: int,
    p: int,
    region_map: Mapping[int, int] | None = None,
    is_highest_region_of_player: bool = False,
    skip_reduction: bool = False,
) -> list[Tangle]:
    """Tangles of ``region`` (a tangle-attractor result at priority ``p`` in ``subgame``).

    ``subgame`` is the part of the game not covered by higher regions;
    ``region_map`` may list those higher regions, and the vertices it names are
    then excluded from the subgame.  Escapes are computed against
    ``subgame.active`` plus the higher regions.
    """
    if player != p & 1:
        raise ValueError("region player must match the parity of p")
    region = list(region)
    active, rmap, strat = _marks_for(subgame, region, p, strategy)
    for v, q in (region_map or {}).items():
        if q > p:
            rmap[v] = q
            active[v] = 1
    return extract_marked(subgame.game, active, rmap, p, region, strat, is_highest_region_of_player, skip_reduction)
