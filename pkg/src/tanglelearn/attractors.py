"""Standard attractor and the tangle attractor.

Both are backward searches over predecessor lists.  An opponent vertex keeps a
count of its successors not yet attracted and joins once the count reaches
zero; a tangle keeps a count of its escape vertices not yet attracted and all
of its vertices join once that count reaches zero.  Escapes leaving the
subgame do not count, so a tangle is pulled in by the lowest region that holds
one of its escapes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

from .game import ParityGame, SubgameMask, VertexSet

if TYPE_CHECKING:
    from .tangles import TangleStore

IN_Z = 2


@dataclass
class AttractorResult:
    attracted: VertexSet
    strategy: dict[int, int]
    attracted_tangles: list[int] = field(default_factory=list)
    steps: int = 0


def attract(
    game: ParityGame,
    avail: bytearray,
    player: int,
    seed: Iterable[int],
    strat: list[int],
    store: "TangleStore | None" = None,
    fired: list[int] | None = None,
) -> tuple[list[int], int]:
    """Attract to ``seed`` for ``player`` inside the subgame ``avail != 0``.

    Attracted vertices are marked ``IN_Z`` in ``avail`` and returned in order of
    attraction.  ``strat`` is filled in for attracted ``player`` vertices; seed
    entries are cleared first.  Tangles of ``player`` in ``store`` are attracted
    as a whole once their escapes inside the subgame are all attracted; their
    ids are appended to ``fired``.  Returns ``(attracted, steps)``.
    """
    owner = game.owner
    succs = game.successors
    preds = game.predecessors
    order: list[int] = []
    append = order.append
    for v in seed:
        if avail[v] != IN_Z:
            avail[v] = IN_Z
            strat[v] = -1
            append(v)

    remaining: dict[int, int] = {}
    if store is not None and store.live:
        tangles = store.tangles
        escape_index = store.escape_index
        tcount: dict[int, int] | None = {}
    else:
        tangles = escape_index = None  # type: ignore[assignment]
        tcount = None

    steps = 0
    i = 0
    while i < len(order):
        v = order[i]
        i += 1
        for u in preds[v]:
            a = avail[u]
            if not a:
                continue
            if a == IN_Z:
                if owner[u] == player and strat[u] < 0:
                    strat[u] = v
                continue
            if owner[u] == player:
                strat[u] = v
            else:
                c = remaining.get(u)
                if c is None:
                    c = 0
                    for w in succs[u]:
                        if avail[w]:
                            c += 1
                if c > 1:
                    remaining[u] = c - 1
                    continue
                strat[u] = -1
            avail[u] = IN_Z
            append(u)
        if tcount is not None:
            for tid in escape_index[v]:
                t = tangles[tid]
                if t is None or t.player != player:
                    continue
                c = tcount.get(tid)
                if c is None:
                    c = 0
                    for w in t.escapes:
                        if avail[w]:
                            c += 1
                c -= 1
                tcount[tid] = c
                if c:
                    continue
                members = t.vertices
                if not all(avail[x] for x in members):
                    continue
                steps += 1
                if fired is not None:
                    fired.append(tid)
                witness = t.witness
                for x in members:
                    if avail[x] != IN_Z:
                        avail[x] = IN_Z
                        strat[x] = witness[x] if owner[x] == player else -1
                        append(x)
    return order, steps + len(order)


def _run(subgame: SubgameMask, player: int, seed: Iterable[int], store: "TangleStore | None") -> AttractorResult:
    game = subgame.game
    seed = list(seed)
    active = subgame.active
    for v in seed:
        if v not in active:
            raise ValueError(f"seed vertex {v} is not in the subgame")
    avail = bytearray(active.mask)
    strat = [-1] * game.vertex_count
    fired: list[int] = []
    order, steps = attract(game, avail, player, seed, strat, store, fired)
    strategy = {v: strat[v] for v in order if game.owner[v] == player and strat[v] >= 0}
    return AttractorResult(VertexSet(game.vertex_count, order), strategy, fired, steps)


def attr(subgame: SubgameMask, player: int, seed: Iterable[int]) -> AttractorResult:
    """Vertices from which ``player`` can force a visit to ``seed`` within ``subgame``."""
    return _run(subgame, player, seed, None)


def tattr(subgame: SubgameMask, tangles: "TangleStore", player: int, seed: Iterable[int]) -> AttractorResult:
    """Like :func:`attr`, but also pulls in whole tangles of ``player`` whose escapes are attracted.

    Escapes outside ``subgame`` are ignored, and a tangle with no escape into
    ``subgame`` is never pulled in.

    Only tangles lying entirely inside ``subgame`` are considered.
    """
    return _run(subgame, player, seed, tangles)
