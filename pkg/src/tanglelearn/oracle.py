"""Independent correctness instruments.

Nothing here imports the solver's attractor or SCC code: Zielonka's recursive
algorithm, a strategy-enumeration solver for tiny games, a solution verifier,
and literal fixpoint evaluations of the two attractors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping

from .game import EVEN, ODD, ParityGame, Solution, SubgameMask, Violation


@dataclass
class Verdict:
    violations: list[Violation] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.accepted


class BruteForceRefused(ValueError):
    pass


def _sccs(nodes: Iterable[int], succ: Callable[[int], Iterable[int]]) -> list[list[int]]:
    # Kosaraju with explicit stacks.
    nodes = list(nodes)
    inside = set(nodes)
    seen: set[int] = set()
    finish: list[int] = []
    rev: dict[int, list[int]] = {v: [] for v in nodes}
    for v in nodes:
        for w in succ(v):
            if w in inside:
                rev[w].append(v)
    for root in nodes:
        if root in seen:
            continue
        seen.add(root)
        stack: list[tuple[int, Iterator[int]]] = [(root, iter(succ(root)))]
        while stack:
            v, it = stack[-1]
            for w in it:
                if w in inside and w not in seen:
                    seen.add(w)
                    stack.append((w, iter(succ(w))))
                    break
            else:
                stack.pop()
                finish.append(v)
    comps = []
    assigned: set[int] = set()
    for root in reversed(finish):
        if root in assigned:
            continue
        comp = [root]
        assigned.add(root)
        i = 0
        while i < len(comp):
            for u in rev[comp[i]]:
                if u not in assigned:
                    assigned.add(u)
                    comp.append(u)
            i += 1
        comps.append(comp)
    return comps


def _bad_cycles(nodes: Iterable[int], succ: Callable[[int], Iterable[int]], priority, player: int) -> list[list[int]]:
    """Cycle-carrying vertex sets whose highest priority has the opponent's parity."""
    out = []
    work = [list(nodes)]
    while work:
        part = work.pop()
        inside = set(part)
        for comp in _sccs(part, lambda v: [w for w in succ(v) if w in inside]):
            if len(comp) == 1 and comp[0] not in succ(comp[0]):
                continue
            top = max(priority[v] for v in comp)
            if top % 2 != player:
                out.append(sorted(comp))
            else:
                rest = [v for v in comp if priority[v] != top]
                if rest:
                    work.append(rest)
    return out


def verify(game: ParityGame, solution: Solution) -> Verdict:
    """Check that both winning regions are traps for the loser and won by the given strategies."""
    out: list[Violation] = []
    n = game.vertex_count
    if len(solution.winner) != n:
        return Verdict([Violation(None, "size", f"solution has {len(solution.winner)} vertices, game has {n}")])
    for v, w in enumerate(solution.winner):
        if w not in (EVEN, ODD):
            out.append(Violation(v, "total", f"vertex {game.name(v)} has no winner"))
    if out:
        return Verdict(out)
    for player in (EVEN, ODD):
        region = {v for v in range(n) if solution.winner[v] == player}
        strategy = solution.strategy[player]
        for v, w in strategy.items():
            if v not in region or game.owner[v] != player:
                out.append(Violation(v, "strategy-domain", f"{game.name(v)} has a {player} move but is not a {player}-vertex it wins"))
        for v in sorted(region):
            if game.owner[v] == player:
                w = strategy.get(v)
                if w is None:
                    out.append(Violation(v, "strategy-missing", f"no move for {game.name(v)}"))
                elif w not in game.successors[v]:
                    out.append(Violation(v, "strategy-edge", f"{game.name(v)}->{w} is not an edge"))
                elif w not in region:
                    out.append(Violation(v, "strategy-leaves", f"{game.name(v)}->{game.name(w)} leaves the winning region"))
            else:
                for w in game.successors[v]:
                    if w not in region:
                        out.append(Violation(v, "closure", f"opponent escapes {game.name(v)}->{game.name(w)}"))

        def succ(v: int, region=region, strategy=strategy, player=player) -> list[int]:
            if game.owner[v] == player:
                w = strategy.get(v)
                return [w] if w in region else []
            return [w for w in game.successors[v] if w in region]

        for cyc in _bad_cycles(region, succ, game.priority, player):
            out.append(Violation(tuple(cyc), "cycle-lost", f"opponent wins a cycle in {[game.name(v) for v in cyc]}"))
    return Verdict(out)


# attractors as literal fixpoints ----------------------------------------------------


def naive_attr(subgame: SubgameMask, player: int, seed: Iterable[int], tangles: Iterable = ()) -> set[int]:
    """Evaluate the attractor equation by repeated full scans until nothing changes.

    ``tangles`` may hold objects with ``vertices``, ``escapes`` and ``priority``;
    those of ``player`` inside the subgame are added whole once their escapes
    into the subgame are all covered.
    """
    game = subgame.game
    V = set(subgame)
    Z = set(seed)
    mine = [t for t in tangles if t.priority % 2 == player and set(t.vertices) <= V]
    while True:
        new = set(Z)
        for v in V - Z:
            es = [w for w in game.successors[v] if w in V]
            if game.owner[v] == player:
                if any(w in Z for w in es):
                    new.add(v)
            elif all(w in Z for w in es):
                new.add(v)
        for t in mine:
            es = {w for w in t.escapes if w in V}
            if es and es <= Z:
                new.update(t.vertices)
        if new == Z:
            return Z
        Z = new


# Zielonka -----------------------------------------------------------------------


def _attractor(game: ParityGame, inside: set[int], player: int, target: set[int], strategy: dict[int, int]) -> set[int]:
    Z = set(target)
    frontier = list(target)
    while frontier:
        nxt = []
        for v in frontier:
            for u in game.predecessors[v]:
                if u in inside and u not in Z:
                    if game.owner[u] == player:
                        strategy[u] = v
                        Z.add(u)
                        nxt.append(u)
                    elif all(w in Z or w not in inside for w in game.successors[u]):
                        Z.add(u)
                        nxt.append(u)
        frontier = nxt
    return Z


def _zielonka(game: ParityGame, V: frozenset[int]):
    """Generator form of the recursion: yields subgames, receives their solutions."""
    if not V:
        return (set(), set()), ({}, {})
    p = max(game.priority[v] for v in V)
    alpha = p % 2
    top = {v for v in V if game.priority[v] == p}
    strat_a: dict[int, int] = {}
    A = _attractor(game, V, alpha, top, strat_a)
    (W1, S1) = yield frozenset(V - A)
    if not W1[1 - alpha]:
        W = [set(), set()]
        W[alpha] = set(V)
        S: list[dict[int, int]] = [{}, {}]
        S[alpha].update(S1[alpha])
        S[alpha].update(strat_a)
        for v in top:
            if game.owner[v] == alpha:
                S[alpha][v] = next(w for w in game.successors[v] if w in V)
        return (W[0], W[1]), (S[0], S[1])
    strat_b: dict[int, int] = {}
    B = _attractor(game, V, 1 - alpha, W1[1 - alpha], strat_b)
    (W2, S2) = yield frozenset(V - B)
    W = [set(W2[0]), set(W2[1])]
    W[1 - alpha] |= B
    S = [dict(S2[0]), dict(S2[1])]
    S[1 - alpha].update({v: w for v, w in S1[1 - alpha].items() if v in W1[1 - alpha]})
    S[1 - alpha].update(strat_b)
    return (W[0], W[1]), (S[0], S[1])


def zielonka(game: ParityGame | SubgameMask) -> Solution:
    """Zielonka's recursive algorithm run on an explicit stack.

    Given a subgame, vertices outside it get winner ``-1``.
    """
    if isinstance(game, SubgameMask):
        V = frozenset(game.active)
        game = game.game
    else:
        V = frozenset(range(game.vertex_count))
    stack = [_zielonka(game, V)]
    sent = None
    result = None
    while stack:
        try:
            child = stack[-1].send(sent)
        except StopIteration as stop:
            stack.pop()
            sent = stop.value
            result = sent
            continue
        stack.append(_zielonka(game, child))
        sent = None
    (W0, W1), (S0, S1) = result
    sol = Solution.empty(game.vertex_count)
    for v in W0:
        sol.winner[v] = EVEN
    for v in W1:
        sol.winner[v] = ODD
    sol.strategy[EVEN].update({v: w for v, w in S0.items() if v in W0 and game.owner[v] == EVEN})
    sol.strategy[ODD].update({v: w for v, w in S1.items() if v in W1 and game.owner[v] == ODD})
    return sol


# brute force ----------------------------------------------------------------------


def _strategy_space(game: ParityGame, player: int, vertices: Iterable[int] | None = None, inside: set[int] | None = None):
    vs = [v for v in (vertices if vertices is not None else range(game.vertex_count)) if game.owner[v] == player]
    choices = []
    for v in vs:
        opts = [w for w in game.successors[v] if inside is None or w in inside]
        choices.append(opts or list(game.successors[v]))
    return vs, choices


def _safe_vertices(game: ParityGame, player: int, strategy: Mapping[int, int]) -> set[int]:
    """Vertices from which the opponent cannot reach a cycle it wins once ``player`` is fixed."""

    def succ(v: int) -> list[int]:
        if game.owner[v] == player:
            return [strategy[v]]
        return list(game.successors[v])

    bad = set()
    for cyc in _bad_cycles(range(game.vertex_count), succ, game.priority, player):
        bad.update(cyc)
    # Backward closure: anything that can reach a bad vertex is lost.
    reach = set(bad)
    frontier = list(bad)
    while frontier:
        v = frontier.pop()
        for u in game.predecessors[v]:
            if u not in reach and v in succ(u):
                reach.add(u)
                frontier.append(u)
    return set(range(game.vertex_count)) - reach


def brute_force(game: ParityGame, bound: int = 10**6) -> Solution:
    """Solve by enumerating memoryless strategies.

    Winners come from enumerating the smaller strategy space; each player's
    strategy is then a uniform one found by enumerating that player's moves on
    its own winning region.
    """
    spaces = []
    for player in (EVEN, ODD):
        _, choices = _strategy_space(game, player)
        size = math.prod(len(c) for c in choices)
        if size > bound:
            raise BruteForceRefused(f"{size} strategies for player {player} exceed the bound {bound}")
        spaces.append(size)
    alpha = EVEN if spaces[EVEN] <= spaces[ODD] else ODD
    vs, choices = _strategy_space(game, alpha)
    won: set[int] = set()
    for pick in itertools.product(*choices):
        won |= _safe_vertices(game, alpha, dict(zip(vs, pick)))
    n = game.vertex_count
    sol = Solution.empty(n)
    for v in range(n):
        sol.winner[v] = alpha if v in won else 1 - alpha
    for player in (EVEN, ODD):
        region = sol.region(player)
        if not region:
            continue
        vs, choices = _strategy_space(game, player, sorted(region), region)
        for pick in itertools.product(*choices):
            sigma = dict(zip(vs, pick))
            full = {v: (sigma[v] if v in sigma else game.successors[v][0]) for v in range(n) if game.owner[v] == player}
            if region <= _safe_vertices(game, player, full):
                sol.strategy[player].update(sigma)
                break
        else:
            raise AssertionError("no uniform winning strategy found; determinacy violated")
    return sol
