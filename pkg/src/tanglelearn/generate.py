"""Random games in the style of PGSolver's ``randomgame``."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .game import ParityGame


@dataclass(frozen=True)
class GenSpec:
    """Parameters of a random game.

    Priorities are drawn uniformly from ``[min_priority, max_priority]``, both
    ends included; ``max_priority`` defaults to ``vertex_count``.
    """

    vertex_count: int
    max_priority: int | None = None
    min_outdeg: int = 1
    max_outdeg: int = 2
    self_loops_allowed: bool = False
    seed: int = 0
    min_priority: int = 0

    @property
    def top_priority(self) -> int:
        return self.vertex_count if self.max_priority is None else self.max_priority

    def check(self) -> None:
        n, lo, hi = self.vertex_count, self.min_outdeg, self.max_outdeg
        if n < 1:
            raise ValueError("a game needs at least one vertex")
        if not 1 <= lo <= hi:
            raise ValueError(f"need 1 <= min_outdeg <= max_outdeg, got {lo}, {hi}")
        limit = n if self.self_loops_allowed else n - 1
        if hi > limit:
            raise ValueError(f"max_outdeg {hi} exceeds the {limit} available successors")
        if not 0 <= self.min_priority <= self.top_priority:
            raise ValueError("priority range is empty")


def generate(spec: GenSpec) -> ParityGame:
    spec.check()
    rng = random.Random(spec.seed)
    n = spec.vertex_count
    lo_p, hi_p = spec.min_priority, spec.top_priority
    priority = [rng.randint(lo_p, hi_p) for _ in range(n)]
    owner = [rng.getrandbits(1) for _ in range(n)]
    successors = []
    for v in range(n):
        k = rng.randint(spec.min_outdeg, spec.max_outdeg)
        if spec.self_loops_allowed:
            succ = rng.sample(range(n), k)
        else:
            succ = [w + (w >= v) for w in rng.sample(range(n - 1), k)]
        successors.append(succ)
    return ParityGame.build(priority, owner, successors)
