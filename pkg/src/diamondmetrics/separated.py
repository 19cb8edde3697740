"""Maximum delta-separated subsets of a finite metric space.

A set is delta-separated when all its pairwise distances are at least
delta. Exact search is a branch-and-bound maximum-clique search on the
compatibility graph (pairs at distance >= delta); a greedy colouring of the
candidates is a clique cover of the complementary conflict graph and gives
the upper bound at every node.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metric import ABS_TOL, REL_TOL, MetricSpace

DEFAULT_NODE_BUDGET = 10_000_000


@dataclass(frozen=True)
class SeparatedSet:
    delta: float
    members: tuple[int, ...]
    certified_max: bool

    @property
    def size(self) -> int:
        return len(self.members)

    def to_json(self) -> dict:
        return {
            "delta": float(self.delta),
            "size": self.size,
            "members": list(self.members),
            "certified_max": self.certified_max,
        }


class BudgetExceeded(RuntimeError):
    """Raised when an exact search runs out of nodes; carries the incumbent."""

    def __init__(self, message: str, incumbent=None) -> None:
        super().__init__(message)
        self.incumbent = incumbent


def compatibility(m: MetricSpace, delta, rel_tol: float = REL_TOL) -> np.ndarray:
    """Boolean matrix of distinct pairs at distance >= delta."""
    d = m.dist
    if d.dtype == object:
        ok = d >= delta
        ok = ok.astype(bool)
    else:
        ok = d >= float(delta) - max(rel_tol * float(delta), ABS_TOL)
    ok = np.array(ok, dtype=bool)
    np.fill_diagonal(ok, False)
    return ok


def is_separated(m: MetricSpace, members, delta) -> bool:
    ok = compatibility(m, delta)
    members = list(members)
    return all(ok[a, b] for i, a in enumerate(members) for b in members[i + 1:])


def greedy_separated(ok: np.ndarray) -> list[int]:
    """Maximal separated set: repeatedly take the candidate with the fewest
    conflicts among the remaining candidates (ties by index)."""
    n = ok.shape[0]
    conflict = ~ok
    np.fill_diagonal(conflict, False)
    alive = np.ones(n, dtype=bool)
    chosen = []
    while alive.any():
        deg = (conflict[:, alive].sum(axis=1))
        deg = np.where(alive, deg, n + 1)
        v = int(np.argmin(deg))
        chosen.append(v)
        alive &= ok[v]
        alive[v] = False
    return sorted(chosen)


class _CliqueSearch:
    def __init__(self, ok: np.ndarray, budget: int) -> None:
        n = ok.shape[0]
        # Order: decreasing compatibility degree; bit i is vertex order[i].
        deg = ok.sum(axis=1)
        self.order = sorted(range(n), key=lambda v: (-int(deg[v]), v))
        pos = {v: i for i, v in enumerate(self.order)}
        self.adj = [0] * n
        for v in range(n):
            bits = 0
            for u in np.flatnonzero(ok[v]):
                bits |= 1 << pos[int(u)]
            self.adj[pos[v]] = bits
        self.budget = budget
        self.nodes = 0
        self.best: list[int] = []

    def _colour(self, cand: int) -> tuple[list[int], list[int]]:
        verts, bounds = [], []
        uncoloured = cand
        k = 0
        while uncoloured:
            k += 1
            q = uncoloured
            while q:
                low = q & -q
                v = low.bit_length() - 1
                q &= ~self.adj[v] & ~low
                uncoloured &= ~low
                verts.append(v)
                bounds.append(k)
        return verts, bounds

    def expand(self, current: list[int], cand: int) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceeded("separated-set search exceeded its node budget")
        verts, bounds = self._colour(cand)
        for i in range(len(verts) - 1, -1, -1):
            if len(current) + bounds[i] <= len(self.best):
                return
            v = verts[i]
            current.append(v)
            nxt = cand & self.adj[v]
            if nxt:
                self.expand(current, nxt)
            elif len(current) > len(self.best):
                self.best = list(current)
            current.pop()
            cand &= ~(1 << v)

    def upper_bound(self) -> int:
        _, bounds = self._colour((1 << len(self.adj)) - 1)
        return max(bounds, default=0)


def separated_upper_bound(m: MetricSpace, delta) -> int:
    """Clique-cover bound on the size of any delta-separated set."""
    return _CliqueSearch(compatibility(m, delta), 0).upper_bound()


def max_separated_set(
    m: MetricSpace,
    delta,
    mode: str = "exact",
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> SeparatedSet:
    """Largest delta-separated set (``mode="exact"``) or a maximal one
    (``mode="greedy"``, a lower bound on the maximum)."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    n = m.n_points
    ok = compatibility(m, delta)
    greedy = greedy_separated(ok) if n else []
    if mode == "greedy":
        return SeparatedSet(delta, tuple(greedy), certified_max=(len(greedy) == n))
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    if n == 0:
        return SeparatedSet(delta, (), True)
    if ok.sum() == n * (n - 1):
        return SeparatedSet(delta, tuple(range(n)), True)
    search = _CliqueSearch(ok, node_budget)
    pos = {v: i for i, v in enumerate(search.order)}
    search.best = [pos[v] for v in greedy]
    try:
        search.expand([], (1 << n) - 1)
    except BudgetExceeded as exc:
        members = tuple(sorted(search.order[i] for i in search.best))
        raise BudgetExceeded(str(exc), SeparatedSet(delta, members, False)) from None
    members = tuple(sorted(search.order[i] for i in search.best))
    return SeparatedSet(delta, members, True)
