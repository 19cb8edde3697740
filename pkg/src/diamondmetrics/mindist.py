"""Exact minimum distortion of injective maps between finite metric spaces.

The distortion of a map ``f`` is ``max d_T(fu,fv)/d_S(u,v)`` times
``max d_S(u,v)/d_T(fu,fv)`` over pairs ``u != v``. Both maxima can only
grow as a partial map is extended, so their product bounds every
completion and drives the pruning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .metric import MetricSpace

DEFAULT_BUDGET = 5_000_000


@dataclass(frozen=True)
class MinDistortionResult:
    value: float
    map: tuple[int, ...]
    certified: bool
    lexmin: bool
    nodes: int

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "map": list(self.map),
            "certified": self.certified,
            "lexicographically_minimal": self.lexmin,
            "nodes": self.nodes,
        }


def map_distortion(f: Sequence[int], source: np.ndarray, target: np.ndarray) -> float:
    """Distortion of a complete injective map (``inf`` if it collapses a pair)."""
    n = len(f)
    if n < 2:
        return 1.0
    iu, ju = np.triu_indices(n, 1)
    idx = np.asarray(f)
    ds = source[iu, ju]
    dt = target[idx[iu], idx[ju]]
    if np.any(dt <= 0):
        return math.inf
    return float((dt / ds).max()) * float((ds / dt).max())


class _OutOfBudget(Exception):
    pass


class _Search:
    def __init__(self, ds: np.ndarray, dt: np.ndarray, budget: int, lookahead: bool) -> None:
        self.ds = ds
        self.dt = dt
        self.n = ds.shape[0]
        self.N = dt.shape[0]
        self.budget = budget
        self.lookahead = lookahead
        self.nodes = 0

    def _extend(self, s: int, srcs: list[int], imgs: list[int], free: np.ndarray, E: float, C: float):
        """Expansion, contraction and product for placing ``s`` on each free target."""
        if not srcs:
            k = len(free)
            return np.zeros(k), np.zeros(k), np.zeros(k)
        d_s = self.ds[s, srcs][None, :]
        d_t = self.dt[np.ix_(free, imgs)]
        e2 = np.maximum((d_t / d_s).max(axis=1), E)
        c2 = np.maximum((d_s / d_t).max(axis=1), C)
        return e2, c2, e2 * c2

    def _feasible_ahead(self, order_rest: Sequence[int], srcs, imgs, used, E, C, limit, strict) -> bool:
        if not self.lookahead or not srcs:
            return True
        free = np.flatnonzero(~used)
        for s in order_rest:
            _, _, prod = self._extend(s, srcs, imgs, free, E, C)
            ok = prod < limit if strict else prod <= limit
            if not ok.any():
                return False
        return True

    def run(self, order: Sequence[int], limit: float, strict: bool, first_only: bool):
        """Depth-first search over ``order``.

        With ``strict`` the search keeps improving ``limit`` (pruning
        products ``>= limit``); otherwise it returns the first complete map
        with product ``<= limit``.
        """
        n = self.n
        used = np.zeros(self.N, dtype=bool)
        srcs: list[int] = []
        imgs: list[int] = []
        self.limit = limit
        self.found: Optional[tuple[float, list[int]]] = None

        def dfs(depth: int, E: float, C: float) -> bool:
            self.nodes += 1
            if self.nodes > self.budget:
                raise _OutOfBudget
            if depth == n:
                f = [0] * n
                for s, t in zip(srcs, imgs):
                    f[s] = t
                val = E * C if n >= 2 else 1.0
                self.found = (val, f)
                if strict:
                    self.limit = val
                return first_only
            s = order[depth]
            free = np.flatnonzero(~used)
            e2, c2, prod = self._extend(s, srcs, imgs, free, E, C)
            for t, e, c, pr in zip(free, e2, c2, prod):
                if strict and pr >= self.limit:
                    continue
                if not strict and pr > self.limit:
                    continue
                t = int(t)
                used[t] = True
                srcs.append(s)
                imgs.append(t)
                if self._feasible_ahead(order[depth + 1:], srcs, imgs, used, e, c, self.limit, strict):
                    if dfs(depth + 1, float(e), float(c)):
                        return True
                srcs.pop()
                imgs.pop()
                used[t] = False
            return False

        dfs(0, 0.0, 0.0)
        return self.found


def _greedy(order, ds, dt):
    n, N = ds.shape[0], dt.shape[0]
    used = np.zeros(N, dtype=bool)
    srcs, imgs = [], []
    E = C = 0.0
    for s in order:
        free = np.flatnonzero(~used)
        if srcs:
            d_s = ds[s, srcs][None, :]
            d_t = dt[np.ix_(free, imgs)]
            e2 = np.maximum((d_t / d_s).max(axis=1), E)
            c2 = np.maximum((d_s / d_t).max(axis=1), C)
            k = int(np.argmin(e2 * c2))
            E, C = float(e2[k]), float(c2[k])
        else:
            k = 0
        t = int(free[k])
        used[t] = True
        srcs.append(s)
        imgs.append(t)
    f = [0] * n
    for s, t in zip(srcs, imgs):
        f[s] = t
    return f


def search_order(ds: np.ndarray) -> list[int]:
    """Source vertices by decreasing eccentricity, ties by index."""
    ecc = ds.max(axis=1) if ds.shape[0] else ds
    return sorted(range(ds.shape[0]), key=lambda v: (-float(ecc[v]), v))


def min_distortion(
    source: MetricSpace,
    target: MetricSpace,
    budget: int = DEFAULT_BUDGET,
    lookahead: bool = True,
) -> MinDistortionResult:
    """Smallest distortion of an injective map ``source -> target``.

    Returns the optimal value and the lexicographically smallest optimal
    map (as a tuple of target indices). If the node budget runs out the best
    map found so far is returned with ``certified=False``.
    """
    ds = source.dist.astype(float)
    dt = target.dist.astype(float)
    n, N = ds.shape[0], dt.shape[0]
    if n > N:
        raise ValueError(f"source has {n} points but target only {N}; no injective map")
    if n <= 1:
        return MinDistortionResult(1.0, tuple(range(n)), True, True, 0)
    order = search_order(ds)
    f0 = _greedy(order, ds, dt)
    best_val = map_distortion(f0, ds, dt)
    best_map = f0
    search = _Search(ds, dt, budget, lookahead)
    try:
        found = search.run(order, best_val, strict=True, first_only=False)
    except _OutOfBudget:
        found = search.found
        if found is not None and found[0] < best_val:
            best_val, best_map = found
        return MinDistortionResult(map_distortion(best_map, ds, dt), tuple(best_map), False, False, search.nodes)
    if found is not None:
        best_val, best_map = found
    best_val = map_distortion(best_map, ds, dt)
    # Second pass: first map in lexicographic order reaching the optimum.
    lex = _Search(ds, dt, budget, lookahead)
    lexmin = False
    try:
        hit = lex.run(list(range(n)), best_val, strict=False, first_only=True)
        if hit is not None and map_distortion(hit[1], ds, dt) == best_val:
            best_map = hit[1]
            lexmin = True
    except _OutOfBudget:
        pass
    return MinDistortionResult(best_val, tuple(best_map), True, lexmin, search.nodes + lex.nodes)
