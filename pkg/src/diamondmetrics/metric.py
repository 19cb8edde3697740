"""Finite metric spaces induced by weighted graphs."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .graphs import DiamondStructure, WeightedGraph

REL_TOL = 1e-9
ABS_TOL = 1e-12
MAX_POINTS = 20_000


def isclose(a, b, rel_tol: float = REL_TOL, abs_tol: float = ABS_TOL) -> bool:
    """Tolerant equality for floats, exact equality for rationals."""
    if _is_exact_number(a) and _is_exact_number(b):
        return a == b
    a, b = float(a), float(b)
    return abs(a - b) <= max(rel_tol * max(abs(a), abs(b)), abs_tol)


def _is_exact_number(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


class DisconnectedGraphError(ValueError):
    def __init__(self, u: int, v: int) -> None:
        super().__init__(f"graph is disconnected: no path between vertices {u} and {v}")
        self.pair = (u, v)


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """Finite metric space stored as a dense distance matrix.

    A float matrix is the default; an ``object`` matrix of Fractions is the
    exact (rational) mode.
    """

    dist: np.ndarray
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        d = self.dist
        if not isinstance(d, np.ndarray):
            d = np.asarray(d)
        if d.dtype != object:
            d = d.astype(float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("distance matrix must be square")
        if d.shape[0] > MAX_POINTS:
            raise ValueError(f"metric space has {d.shape[0]} points; cap is {MAX_POINTS}")
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
            if len(self.labels) != d.shape[0]:
                raise ValueError("labels must have one entry per point")

    @property
    def n_points(self) -> int:
        return self.dist.shape[0]

    @property
    def is_exact(self) -> bool:
        return self.dist.dtype == object

    def d(self, i: int, j: int):
        return self.dist[i, j]

    def to_float(self) -> "MetricSpace":
        if not self.is_exact:
            return self
        return MetricSpace(self.dist.astype(float), self.labels)

    def restrict(self, points: Sequence[int]) -> "MetricSpace":
        idx = list(points)
        labels = None if self.labels is None else tuple(self.labels[i] for i in idx)
        return MetricSpace(self.dist[np.ix_(idx, idx)], labels)

    def label_of(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)


def csgraph(g: WeightedGraph) -> csr_matrix:
    rows, cols, vals = [], [], []
    for u, v, w in g.edges:
        rows += [u, v]
        cols += [v, u]
        vals += [float(w), float(w)]
    return csr_matrix((vals, (rows, cols)), shape=(g.n_vertices, g.n_vertices))


def dijkstra(g: WeightedGraph, source: int, removed: frozenset = frozenset()):
    """Single-source shortest paths with deterministic predecessors.

    Works with float or exact weights. The predecessor of ``v`` is the
    smallest-index neighbor ``u`` with ``dist[u] + w(u, v) == dist[v]``
    (tolerant comparison for floats). Unreachable vertices get ``None``.
    """
    exact = g.is_exact
    zero = Fraction(0) if exact else 0.0
    dist: list = [None] * g.n_vertices
    dist[source] = zero
    heap = [(zero, source)]
    done = [False] * g.n_vertices
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w in g.adjacency[u]:
            if v in removed:
                continue
            nd = d + w
            if dist[v] is None or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    pred: list[Optional[int]] = [None] * g.n_vertices
    for v in range(g.n_vertices):
        if v == source or dist[v] is None:
            continue
        for u, w in g.adjacency[v]:
            if dist[u] is not None and u not in removed and isclose(dist[u] + w, dist[v]):
                pred[v] = u
                break
    return dist, pred


def canonical_path(pred: Sequence[Optional[int]], source: int, target: int) -> list[int]:
    path = [target]
    while path[-1] != source:
        p = pred[path[-1]]
        if p is None:
            raise ValueError(f"vertex {target} unreachable from {source}")
        path.append(p)
    return path[::-1]


def shortest_path_metric(g: WeightedGraph, exact: Optional[bool] = None) -> MetricSpace:
    """All-pairs weighted shortest-path metric.

    Exact mode runs rational Dijkstra from every source and is the default
    whenever some weight is a Fraction; float mode uses scipy.
    """
    if exact is None:
        exact = any(isinstance(w, Fraction) for _, _, w in g.edges)
    n = g.n_vertices
    if n > MAX_POINTS:
        raise ValueError(f"graph has {n} vertices; cap is {MAX_POINTS}")
    if exact:
        if not g.is_exact:
            raise ValueError("exact mode needs integer or Fraction weights")
        rows = []
        for s in range(n):
            dist, _ = dijkstra(g, s)
            for t, d in enumerate(dist):
                if d is None:
                    raise DisconnectedGraphError(s, t)
            rows.append([Fraction(d) for d in dist])
        mat = np.empty((n, n), dtype=object)
        for i, row in enumerate(rows):
            mat[i, :] = row
        return MetricSpace(mat, g.labels)
    if n == 0:
        return MetricSpace(np.zeros((0, 0)), g.labels)
    mat = shortest_path(csgraph(g), method="D", directed=False)
    bad = np.argwhere(np.isinf(mat))
    if len(bad):
        u, v = bad[0]
        raise DisconnectedGraphError(int(u), int(v))
    return MetricSpace(mat, g.labels)


def graph_diameter(g: WeightedGraph, chunk: int = 512) -> float:
    """Diameter without materializing the full distance matrix."""
    cs = csgraph(g)
    best = 0.0
    for start in range(0, g.n_vertices, chunk):
        idx = np.arange(start, min(start + chunk, g.n_vertices))
        part = shortest_path(cs, method="D", directed=False, indices=idx)
        if np.isinf(part).any():
            u, v = np.argwhere(np.isinf(part))[0]
            raise DisconnectedGraphError(int(idx[u]), int(v))
        best = max(best, float(part.max()))
    return best


def diameter(m: MetricSpace):
    if m.n_points == 0:
        raise ValueError("empty metric space")
    return m.dist.max()


def is_metric(m, rel_tol: float = REL_TOL, abs_tol: float = ABS_TOL) -> bool:
    """Check zero diagonal, symmetry, positivity and every triangle inequality.

    Accepts a :class:`MetricSpace` or a raw square matrix.
    """
    d = m.dist if isinstance(m, MetricSpace) else np.asarray(m)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        return False
    n = d.shape[0]
    exact = d.dtype == object
    if exact:
        if any(d[i, i] != 0 for i in range(n)):
            return False
        for i in range(n):
            for j in range(i + 1, n):
                if d[i, j] != d[j, i] or not d[i, j] > 0:
                    return False
        for k in range(n):
            via = d[:, k][:, None] + d[k, :][None, :]
            if (d > via).any():
                return False
        return True
    d = d.astype(float)
    if not np.all(np.isfinite(d)):
        return False
    if np.any(np.abs(np.diag(d)) > abs_tol):
        return False
    if not np.allclose(d, d.T, rtol=rel_tol, atol=abs_tol):
        return False
    off = ~np.eye(n, dtype=bool)
    if np.any(d[off] <= 0):
        return False
    for k in range(n):
        via = d[:, k][:, None] + d[k, :][None, :]
        slack = np.maximum(rel_tol * via, abs_tol)
        if np.any(d > via + slack):
            return False
    return True


def is_isometric_subspace(
    sub: Sequence[int],
    ambient: MetricSpace,
    reference: MetricSpace,
    rel_tol: float = REL_TOL,
    abs_tol: float = ABS_TOL,
) -> bool:
    """True iff ``ambient`` restricted to ``sub`` (in the given order) equals
    ``reference`` point for point."""
    sub = list(sub)
    if len(sub) != reference.n_points:
        raise ValueError(f"subset has {len(sub)} points but reference has {reference.n_points}")
    part = ambient.dist[np.ix_(sub, sub)]
    ref = reference.dist
    if part.dtype == object and ref.dtype == object:
        return bool((part == ref).all())
    a, b = part.astype(float), ref.astype(float)
    return bool(np.all(np.abs(a - b) <= np.maximum(rel_tol * np.maximum(np.abs(a), np.abs(b)), abs_tol)))


@dataclass(frozen=True)
class Bigon:
    """Cycle made of two internally disjoint bottom-top geodesics."""

    cycle: tuple[int, ...]
    length: int
    isometric: bool
    note: str


def _descend_path(structure: DiamondStructure, node: int, side: int) -> list[int]:
    sub = structure.subdiamonds[node]
    if not sub.children:
        return [sub.bottom, sub.top]
    first, second = sub.children[2 * side], sub.children[2 * side + 1]
    return _descend_path(structure, first, 0) + _descend_path(structure, second, 0)[1:]


def geodesic_bigon(structure: DiamondStructure, g: WeightedGraph,
                   metric: Optional[MetricSpace] = None) -> Bigon:
    """Bigon of ``D_n``: up through the a-side, back down through the b-side.

    Below the first split both geodesics follow a-sides. The returned cycle
    lists each vertex once, starting at the bottom; ``length`` is its number
    of edges, ``2**(n+1)``.
    """
    if structure.level < 1:
        raise ValueError("a bigon needs level >= 1")
    if structure.weighted:
        raise ValueError("bigons are defined on unweighted diamonds")
    up = _descend_path(structure, 0, 0)
    down = _descend_path(structure, 0, 1)[::-1]
    cycle = up + down[1:-1]
    length = len(cycle)
    m = metric if metric is not None else shortest_path_metric(g)
    ok = True
    for i in range(length):
        for j in range(i + 1, length):
            along = min(j - i, length - (j - i))
            if m.dist[cycle[i], cycle[j]] != along:
                ok = False
                break
        if not ok:
            break
    note = (f"isometric cycle of length 2^(n+1) = {length}; a cycle of length 4^n = "
            f"{4 ** structure.level} would have diameter {4 ** structure.level // 2}, "
            f"exceeding diam D_n = {2 ** structure.level} when n >= 2")
    return Bigon(tuple(cycle), length, ok, note)
