"""Weighted graph families: binary trees, diamonds, weighted diamonds,
cycles, paths, random series-parallel graphs and a ball in the infinite
dihedral group."""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Real
from typing import Iterable, Optional, Sequence, Union

from .rng import SplitMix64

Weight = Union[int, float, Fraction]


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Simple undirected graph with positive edge weights.

    ``edges`` holds ``(u, v, w)`` triples with ``u != v``. Weights may be
    floats or :class:`fractions.Fraction` (exact mode).
    """

    n_vertices: int
    edges: tuple[tuple[int, int, Weight], ...]
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple((int(u), int(v), w) for u, v, w in self.edges))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
            if len(self.labels) != self.n_vertices:
                raise ValueError("labels must have one entry per vertex")
        seen = set()
        for u, v, w in self.edges:
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValueError(f"edge ({u}, {v}) has a vertex out of range")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not w > 0:
                raise ValueError(f"edge ({u}, {v}) has non-positive weight {w}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"parallel edge {key}")
            seen.add(key)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, Weight], ...], ...]:
        """Per-vertex ``(neighbor, weight)`` lists sorted by neighbor index."""
        adj: list[list[tuple[int, Weight]]] = [[] for _ in range(self.n_vertices)]
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return tuple(tuple(sorted(a, key=lambda t: t[0])) for a in adj)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(w, (int, Fraction)) for _, _, w in self.edges)

    def index_of(self, label: str) -> int:
        if self.labels is None:
            raise KeyError("graph has no labels")
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(label) from None

    def label_of(self, v: int) -> str:
        return self.labels[v] if self.labels is not None else str(v)

    def components(self, removed: Iterable[int] = ()) -> list[list[int]]:
        """Connected components after deleting ``removed`` vertices."""
        gone = set(removed)
        seen = set(gone)
        comps = []
        for s in range(self.n_vertices):
            if s in seen:
                continue
            seen.add(s)
            comp = [s]
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for y, _ in self.adjacency[x]:
                    if y not in seen:
                        seen.add(y)
                        comp.append(y)
                        queue.append(y)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n_vertices <= 1 or len(self.components()) == 1

    def same_as(self, other: "WeightedGraph") -> bool:
        """Structural equality: same vertex count, labels and weighted edge set."""
        def norm(g):
            return sorted((min(u, v), max(u, v), w) for u, v, w in g.edges)
        return (self.n_vertices == other.n_vertices and self.labels == other.labels
                and norm(self) == norm(other))


@dataclass(frozen=True)
class Subdiamond:
    """Part of a diamond that evolved from one edge.

    ``step`` is the construction step at which the originating edge was
    created; in a diamond of level ``n`` the height is ``2**(n - step)``.
    ``members`` includes the bottom and the top.
    """

    index: int
    lineage: str
    step: int
    bottom: int
    top: int
    height: int
    members: frozenset
    diagonal: Optional[int]
    parent: Optional[int]
    children: tuple[int, ...]

    @property
    def interior(self) -> frozenset:
        return self.members - {self.bottom, self.top}


@dataclass(frozen=True, eq=False)
class DiamondStructure:
    """Lineage metadata shared by ``D_n`` and ``W_n``.

    Subdiamonds are listed breadth-first (index 0 is the whole diamond);
    the children of an edge ``u -> v`` subdivided by ``a`` and ``b`` are,
    in order, ``u->a``, ``a->v``, ``u->b``, ``b->v``.
    """

    level: int
    weighted: bool
    edge_level: tuple[int, ...]
    vertex_birth: tuple[int, ...]
    vertex_origin: tuple[Optional[tuple[int, str]], ...]
    subdiamonds: tuple[Subdiamond, ...]

    @property
    def bottom(self) -> int:
        return self.subdiamonds[0].bottom

    @property
    def top(self) -> int:
        return self.subdiamonds[0].top

    @cached_property
    def generation(self) -> tuple[Optional[int], ...]:
        n = self.level
        return tuple(None if s == 0 else n - s + 1 for s in self.vertex_birth)

    def subdiamonds_at_step(self, step: int) -> list[Subdiamond]:
        return [s for s in self.subdiamonds if s.step == step]


def build_binary_tree(depth: int) -> WeightedGraph:
    """Binary tree ``T_depth`` on all 0/1 words of length at most ``depth``.

    Vertices are numbered in heap order, so the children of ``i`` are
    ``2i+1`` (append ``0``) and ``2i+2`` (append ``1``). The root's label is
    the empty string.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    n = 2 ** (depth + 1) - 1
    labels = [""] * n
    edges = []
    for i in range(n):
        for bit, c in ((0, 2 * i + 1), (1, 2 * i + 2)):
            if c < n:
                labels[c] = labels[i] + str(bit)
                edges.append((i, c, 1))
    return WeightedGraph(n, tuple(edges), tuple(labels))


def _grow_diamond(level: int):
    """Run the quadrilateral substitution ``level`` times.

    Returns per-node records ``(lineage, step, bottom, top, parent)``,
    children lists, vertex births/origins and labels.
    """
    labels = ["bottom", "top"]
    birth = [0, 0]
    origin: list[Optional[tuple[int, str]]] = [None, None]
    nodes = [("", 0, 0, 1, None)]
    children: list[list[int]] = [[]]
    frontier = [0]
    for step in range(1, level + 1):
        nxt = []
        for idx in frontier:
            lineage, _, u, v, _ = nodes[idx]
            a, b = len(labels), len(labels) + 1
            labels += [lineage + "a", lineage + "b"]
            birth += [step, step]
            origin += [(idx, "a"), (idx, "b")]
            for digit, (x, y) in enumerate(((u, a), (a, v), (u, b), (b, v))):
                nodes.append((lineage + str(digit), step, x, y, idx))
                children.append([])
                children[idx].append(len(nodes) - 1)
                nxt.append(len(nodes) - 1)
        frontier = nxt
    return nodes, children, birth, origin, labels


def _diamond(level: int, weight_of_step, weighted: bool):
    if level < 0:
        raise ValueError("level must be nonnegative")
    nodes, children, birth, origin, labels = _grow_diamond(level)
    edges = []
    edge_level = []
    diagonal: dict[int, int] = {}
    for idx, (_, step, u, v, _) in enumerate(nodes):
        if weighted or step == level:
            diagonal[idx] = len(edges)
            edges.append((u, v, weight_of_step(step)))
            edge_level.append(step)

    members: list[frozenset] = [frozenset()] * len(nodes)
    for idx in range(len(nodes) - 1, -1, -1):
        _, _, u, v, _ = nodes[idx]
        acc = {u, v}
        for c in children[idx]:
            acc |= members[c]
        members[idx] = frozenset(acc)

    subs = tuple(
        Subdiamond(
            index=idx,
            lineage=lineage,
            step=step,
            bottom=u,
            top=v,
            height=2 ** (level - step),
            members=members[idx],
            diagonal=diagonal.get(idx),
            parent=parent,
            children=tuple(children[idx]),
        )
        for idx, (lineage, step, u, v, parent) in enumerate(nodes)
    )
    graph = WeightedGraph(len(labels), tuple(edges), tuple(labels))
    structure = DiamondStructure(
        level=level,
        weighted=weighted,
        edge_level=tuple(edge_level),
        vertex_birth=tuple(birth),
        vertex_origin=tuple(origin),
        subdiamonds=subs,
    )
    return graph, structure


def build_diamond(level: int) -> tuple[WeightedGraph, DiamondStructure]:
    """Unit-weight diamond ``D_level`` with its lineage structure."""
    return _diamond(level, lambda step: 1, weighted=False)


def _check_eps(eps) -> None:
    if not (0 < eps < Fraction(1, 2)):
        raise ValueError(f"eps must lie in the open interval (0, 1/2), got {eps}")


def build_weighted_diamond(level: int, eps: Union[float, Fraction]) -> tuple[WeightedGraph, DiamondStructure]:
    """Weighted diamond ``W_level``.

    Every edge ever created is kept; an edge created at step ``k`` weighs
    ``(1/2 + eps)**k``. Passing a :class:`Fraction` gives exact weights.
    """
    _check_eps(eps)
    if isinstance(eps, Fraction):
        q = Fraction(1, 2) + eps
    else:
        q = 0.5 + float(eps)
    return _diamond(level, lambda step: q ** step, weighted=True)


def build_cycle(n: int) -> WeightedGraph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return WeightedGraph(n, tuple((i, (i + 1) % n, 1) for i in range(n)))


def build_path(n: int) -> WeightedGraph:
    """Path with ``n`` unit edges (``n + 1`` vertices)."""
    if n < 1:
        raise ValueError("a path needs at least one edge")
    return WeightedGraph(n + 1, tuple((i, i + 1, 1) for i in range(n)))


class DisconnectedRemovalError(ValueError):
    pass


def generate_series_parallel(
    steps: int,
    removal: Union[None, float, Iterable[int]] = None,
    seed: int = 0,
    max_retries: int = 100,
) -> WeightedGraph:
    """Random series-parallel graph grown from a single edge.

    Step ``i`` adds vertex ``i + 2`` and joins it to both ends of an edge
    chosen uniformly (via :class:`SplitMix64`) from the current edge list;
    the two new edges are appended in the order ``(u, w), (v, w)``.

    ``removal`` is either a collection of edge indices to delete or a
    probability with which each edge is independently deleted. A removal
    that disconnects the graph is rejected (mask) or redrawn up to
    ``max_retries`` times (probability).
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    rng = SplitMix64(seed)
    edges = [(0, 1)]
    for i in range(steps):
        u, v = edges[rng.below(len(edges))]
        w = i + 2
        edges += [(u, w), (v, w)]
    n = steps + 2

    def build(keep):
        return WeightedGraph(n, tuple((u, v, 1) for (u, v), k in zip(edges, keep) if k))

    if removal is None:
        return build([True] * len(edges))
    if isinstance(removal, Real) and not isinstance(removal, bool):
        p = float(removal)
        if not 0 <= p <= 1:
            raise ValueError("removal probability must lie in [0, 1]")
        for _ in range(max_retries):
            keep = [rng.uniform() >= p for _ in edges]
            g = build(keep)
            if g.is_connected():
                return g
        raise DisconnectedRemovalError(f"no connected removal found in {max_retries} draws")
    mask = set(int(i) for i in removal)
    if any(not 0 <= i < len(edges) for i in mask):
        raise ValueError("removal mask refers to a nonexistent edge")
    g = build([i not in mask for i in range(len(edges))])
    if not g.is_connected():
        raise DisconnectedRemovalError("removing the given edges disconnects the graph")
    return g


def is_series_parallel(g: WeightedGraph) -> bool:
    """K4-minor-freeness of a connected graph by reduction.

    Parallel edges are merged as soon as they appear (adjacency sets),
    degree-1 vertices are deleted and degree-2 vertices are smoothed. The
    graph is series-parallel iff this leaves at most one edge.
    """
    adj = [set(v for v, _ in nb) for nb in g.adjacency]
    alive = set(range(g.n_vertices))
    queue = deque(v for v in alive if len(adj[v]) <= 2)
    while queue and len(alive) > 2:
        v = queue.popleft()
        if v not in alive or len(adj[v]) > 2:
            continue
        nbrs = list(adj[v])
        alive.discard(v)
        for x in nbrs:
            adj[x].discard(v)
        adj[v] = set()
        if len(nbrs) == 2:
            x, y = nbrs
            adj[x].add(y)
            adj[y].add(x)
        for x in nbrs:
            if len(adj[x]) <= 2:
                queue.append(x)
    return len(alive) <= 2


# --- infinite dihedral group ------------------------------------------------
#
# Elements are g^s x^k with s in {0, 1}; g x g = x^-1. Left multiplication:
#   x * x^k = x^(k+1),     x * g x^k = g x^(k-1),     g * x^k = g x^k.

_DINF_RE = re.compile(r"^(g?)(?:x(?:\^(-?\d+))?)?$")


def dinfinity_label(flip: bool, k: int) -> str:
    if k == 0:
        body = ""
    elif k == 1:
        body = "x"
    else:
        body = f"x^{k}"
    if flip:
        return "g" + body
    return body or "e"


def parse_dinfinity_label(label: str) -> tuple[bool, int]:
    """Inverse of :func:`dinfinity_label`: ``(flip, k)`` for ``g^flip x^k``."""
    if label == "e":
        return False, 0
    m = _DINF_RE.match(label)
    if not m or label == "":
        raise ValueError(f"not a dihedral group label: {label!r}")
    flip = m.group(1) == "g"
    if "x" not in label:
        k = 0
    else:
        k = int(m.group(2)) if m.group(2) is not None else 1
    return flip, k


def dinfinity_word_length(flip: bool, k: int) -> int:
    return abs(k) + (1 if flip else 0)


def dinfinity_ball(radius: int) -> tuple[WeightedGraph, tuple[str, ...]]:
    """Ball of the given radius around ``e`` in the Cayley graph of the
    infinite dihedral group with generators ``{x, x^-1, g}``.

    Vertices are listed by word length; the ball has ``4 * radius`` vertices.
    """
    if radius < 1:
        raise ValueError("radius must be at least 1")
    elems: list[tuple[bool, int]] = [(False, 0)]
    for length in range(1, radius + 1):
        elems += [(False, length), (False, -length)]
        j = length - 1
        elems += [(True, j)] if j == 0 else [(True, j), (True, -j)]
    index = {e: i for i, e in enumerate(elems)}
    edges = set()
    for i, (flip, k) in enumerate(elems):
        if flip:
            images = [(True, k - 1), (True, k + 1), (False, k)]
        else:
            images = [(False, k + 1), (False, k - 1), (True, k)]
        for img in images:
            j = index.get(img)
            if j is not None:
                edges.add((min(i, j), max(i, j)))
    labels = tuple(dinfinity_label(f, k) for f, k in elems)
    g = WeightedGraph(len(elems), tuple((u, v, 1) for u, v in sorted(edges)), labels)
    return g, labels


def dinfinity_interior(g: WeightedGraph) -> list[int]:
    """Vertices of a dihedral ball at word length below its radius."""
    lengths = [dinfinity_word_length(*parse_dinfinity_label(lab)) for lab in g.labels]
    radius = max(lengths)
    return [v for v, l in enumerate(lengths) if l <= radius - 1]


def relabel(g: WeightedGraph, labels: Sequence[str]) -> WeightedGraph:
    return WeightedGraph(g.n_vertices, g.edges, tuple(labels))
