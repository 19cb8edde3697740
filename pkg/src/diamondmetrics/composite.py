"""Spaces assembled from other spaces: path-glued chains and l1 products."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graphs import WeightedGraph
from .metric import ABS_TOL, REL_TOL, MetricSpace, diameter

DEFAULT_PRODUCT_CAP = 20_000


@dataclass(frozen=True, eq=False)
class GluedSpace:
    """Blocks ``S_1, ..., S_N`` chained by paths between base points.

    ``block_offsets[n][i]`` is the combined vertex of point ``i`` of block
    ``n``; ``path_vertices[n]`` lists the combined vertices of the path from
    ``O_n`` to ``O_{n+1}``, endpoints included.
    """

    blocks: tuple[tuple[MetricSpace, int], ...]
    path_lengths: tuple[int, ...]
    combined: WeightedGraph
    block_offsets: tuple[tuple[int, ...], ...]
    path_vertices: tuple[tuple[int, ...], ...]

    def base_vertex(self, n: int) -> int:
        space, base = self.blocks[n]
        return self.block_offsets[n][base]

    @property
    def shifts(self) -> tuple[int, ...]:
        """Cumulative path length before each block."""
        return tuple(itertools.accumulate((0,) + self.path_lengths))[: len(self.blocks)]


def glue(blocks: Sequence[tuple[MetricSpace, int]], path_lengths: Sequence[int]) -> GluedSpace:
    """Join consecutive blocks at their base points by unit-edge paths.

    Each block is realized as a complete graph weighted by its metric. Path
    ``n`` must be an integer at least as long as both adjacent diameters.
    """
    blocks = tuple((space, int(base)) for space, base in blocks)
    if not blocks:
        raise ValueError("need at least one block")
    if len(path_lengths) != len(blocks) - 1:
        raise ValueError(f"{len(blocks)} blocks need {len(blocks) - 1} path lengths")
    lengths = []
    for n, length in enumerate(path_lengths):
        if int(length) != length or length < 1:
            raise ValueError(f"path length {length} must be a positive integer")
        need = max(float(diameter(blocks[n][0])), float(diameter(blocks[n + 1][0])))
        if length < need - max(REL_TOL * need, ABS_TOL):
            raise ValueError(f"path {n} has length {length} < max adjacent diameter {need}")
        lengths.append(int(length))

    edges, labels, offsets = [], [], []
    for n, (space, base) in enumerate(blocks):
        if not 0 <= base < space.n_points:
            raise ValueError(f"base point {base} outside block {n}")
        start = len(labels)
        offsets.append(tuple(range(start, start + space.n_points)))
        labels += [f"B{n}:{space.label_of(i)}" for i in range(space.n_points)]
        for i in range(space.n_points):
            for j in range(i + 1, space.n_points):
                edges.append((start + i, start + j, space.dist[i, j]))

    paths = []
    for n, length in enumerate(lengths):
        a = offsets[n][blocks[n][1]]
        b = offsets[n + 1][blocks[n + 1][1]]
        verts = [a]
        for k in range(1, length):
            verts.append(len(labels))
            labels.append(f"P{n}:{k}")
        verts.append(b)
        edges += [(x, y, 1) for x, y in zip(verts, verts[1:])]
        paths.append(tuple(verts))

    combined = WeightedGraph(len(labels), tuple(edges), tuple(labels))
    return GluedSpace(blocks, tuple(lengths), combined, tuple(offsets), tuple(paths))


def l1_product(spaces: Sequence[MetricSpace], cap: int = DEFAULT_PRODUCT_CAP) -> MetricSpace:
    """Cartesian product with the sum of coordinate distances.

    Points are ordered lexicographically by coordinate index tuple.
    """
    if not spaces:
        raise ValueError("need at least one factor")
    sizes = [s.n_points for s in spaces]
    if any(k == 0 for k in sizes):
        raise ValueError("factors must be nonempty")
    total = int(np.prod(sizes))
    if total > cap:
        raise ValueError(f"product has {total} points; cap is {cap}")
    exact = any(s.is_exact for s in spaces)
    dist = np.zeros((total, total), dtype=object if exact else float)
    grids = np.indices(sizes).reshape(len(sizes), -1)
    for s, coord in zip(spaces, grids):
        d = s.dist if exact else s.dist.astype(float)
        dist = dist + d[np.ix_(coord, coord)]
    labels = ["(" + ",".join(s.label_of(int(c)) for s, c in zip(spaces, point)) + ")"
              for point in grids.T]
    return MetricSpace(dist, tuple(labels))
