"""Embeddings into finite-dimensional normed spaces and their distortion."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .composite import GluedSpace
from .graphs import (DiamondStructure, WeightedGraph, build_weighted_diamond,
                     parse_dinfinity_label, _check_eps)
from .metric import ABS_TOL, REL_TOL, MetricSpace

NORMS = {"l1": "cityblock", "l2": "euclidean", "linf": "chebyshev"}


@dataclass(frozen=True, eq=False)
class Embedding:
    host_norm: str
    coords: np.ndarray
    labels: Optional[tuple[str, ...]] = None
    source: Optional[MetricSpace] = None

    def __post_init__(self) -> None:
        if self.host_norm not in NORMS:
            raise ValueError(f"unknown host norm {self.host_norm!r}")
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 2:
            raise ValueError("coordinates must form an (n_points, dim) array")
        if not np.all(np.isfinite(c)):
            raise ValueError("coordinates must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def n_points(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def host_distances(self) -> np.ndarray:
        if self.n_points < 2:
            return np.zeros((self.n_points, self.n_points))
        return squareform(pdist(self.coords, metric=NORMS[self.host_norm]))

    def norm(self, vec: np.ndarray) -> float:
        if self.host_norm == "l1":
            return float(np.abs(vec).sum())
        if self.host_norm == "l2":
            return float(np.linalg.norm(vec))
        return float(np.abs(vec).max())


@dataclass(frozen=True)
class DistortionReport:
    lip: float
    lip_inv: float
    distortion: float
    witness_expand: Optional[tuple[int, int]]
    witness_contract: Optional[tuple[int, int]]

    def to_json(self) -> dict:
        def num(x):
            return x if math.isfinite(x) else "inf"
        return {
            "lip": num(self.lip),
            "lip_inv": num(self.lip_inv),
            "distortion": num(self.distortion),
            "witness_expand": list(self.witness_expand) if self.witness_expand else None,
            "witness_contract": list(self.witness_contract) if self.witness_contract else None,
        }


def _first_max(values: np.ndarray, pairs_i: np.ndarray, pairs_j: np.ndarray, rel_tol: float):
    top = values.max()
    if math.isinf(top):
        k = int(np.argmax(np.isinf(values)))
    else:
        k = int(np.argmax(values >= top - rel_tol * abs(top)))
    return float(top), (int(pairs_i[k]), int(pairs_j[k]))


def distortion_from_matrices(source: np.ndarray, host: np.ndarray,
                             rel_tol: float = REL_TOL) -> DistortionReport:
    """Lipschitz constants of a map given source and image distance matrices.

    Witnesses are the lexicographically smallest pairs within ``rel_tol``
    of the extremum.
    """
    n = source.shape[0]
    if host.shape != source.shape:
        raise ValueError("source and host matrices differ in shape")
    if n < 2:
        return DistortionReport(0.0, 0.0, 1.0, None, None)
    iu, ju = np.triu_indices(n, 1)
    ds = source[iu, ju].astype(float)
    dh = host[iu, ju].astype(float)
    expand = dh / ds
    with np.errstate(divide="ignore"):
        contract = np.where(dh > 0, ds / np.where(dh > 0, dh, 1.0), np.inf)
    lip, we = _first_max(expand, iu, ju, rel_tol)
    lip_inv, wc = _first_max(contract, iu, ju, rel_tol)
    # a collapsed pair makes the map non-injective; 0 * inf would give nan
    dist = math.inf if math.isinf(lip_inv) else lip * lip_inv
    return DistortionReport(lip, lip_inv, dist, we, wc)


def distortion(e: Embedding, m: MetricSpace, rel_tol: float = REL_TOL) -> DistortionReport:
    """Exact maxima of expansion and contraction over all unordered pairs."""
    if e.n_points != m.n_points:
        raise ValueError(f"embedding has {e.n_points} points, metric has {m.n_points}")
    return distortion_from_matrices(m.dist, e.host_distances(), rel_tol)


def embedding_metric(e: Embedding) -> np.ndarray:
    return e.host_distances()


# --- weighted diamonds --------------------------------------------------------


def omega(k: int, eps) -> float:
    """Offset of the step-``k`` vertices from their parent edge's midpoint."""
    return math.sqrt(eps + eps * eps) * (0.5 + eps) ** (k - 1)


@dataclass(frozen=True, eq=False)
class DiamondCoordinates:
    """Coordinates of the weighted-diamond embedding in factored form.

    Point ``v`` sits at ``sum_c multipliers[v][c] * scale(c) * e_c``, where
    multipliers are dyadic rationals independent of eps and the squared
    scale of a coordinate opened at step ``k`` is
    ``(eps + eps**2) * (1/2 + eps)**(2(k-1))`` (``1`` for ``e_0``).
    """

    structure: DiamondStructure
    multipliers: tuple[dict, ...]
    coord_step: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.coord_step)

    def scale_sq(self, eps) -> list:
        q = Fraction(1, 2) + eps if isinstance(eps, Fraction) else 0.5 + eps
        base = eps + eps * eps
        return [1 if k == 0 else base * q ** (2 * (k - 1)) for k in self.coord_step]

    def squared_distance(self, u: int, v: int, scale_sq: Sequence) -> Union[Fraction, float]:
        mu, mv = self.multipliers[u], self.multipliers[v]
        total = 0
        for c in set(mu) | set(mv):
            diff = mu.get(c, 0) - mv.get(c, 0)
            if diff:
                total += diff * diff * scale_sq[c]
        return total

    def to_array(self, eps: float) -> np.ndarray:
        scale = np.array([1.0 if k == 0 else omega(k, float(eps)) for k in self.coord_step])
        out = np.zeros((len(self.multipliers), self.dim))
        for v, mult in enumerate(self.multipliers):
            for c, q in mult.items():
                out[v, c] = float(q) * scale[c]
        return out


def weighted_diamond_coordinates(structure: DiamondStructure) -> DiamondCoordinates:
    """Build the factored coordinates for ``F_n``.

    ``F_0`` sends bottom to ``0`` and top to ``e_0``. The edge with lineage
    index ``i`` (subdivided at step ``k``) owns coordinate ``i + 1``; its
    a-side child lands at the parent midpoint plus ``omega_k e_{i+1}``, its
    b-side child at the midpoint minus it.
    """
    n_vertices = len(structure.vertex_birth)
    mult: list[Optional[dict]] = [None] * n_vertices
    mult[structure.bottom] = {}
    mult[structure.top] = {0: Fraction(1)}
    subdivided = [s for s in structure.subdiamonds if s.children]
    coord_step = [0] + [s.step + 1 for s in subdivided]
    coord_of = {s.index: i + 1 for i, s in enumerate(subdivided)}
    for v in sorted(range(n_vertices), key=lambda x: structure.vertex_birth[x]):
        origin = structure.vertex_origin[v]
        if origin is None:
            continue
        node, side = origin
        sub = structure.subdiamonds[node]
        mid = {}
        for src in (mult[sub.bottom], mult[sub.top]):
            for c, q in src.items():
                mid[c] = mid.get(c, 0) + q / 2
        c = coord_of[node]
        mid[c] = Fraction(1) if side == "a" else Fraction(-1)
        mult[v] = {c: q for c, q in mid.items() if q}
    return DiamondCoordinates(structure, tuple(mult), tuple(coord_step))


def embed_weighted_diamond(level: int, eps: float,
                           structure: Optional[DiamondStructure] = None) -> Embedding:
    """Euclidean embedding ``F_level`` of ``W_level``; lip is 1."""
    _check_eps(eps)
    labels = None
    if structure is None:
        graph, structure = build_weighted_diamond(level, eps)
        labels = graph.labels
    coords = weighted_diamond_coordinates(structure)
    return Embedding("l2", coords.to_array(float(eps)), labels)


def m_of_eps(eps) -> int:
    """Least ``m`` with ``q + q**2 + ... + q**m >= 1 + q**m``, ``q = 1/2 + eps``.

    Evaluated in exact rational arithmetic on the given value of ``eps``.
    """
    _check_eps(eps)
    q = Fraction(1, 2) + Fraction(eps)
    total, power, m = Fraction(0), Fraction(1), 0
    while True:
        m += 1
        power *= q
        total += power
        if total >= 1 + power:
            return m


def paper_bound_w(eps) -> float:
    """Closed-form upper bound on ``sup_n lip(F_n^{-1})`` for weighted diamonds."""
    m = m_of_eps(eps)
    eps = float(eps)
    return 2 ** (m + 1) / ((0.5 - eps) * math.sqrt(eps + eps * eps)) * (0.5 + eps)


def lip_inv_first_level(eps) -> float:
    eps = float(eps)
    return (1 + 2 * eps) / (2 * math.sqrt(eps + eps * eps))


# --- quasi-isometries -----------------------------------------------------------


@dataclass(frozen=True)
class QuasiIsometryFit:
    a1: float
    a2: float
    b: float


def fit_quasi_isometry(
    f: Sequence[int],
    source: MetricSpace,
    target: Union[MetricSpace, np.ndarray],
    a1: float,
    a2: float,
) -> QuasiIsometryFit:
    """Smallest ``b >= 0`` with ``a1 d_X - b <= d_Y(f) <= a2 d_X + b`` on all pairs.

    ``target`` may be a metric space or a raw distance matrix (e.g. host
    distances of an embedding, which may vanish).
    """
    if not (0 < a1 <= a2):
        raise ValueError("need 0 < a1 <= a2")
    if len(f) != source.n_points:
        raise ValueError("map must be total on the source")
    dt = target.dist if isinstance(target, MetricSpace) else np.asarray(target)
    idx = np.asarray(f)
    dx = source.dist.astype(float)
    dy = dt.astype(float)[np.ix_(idx, idx)]
    b = max(0.0, float((a1 * dx - dy).max()), float((dy - a2 * dx).max()))
    return QuasiIsometryFit(float(a1), float(a2), b)


# --- infinite dihedral group ------------------------------------------------------


def dinfinity_phi(ball: WeightedGraph) -> Embedding:
    """Line embedding sending ``x^k`` to ``k`` and ``g x^k`` to ``k + 1/2``."""
    if ball.labels is None:
        raise ValueError("dihedral ball must carry element labels")
    coords = []
    for lab in ball.labels:
        try:
            flip, k = parse_dinfinity_label(lab)
        except ValueError:
            raise ValueError(f"vertex label {lab!r} is not a group element") from None
        coords.append([k + (0.5 if flip else 0.0)])
    return Embedding("l2", np.array(coords), ball.labels)


# --- gluing ------------------------------------------------------------------------


def glue_embed(block_embeddings: Sequence[Embedding], glued: GluedSpace,
               rel_tol: float = REL_TOL) -> Embedding:
    """Assemble block embeddings into one embedding of the glued space.

    Blocks are translated so their base point is the origin and padded to a
    common dimension; block ``n`` is then shifted by its cumulative path
    length along a fresh last axis, where the path vertices sit at unit
    spacing. Every block embedding must be nonexpansive.
    """
    if len(block_embeddings) != len(glued.blocks):
        raise ValueError("need one embedding per block")
    norms = {e.host_norm for e in block_embeddings}
    if len(norms) != 1:
        raise ValueError("all blocks must share one host norm")
    host = norms.pop()
    dim = max(e.dim for e in block_embeddings) + 1
    out = np.zeros((glued.combined.n_vertices, dim))
    shifts = glued.shifts
    for n, (e, (space, base)) in enumerate(zip(block_embeddings, glued.blocks)):
        if e.n_points != space.n_points:
            raise ValueError(f"block {n}: embedding has {e.n_points} points, block has {space.n_points}")
        coords = e.coords - e.coords[base]
        if e.norm(coords[base]) > ABS_TOL:
            raise ValueError(f"block {n}: base point not at origin after translation")
        lip = distortion(Embedding(host, coords), space, rel_tol).lip
        if lip > 1 + rel_tol:
            raise ValueError(f"block {n}: embedding expands distances (lip = {lip})")
        for i, v in enumerate(glued.block_offsets[n]):
            out[v, : e.dim] = coords[i]
            out[v, -1] = shifts[n]
    for n, verts in enumerate(glued.path_vertices):
        for k, v in enumerate(verts[1:-1], start=1):
            out[v, -1] = shifts[n] + k
    return Embedding(host, out, glued.combined.labels)


def frechet_embedding(m: MetricSpace) -> Embedding:
    """Isometric embedding into l_inf: each point goes to its distance row."""
    d = m.dist.astype(float)
    return Embedding("linf", d.copy(), m.labels)


def line_embedding_of_path(n_edges: int) -> Embedding:
    return Embedding("l2", np.arange(n_edges + 1, dtype=float)[:, None])


def polygon_embedding(n: int) -> Embedding:
    """Regular n-gon with unit sides; nonexpansive on the n-cycle."""
    radius = 1 / (2 * math.sin(math.pi / n))
    ang = 2 * math.pi * np.arange(n) / n
    return Embedding("l2", radius * np.column_stack([np.cos(ang), np.sin(ang)]))
