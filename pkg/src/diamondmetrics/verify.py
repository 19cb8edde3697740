"""Verification suites behind ``diamondmetrics verify``.

Each suite returns a :class:`VerificationReport`; an empty violation list
means the checked statement held on every instance.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Optional, Union

import networkx as nx
import numpy as np

from .diamond_analysis import (VerificationReport, entropy_check, separates,
                               verify_generation_components, verify_generation_neighborhood)
from .embeddings import (distortion, embed_weighted_diamond, m_of_eps, paper_bound_w,
                         weighted_diamond_coordinates)
from .graphs import WeightedGraph, build_cycle, build_diamond, build_weighted_diamond, is_series_parallel
from .metric import REL_TOL, dijkstra, canonical_path, geodesic_bigon, isclose, shortest_path_metric
from .mindist import DEFAULT_BUDGET, min_distortion


def as_exact_eps(eps: Union[str, float, Fraction]) -> Fraction:
    """Parse eps as the rational its decimal text denotes (``0.25 -> 1/4``)."""
    if isinstance(eps, Fraction):
        return eps
    return Fraction(str(eps))


def _stamp(report: VerificationReport, start: float) -> VerificationReport:
    report.runtime_ms = (time.perf_counter() - start) * 1000.0
    return report


def suite_entropy(level: int = 4, node_budget: int = 10_000_000) -> VerificationReport:
    report = entropy_check(level, None, node_budget=node_budget)
    return report


def suite_generations(level: int = 4) -> VerificationReport:
    start = time.perf_counter()
    report = VerificationReport("generations", {"max_level": level})
    for n in range(1, level + 1):
        g, s = build_diamond(n)
        for r in range(1, n + 1):
            for sub in (verify_generation_neighborhood(s, g, r), verify_generation_components(s, g, r)):
                for v in sub.violations:
                    report.violations.append({"part": sub.check, "level": n, "r": r, **v})
    return _stamp(report, start)


def suite_exits(level: int = 4) -> VerificationReport:
    start = time.perf_counter()
    report = VerificationReport("exits", {"max_level": level})
    checked = 0
    for n in range(1, level + 1):
        g, s = build_diamond(n)
        for sub in s.subdiamonds[1:]:
            if not separates(g, sub.members, (sub.top, sub.bottom)):
                report.violations.append({"level": n, "lineage": sub.lineage})
            checked += 1
    report.parameters["subdiamonds_checked"] = checked
    return _stamp(report, start)


def _edge_classes(g: WeightedGraph, edge_level) -> dict:
    return {frozenset((u, v)): lvl for (u, v, _), lvl in zip(g.edges, edge_level)}


def _class_counts_all_paths(g, dist, classes, source, n_classes):
    """Per target, the largest number of edges of each class on any
    shortest path from ``source`` (dynamic programming over the
    shortest-path DAG)."""
    order = sorted(range(g.n_vertices), key=lambda v: dist[v])
    best = np.zeros((g.n_vertices, n_classes), dtype=int)
    for v in order:
        if v == source:
            continue
        row = np.full(n_classes, -1)
        for u, w in g.adjacency[v]:
            if dist[u] + w == dist[v]:
                inc = best[u].copy()
                inc[classes[frozenset((u, v))]] += 1
                row = np.maximum(row, inc)
        best[v] = row
    return best


def suite_claim42(level: int = 4, eps: Union[str, float, Fraction] = "0.25",
                  all_paths: bool = False) -> VerificationReport:
    """Shortest paths in ``W_n`` use each edge weight at most twice, and the
    unit edge at most once."""
    start = time.perf_counter()
    e = as_exact_eps(eps)
    report = VerificationReport("claim42", {"max_level": level, "eps": str(e), "all_paths": all_paths})
    for n in range(1, level + 1):
        g, s = build_weighted_diamond(n, e)
        classes = _edge_classes(g, s.edge_level)
        worst = [0] * (n + 1)
        for src in range(g.n_vertices):
            dist, pred = dijkstra(g, src)
            if all_paths:
                counts = _class_counts_all_paths(g, dist, classes, src, n + 1)
                rows = [(t, counts[t]) for t in range(src + 1, g.n_vertices)]
            else:
                rows = []
                for t in range(src + 1, g.n_vertices):
                    path = canonical_path(pred, src, t)
                    c = [0] * (n + 1)
                    for a, b in zip(path, path[1:]):
                        c[classes[frozenset((a, b))]] += 1
                    rows.append((t, c))
            for t, c in rows:
                for k, cnt in enumerate(c):
                    worst[k] = max(worst[k], int(cnt))
                    if cnt > (1 if k == 0 else 2):
                        report.violations.append({"level": n, "pair": [src, t], "weight_class": k,
                                                  "count": int(cnt)})
        report.tight_cases.append({"level": n, "max_count_per_class": worst})
    return _stamp(report, start)


def suite_edgeiso(level: int = 5, eps: Union[str, float, Fraction] = "0.25",
                  rational: bool = True, rel_tol: float = REL_TOL) -> VerificationReport:
    """Every edge of ``W_n`` keeps its weight under ``F_n``."""
    start = time.perf_counter()
    e = as_exact_eps(eps)
    report = VerificationReport("edgeiso", {"max_level": level, "eps": str(e), "rational": rational})
    for n in range(0, level + 1):
        g, s = build_weighted_diamond(n, e)
        coords = weighted_diamond_coordinates(s)
        emb = embed_weighted_diamond(n, float(e), structure=s)
        scale = coords.scale_sq(e)
        for u, v, w in g.edges:
            if rational:
                sq = coords.squared_distance(u, v, scale)
                if sq != w * w:
                    report.violations.append({"level": n, "edge": [u, v], "mode": "rational",
                                              "squared_image": str(sq), "squared_weight": str(w * w)})
            got = float(np.linalg.norm(emb.coords[u] - emb.coords[v]))
            if not isclose(got, float(w), rel_tol):
                report.violations.append({"level": n, "edge": [u, v], "mode": "float",
                                          "image": got, "weight": float(w)})
    return _stamp(report, start)


def suite_bound(eps: Union[str, float] = 0.25, max_level: int = 5,
                rel_tol: float = REL_TOL) -> VerificationReport:
    """``lip(F_n) <= 1`` and ``distortion(F_n)`` below the closed-form bound."""
    start = time.perf_counter()
    eps = float(eps)
    bound = paper_bound_w(eps)
    report = VerificationReport("bound", {"eps": eps, "max_level": max_level, "m": m_of_eps(eps),
                                          "bound": bound})
    for n in range(1, max_level + 1):
        g, s = build_weighted_diamond(n, eps)
        rep = distortion(embed_weighted_diamond(n, eps, structure=s), shortest_path_metric(g), rel_tol)
        row = {"level": n, "points": g.n_vertices, **rep.to_json()}
        report.tight_cases.append(row)
        if rep.lip > 1 + rel_tol or rep.distortion > bound:
            report.violations.append(row)
    report.notes.append("observed distortions are reported, the bound is not claimed tight")
    return _stamp(report, start)


def _rr_one(args):
    cycle_metric, edges, n, budget = args
    tree = WeightedGraph(n, tuple((u, v, 1) for u, v in edges))
    res = min_distortion(cycle_metric, shortest_path_metric(tree), budget=budget)
    return res.value, res.certified, res.map


def suite_rr(cycle: int = 7, max_tree: int = 10, min_tree: Optional[int] = None,
             budget: int = DEFAULT_BUDGET, threads: int = 1) -> VerificationReport:
    """Minimum distortion of ``C_cycle`` into every unlabeled tree is at
    least ``cycle/3 - 1``."""
    start = time.perf_counter()
    min_tree = cycle if min_tree is None else min_tree
    bound = cycle / 3 - 1
    report = VerificationReport("rr", {"cycle": cycle, "min_tree": min_tree, "max_tree": max_tree,
                                       "bound": bound})
    cm = shortest_path_metric(build_cycle(cycle))
    jobs = []
    for n in range(min_tree, max_tree + 1):
        for t in nx.nonisomorphic_trees(n):
            jobs.append((cm, sorted(tuple(sorted(e)) for e in t.edges()), n, budget))
    if threads > 1:
        with ProcessPoolExecutor(threads) as pool:
            results = list(pool.map(_rr_one, jobs))
    else:
        results = [_rr_one(j) for j in jobs]
    lowest = math.inf
    for (cm_, edges, n, _), (value, certified, f) in zip(jobs, results):
        lowest = min(lowest, value)
        if not certified:
            report.certified = False
        if value < bound:
            report.violations.append({"tree_order": n, "edges": edges, "value": value, "map": list(f)})
    report.parameters["trees"] = len(jobs)
    report.tight_cases.append({"min_over_trees": lowest})
    return _stamp(report, start)


def suite_bigon(max_level: int = 4) -> VerificationReport:
    start = time.perf_counter()
    report = VerificationReport("bigon", {"max_level": max_level})
    for n in range(1, max_level + 1):
        g, s = build_diamond(n)
        b = geodesic_bigon(s, g)
        if not b.isometric or b.length != 2 ** (n + 1):
            report.violations.append({"level": n, "length": b.length, "isometric": b.isometric})
        report.notes.append(f"D_{n}: {b.note}")
    return _stamp(report, start)


def suite_sp(g: WeightedGraph) -> VerificationReport:
    """Series-parallel recognition of a given graph (connected and K4-minor-free)."""
    start = time.perf_counter()
    report = VerificationReport("sp", {"n": g.n_vertices, "edges": g.n_edges})
    if not g.is_connected():
        report.violations.append({"reason": "disconnected"})
    elif not is_series_parallel(g):
        report.violations.append({"reason": "not series-parallel"})
    return _stamp(report, start)


# suites runnable without an input graph; "sp" needs --in and is not part of "all"
SUITES = ("entropy", "generations", "exits", "claim42", "rr", "edgeiso", "bound", "bigon")
