"""Combinatorics of diamonds: subdiamonds, exits, generations, the
separated-set entropy bound and two-sided bilipschitz certificates."""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .graphs import DiamondStructure, Subdiamond, WeightedGraph, build_diamond
from .metric import MetricSpace, shortest_path_metric
from .separated import BudgetExceeded, DEFAULT_NODE_BUDGET, max_separated_set, separated_upper_bound


@dataclass
class VerificationReport:
    check: str
    parameters: dict
    violations: list = field(default_factory=list)
    tight_cases: list = field(default_factory=list)
    runtime_ms: float = 0.0
    certified: bool = True
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        out = {
            "check": self.check,
            "parameters": self.parameters,
            "violations": self.violations,
            "tight_cases": self.tight_cases,
            "certified": self.certified,
            "runtime_ms": self.runtime_ms,
        }
        if self.notes:
            out["notes"] = self.notes
        return out


class _Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = (time.perf_counter() - self.start) * 1000.0


def subdiamonds_of_height(structure: DiamondStructure, h: int) -> list[Subdiamond]:
    """All subdiamonds of height exactly ``2**h``, in lineage order."""
    if not 0 <= h <= structure.level:
        raise ValueError(f"height exponent {h} outside [0, {structure.level}]")
    return structure.subdiamonds_at_step(structure.level - h)


def exits(sub: Subdiamond, structure: DiamondStructure, g: WeightedGraph) -> tuple[int, int]:
    """The two vertices separating ``sub`` from the rest of the diamond.

    Returns ``(top, bottom)`` after checking that deleting them leaves no
    path from an interior member to a non-member.
    """
    if sub.index == 0:
        raise ValueError("the whole diamond has no exterior, hence no exits")
    if not separates(g, sub.members, (sub.top, sub.bottom)):
        raise AssertionError(f"subdiamond {sub.lineage!r}: exits do not separate it")
    return sub.top, sub.bottom


def separates(g: WeightedGraph, members: frozenset, cut: Iterable[int]) -> bool:
    """Whether deleting ``cut`` disconnects ``members - cut`` from the rest."""
    cut = set(cut)
    start = [v for v in members if v not in cut]
    seen = set(start) | cut
    queue = deque(start)
    while queue:
        x = queue.popleft()
        for y, _ in g.adjacency[x]:
            if y in seen:
                continue
            if y not in members:
                return False
            seen.add(y)
            queue.append(y)
    return True


def generations(structure: DiamondStructure) -> dict[int, list[int]]:
    """Map generation ``r`` to its vertices ``Z_r``; the two original
    vertices belong to no generation."""
    out: dict[int, list[int]] = {r: [] for r in range(1, structure.level + 1)}
    for v, r in enumerate(structure.generation):
        if r is not None:
            out[r].append(v)
    return out


def _ball(g: WeightedGraph, v: int, radius: int) -> set[int]:
    seen = {v: 0}
    queue = deque([v])
    while queue:
        x = queue.popleft()
        if seen[x] == radius:
            continue
        for y, _ in g.adjacency[x]:
            if y not in seen:
                seen[y] = seen[x] + 1
                queue.append(y)
    return set(seen)


def verify_generation_neighborhood(structure: DiamondStructure, g: WeightedGraph, r: int) -> VerificationReport:
    """Every ``v`` in ``Z_r`` has its ``2**(r-1)``-ball inside some subdiamond
    of height ``2**r``."""
    n = structure.level
    if not 1 <= r <= n:
        raise ValueError(f"generation {r} outside [1, {n}]")
    report = VerificationReport("generation_neighborhood", {"level": n, "r": r})
    with _Timer() as t:
        candidates = subdiamonds_of_height(structure, r)
        for v in generations(structure)[r]:
            ball = _ball(g, v, 2 ** (r - 1))
            host = next((s for s in candidates if ball <= s.members), None)
            if host is None:
                report.violations.append({"vertex": v, "label": g.label_of(v), "ball_size": len(ball)})
    report.runtime_ms = t.ms
    return report


def _component_diameter(g: WeightedGraph, comp: list[int], removed: set) -> int:
    best = 0
    for s in comp:
        dist = {s: 0}
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y, _ in g.adjacency[x]:
                if y not in dist and y not in removed:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        best = max(best, max(dist.values()))
    return best


def verify_generation_components(structure: DiamondStructure, g: WeightedGraph, r: int) -> VerificationReport:
    """Components of the diamond minus ``Z_r`` have diameter below ``2**r``,
    measured in the deleted graph."""
    n = structure.level
    if not 1 <= r <= n:
        raise ValueError(f"generation {r} outside [1, {n}]")
    report = VerificationReport("generation_components", {"level": n, "r": r})
    with _Timer() as t:
        removed = set(generations(structure)[r])
        comps = g.components(removed)
        for comp in comps:
            diam = _component_diameter(g, comp, removed)
            if diam >= 2 ** r:
                report.violations.append({"component_size": len(comp), "diameter": diam})
        report.parameters["components"] = len(comps)
    report.runtime_ms = t.ms
    return report


def entropy_check(
    level: int,
    p: Optional[int] = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
    exact_up_to: int = 4,
    metric: Optional[MetricSpace] = None,
) -> VerificationReport:
    """Check that every subdiamond of height ``2**h`` in ``D_level`` has no
    ``2**p``-separated set larger than ``2 * 4**(h - p)``.

    ``p=None`` checks every ``p <= h``. Up to level ``exact_up_to`` every
    maximum is computed exactly; above it a greedy lower bound and a
    clique-cover upper bound are tried first and exact search runs only when
    the greedy value exceeds half the bound and the upper bound does not
    settle the case.
    """
    g, structure = build_diamond(level)
    m = metric if metric is not None else shortest_path_metric(g)
    params = {"level": level, "p": p, "exact_up_to": exact_up_to}
    report = VerificationReport("entropy", params)
    with _Timer() as t:
        for sub in structure.subdiamonds:
            h = level - sub.step
            ps = range(h + 1) if p is None else ([p] if p <= h else [])
            members = sorted(sub.members)
            local = m.restrict(members)
            for q in ps:
                bound = 2 * 4 ** (h - q)
                delta = 2 ** q
                case = {"lineage": sub.lineage, "height": sub.height, "p": q, "bound": bound}
                if level > exact_up_to:
                    greedy = max_separated_set(local, delta, mode="greedy").size
                    upper = separated_upper_bound(local, delta)
                    if greedy <= bound / 2 or upper <= bound:
                        case.update(lower=greedy, upper=upper)
                        if upper > bound:
                            report.certified = False
                        continue
                try:
                    best = max_separated_set(local, delta, node_budget=node_budget)
                except BudgetExceeded as exc:
                    report.certified = False
                    case.update(lower=exc.incumbent.size, exact=False)
                    if exc.incumbent.size > bound:
                        report.violations.append(case)
                    continue
                case["max"] = best.size
                if best.size > bound:
                    case["witness"] = [members[i] for i in best.members]
                    report.violations.append(case)
                elif best.size == bound:
                    report.tight_cases.append(case)
    report.runtime_ms = t.ms
    return report


def bilip_certificate_check(
    f: Sequence[int],
    tree: MetricSpace,
    diamond: MetricSpace,
    p: int,
    k: int,
) -> Optional[dict]:
    """Check ``2**p d_T(u,v) <= d_D(f u, f v) <= 2**(k+p) d_T(u,v)`` for all pairs.

    Returns ``None`` on success, otherwise the lexicographically first
    violating pair with both sides of the failing inequality.
    """
    if len(f) != tree.n_points:
        raise ValueError("map must be defined on every tree vertex")
    lo, hi = 2 ** p, 2 ** (k + p)
    n = tree.n_points
    for u in range(n):
        for v in range(u + 1, n):
            dt = tree.dist[u, v]
            dd = diamond.dist[f[u], f[v]]
            if dd < lo * dt:
                return {"pair": (u, v), "side": "lower", "tree_distance": float(dt),
                        "image_distance": float(dd), "required": float(lo * dt)}
            if dd > hi * dt:
                return {"pair": (u, v), "side": "upper", "tree_distance": float(dt),
                        "image_distance": float(dd), "required": float(hi * dt)}
    return None


def leaves_through_exit(
    fu: int,
    fw: int,
    exit_vertex: int,
    sub: Subdiamond,
    diamond: MetricSpace,
    p: int,
    k: int,
) -> bool:
    """Whether the step ``u -> w`` of a path leaves ``sub`` through
    ``exit_vertex``: ``f u`` inside, ``f w`` outside, and the detour through
    the exit is at most ``2**k * 2**p``."""
    if fu not in sub.members or fw in sub.members:
        return False
    return diamond.dist[fu, exit_vertex] + diamond.dist[exit_vertex, fw] <= 2 ** k * 2 ** p


def path_exits(
    path: Sequence[int],
    f: Sequence[int],
    sub: Subdiamond,
    diamond: MetricSpace,
    p: int,
    k: int,
    min_generation: int = 0,
) -> list[tuple[int, int, int]]:
    """All ``(u, w, exit)`` steps through which a tree path leaves ``sub``.

    ``path`` is a list of tree vertices starting at the subtree root;
    ``min_generation`` skips steps whose first vertex is closer to the root
    than the cutoff, so callers can replay arguments about late generations.
    """
    out = []
    for depth, (u, w) in enumerate(zip(path, path[1:])):
        if depth < min_generation:
            continue
        for x in (sub.bottom, sub.top):
            if leaves_through_exit(f[u], f[w], x, sub, diamond, p, k):
                out.append((u, w, x))
    return out
