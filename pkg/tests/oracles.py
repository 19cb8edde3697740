"""Reference computations kept independent of the package code paths."""

import itertools
import math

import numpy as np


def floyd_warshall(n, edges):
    d = [[0 if i == j else math.inf for j in range(n)] for i in range(n)]
    for u, v, w in edges:
        d[u][v] = min(d[u][v], w)
        d[v][u] = min(d[v][u], w)
    for k in range(n):
        for i in range(n):
            dik = d[i][k]
            for j in range(n):
                if dik + d[k][j] < d[i][j]:
                    d[i][j] = dik + d[k][j]
    return d


def brute_max_separated(dist, delta):
    n = len(dist)
    best = 0
    for mask in range(1 << n):
        pts = [i for i in range(n) if mask >> i & 1]
        if len(pts) <= best:
            continue
        if all(dist[a][b] >= delta for a, b in itertools.combinations(pts, 2)):
            best = len(pts)
    return best


def exhaustive_min_distortion(ds, dt):
    n, N = len(ds), len(dt)
    best, arg = math.inf, None
    for f in itertools.permutations(range(N), n):
        up = down = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                up = max(up, dt[f[i]][f[j]] / ds[i][j])
                down = max(down, ds[i][j] / dt[f[i]][f[j]])
        val = up * down if n > 1 else 1.0
        if val < best:
            best, arg = val, f
    return best, arg


def pair_scan_bilip(f, dtree, ddiam, p, k):
    """Two-sided check by direct enumeration; returns first failing pair or None."""
    n = len(dtree)
    for u in range(n):
        for v in range(u + 1, n):
            lhs = 2 ** p * dtree[u][v]
            mid = ddiam[f[u]][f[v]]
            rhs = 2 ** k * 2 ** p * dtree[u][v]
            if not (lhs <= mid <= rhs):
                return (u, v)
    return None


def norm_distances(coords, norm):
    n = len(coords)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            diff = coords[i] - coords[j]
            if norm == "l1":
                out[i, j] = np.abs(diff).sum()
            elif norm == "l2":
                out[i, j] = math.sqrt((diff * diff).sum())
            else:
                out[i, j] = np.abs(diff).max()
    return out
