import math
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from diamondmetrics.composite import glue
from diamondmetrics.embeddings import (
    Embedding, dinfinity_phi, distortion, distortion_from_matrices, embed_weighted_diamond,
    fit_quasi_isometry, frechet_embedding, glue_embed, lip_inv_first_level, line_embedding_of_path,
    m_of_eps, omega, paper_bound_w, polygon_embedding, weighted_diamond_coordinates)
from diamondmetrics.graphs import (build_cycle, build_diamond, build_path, build_weighted_diamond,
                                   dinfinity_ball, dinfinity_interior)
from diamondmetrics.metric import is_isometric_subspace, shortest_path_metric

from oracles import norm_distances


def test_omega_first_level():
    assert omega(1, 0.25) == pytest.approx(math.sqrt(0.3125), rel=1e-15)
    assert omega(3, 0.25) == pytest.approx(math.sqrt(0.3125) * 0.75 ** 2, rel=1e-15)


def test_f1_coordinates():
    e = embed_weighted_diamond(1, 0.25)
    w1 = omega(1, 0.25)
    assert e.dim == 2
    np.testing.assert_allclose(e.coords, [[0, 0], [1, 0], [0.5, w1], [0.5, -w1]], atol=1e-15)


@pytest.mark.parametrize("level", range(6))
def test_dimension(level):
    e = embed_weighted_diamond(level, 0.25)
    assert e.dim == 1 + (4 ** level - 1) // 3


@pytest.mark.parametrize("eps", [0.05, 0.1, 0.25, 0.4])
def test_f1_closed_form(eps):
    g, _ = build_weighted_diamond(1, eps)
    rep = distortion(embed_weighted_diamond(1, eps), shortest_path_metric(g))
    assert rep.lip == pytest.approx(1, abs=1e-12)
    assert rep.distortion == pytest.approx((1 + 2 * eps) / (2 * math.sqrt(eps + eps * eps)), rel=1e-9)
    assert rep.distortion == pytest.approx(lip_inv_first_level(eps), rel=1e-12)
    # contraction is attained on the a-b pair only
    assert set(rep.witness_contract) == {g.index_of("a"), g.index_of("b")}


def test_lip_inv_first_level_frozen():
    assert lip_inv_first_level(0.25) == pytest.approx(1.3416407864998738, rel=1e-12)


@pytest.mark.parametrize("level", range(1, 5))
def test_edge_isometry_float(level):
    g, _ = build_weighted_diamond(level, 0.25)
    d = embed_weighted_diamond(level, 0.25).host_distances()
    for u, v, w in g.edges:
        assert d[u, v] == pytest.approx(w, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("level", range(1, 4))
@pytest.mark.parametrize("eps", [Fraction(1, 4), Fraction(1, 10), Fraction(2, 5)])
def test_edge_isometry_exact(level, eps):
    g, s = build_weighted_diamond(level, eps)
    coords = weighted_diamond_coordinates(s)
    sq = coords.scale_sq(eps)
    for u, v, w in g.edges:
        assert coords.squared_distance(u, v, sq) == w * w


@pytest.mark.parametrize("level", [1, 2, 3, 4])
def test_fn_nonexpansive_and_bounded(level):
    g, _ = build_weighted_diamond(level, 0.25)
    rep = distortion(embed_weighted_diamond(level, 0.25), shortest_path_metric(g))
    assert rep.lip <= 1 + 1e-9
    assert rep.distortion <= paper_bound_w(0.25)


def test_m_of_eps_values():
    assert m_of_eps(0.25) == 3
    assert m_of_eps(0.1) == 4
    assert m_of_eps(0.49) == 3
    with pytest.raises(ValueError):
        m_of_eps(0.5)


def _m_reference(eps):
    q = mpmath.mpf(1) / 2 + mpmath.mpf(eps)
    m = 1
    while sum(q ** j for j in range(1, m + 1)) < 1 + q ** m:
        m += 1
    return m


@pytest.mark.parametrize("eps", ["0.25", "0.1"])
def test_bound_matches_high_precision(eps):
    mpmath.mp.dps = 50
    e = mpmath.mpf(eps)
    m = _m_reference(eps)
    ref = 2 ** (m + 1) / ((mpmath.mpf(1) / 2 - e) * mpmath.sqrt(e + e * e)) * (mpmath.mpf(1) / 2 + e)
    assert paper_bound_w(float(eps)) == pytest.approx(float(ref), rel=1e-12)


def test_bound_frozen():
    assert paper_bound_w(0.25) == pytest.approx(85.86501033599193, rel=1e-12)
    assert paper_bound_w(0.1) == pytest.approx(144.7254453973265, rel=1e-12)


def test_quasi_isometry_fit_f1():
    g, _ = build_weighted_diamond(1, 0.25)
    m = shortest_path_metric(g)
    e = embed_weighted_diamond(1, 0.25)
    fit = fit_quasi_isometry(list(range(4)), m, e.host_distances(), 1, 1)
    assert fit.b == pytest.approx(1.5 - 2 * omega(1, 0.25), rel=1e-12)


def test_quasi_isometry_constant_map():
    m = shortest_path_metric(build_diamond(2)[0])
    fit = fit_quasi_isometry([0] * m.n_points, m, m, 1, 1)
    assert fit.b == 4


def test_quasi_isometry_zero_iff_bilipschitz():
    m = shortest_path_metric(build_cycle(6))
    assert fit_quasi_isometry(list(range(6)), m, m, 1, 1).b == 0
    assert fit_quasi_isometry(list(range(6)), m, m, 0.5, 2).b == 0
    assert fit_quasi_isometry([1, 0, 2, 3, 4, 5], m, m, 1, 1).b > 0
    with pytest.raises(ValueError):
        fit_quasi_isometry(list(range(6)), m, m, 2, 1)


@pytest.mark.parametrize("radius", [3, 4, 10, 25])
def test_phi_distortion_four(radius):
    ball, labels = dinfinity_ball(radius)
    m = shortest_path_metric(ball)
    inner = dinfinity_interior(ball)
    phi = dinfinity_phi(ball)
    rep = distortion(Embedding("l2", phi.coords[inner]), m.restrict(inner))
    assert rep.distortion == 4


def test_phi_rejects_unlabelled():
    with pytest.raises(ValueError):
        dinfinity_phi(build_path(2))


def test_distortion_scale_invariant():
    g, _ = build_weighted_diamond(2, 0.25)
    m = shortest_path_metric(g)
    e = embed_weighted_diamond(2, 0.25)
    base = distortion(e, m)
    for c in (0.001, 3.0, 1e4):
        scaled = distortion(Embedding("l2", c * e.coords), m)
        assert scaled.distortion == pytest.approx(base.distortion, rel=1e-9)
        assert scaled.lip == pytest.approx(c * base.lip, rel=1e-9)


def test_distortion_collapse_is_infinite():
    m = shortest_path_metric(build_path(2))
    rep = distortion(Embedding("l2", np.zeros((3, 1))), m)
    assert math.isinf(rep.distortion)
    assert rep.to_json()["distortion"] == "inf"
    assert rep.witness_contract == (0, 1)


def test_distortion_size_mismatch():
    with pytest.raises(ValueError):
        distortion(line_embedding_of_path(2), shortest_path_metric(build_path(3)))
    with pytest.raises(ValueError):
        distortion_from_matrices(np.zeros((2, 2)), np.zeros((3, 3)))


@pytest.mark.parametrize("norm", ["l1", "l2", "linf"])
def test_host_distances_match_direct_loop(norm):
    rng = np.random.default_rng(3)
    coords = rng.normal(size=(12, 5))
    e = Embedding(norm, coords)
    np.testing.assert_allclose(e.host_distances(), norm_distances(coords, norm), rtol=1e-12, atol=1e-14)
    assert e.norm(coords[0]) == pytest.approx(norm_distances(np.vstack([coords[0], np.zeros(5)]), norm)[0, 1])


def test_embedding_validation():
    with pytest.raises(ValueError):
        Embedding("l3", np.zeros((2, 1)))
    with pytest.raises(ValueError):
        Embedding("l2", np.zeros(3))
    with pytest.raises(ValueError):
        Embedding("l2", np.array([[np.nan]]))


def test_frechet_is_isometric():
    m = shortest_path_metric(build_diamond(2)[0])
    rep = distortion(frechet_embedding(m), m)
    assert rep.lip == 1 and rep.distortion == 1


def test_polygon_and_line():
    c = shortest_path_metric(build_cycle(7))
    rep = distortion(polygon_embedding(7), c)
    assert rep.lip == pytest.approx(1, rel=1e-12)
    p = shortest_path_metric(build_path(4))
    assert distortion(line_embedding_of_path(4), p).distortion == 1


def test_glue_embed_two_diamonds():
    m = shortest_path_metric(build_diamond(1)[0])
    gs = glue([(m, 0), (m, 1)], [3])
    e = glue_embed([frechet_embedding(m), frechet_embedding(m)], gs)
    rep = distortion(e, shortest_path_metric(gs.combined))
    assert rep.lip <= 1 + 1e-9
    assert rep.lip_inv <= 4


def test_glue_embed_rejects_expanding_block():
    m = shortest_path_metric(build_path(2))
    gs = glue([(m, 0), (m, 0)], [2])
    big = Embedding("l2", 3 * np.arange(3.0)[:, None])
    with pytest.raises(ValueError):
        glue_embed([big, line_embedding_of_path(2)], gs)
    with pytest.raises(ValueError):
        glue_embed([line_embedding_of_path(2)], gs)
    with pytest.raises(ValueError):
        glue_embed([line_embedding_of_path(2), frechet_embedding(m)], gs)


def random_glue_instance(seed):
    rng = random.Random(seed)
    blocks, embs = [], []
    for _ in range(rng.randint(2, 4)):
        kind = rng.choice(["wdiamond", "cycle", "path", "diamond"])
        if kind == "wdiamond":
            lvl = rng.randint(1, 2)
            g, _ = build_weighted_diamond(lvl, 0.25)
            e = embed_weighted_diamond(lvl, 0.25)
        elif kind == "cycle":
            g = build_cycle(rng.randint(3, 8))
            e = polygon_embedding(g.n_vertices)
        elif kind == "path":
            g = build_path(rng.randint(1, 5))
            e = line_embedding_of_path(g.n_vertices - 1)
        else:
            g, _ = build_diamond(rng.randint(1, 2))
            e = None
        m = shortest_path_metric(g)
        if e is None:
            e = frechet_embedding(m)
        blocks.append((m, rng.randrange(m.n_points)))
        embs.append(e)
    if len({e.host_norm for e in embs}) > 1:
        embs = [frechet_embedding(m) for m, _ in blocks]
    lengths = []
    for (a, _), (b, _) in zip(blocks, blocks[1:]):
        need = math.ceil(max(float(a.dist.max()), float(b.dist.max())))
        lengths.append(need + rng.randint(0, 2))
    return blocks, embs, lengths


@pytest.mark.parametrize("seed", range(15))
def test_glue_embed_random(seed):
    blocks, embs, lengths = random_glue_instance(seed)
    gs = glue(blocks, lengths)
    gm = shortest_path_metric(gs.combined)
    rep = distortion(glue_embed(embs, gs), gm)
    worst = max(distortion(e, m).lip_inv for e, (m, _) in zip(embs, blocks))
    assert rep.lip <= 1 + 1e-9
    assert rep.lip_inv <= 4 * max(1, worst) * (1 + 1e-9)
    for n, (m, _) in enumerate(blocks):
        assert is_isometric_subspace(gs.block_offsets[n], gm, m)
