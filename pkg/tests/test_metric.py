from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tropvol import (Divisor, MetricDivisor, MetricGraph, PLFunction, Point, bn_rank, constant_c,
                     fe_move, fv_move, in_R, metric_bn_rank, metric_effectivize,
                     metric_linearly_equivalent, pl_div, subdivision_model)
from tropvol import fixtures as fx
from tropvol.errors import GraphMismatch, InvalidFunction, InvalidLength, InvalidPoint
from tropvol.metric import (SubdivisionModel, canonical_divisor, concentrate_degree,
                            metric_has_effective, path_distance)

from graphs import random_multigraph, rng

half = Fraction(1, 2)


def linear(gamma, e, slope):
    """Slope ``slope`` along edge ``e`` from its tail, constant elsewhere (for a tree-like edge)."""
    L = gamma.lengths[gamma.edge_index(e)]
    return PLFunction(gamma, {e: [(0, 0), (L, slope * L)]})


# points and distances

def test_point_canonicalization():
    g = fx.one_edge()
    assert g.point(0, 0) == Point(vertex="v0")
    assert g.point("e0", 1) == Point(vertex="v1")
    assert g.point(0, half) == Point(edge=0, offset=half)
    with pytest.raises(InvalidPoint):
        g.point(0, 2)


def test_distances():
    g = fx.one_edge()
    p = g.point(0, Fraction(1, 3))
    assert path_distance(g, p, p) == 0
    assert path_distance(g, g.vertex_point("v0"), g.vertex_point("v1")) == 1
    lol = fx.lollipop()
    antipode = lol.point(0, half)
    assert path_distance(lol, lol.vertex_point("u"), antipode) == Fraction(3, 2)


def test_invalid_lengths():
    with pytest.raises(InvalidLength):
        MetricGraph.build(["a", "b"], [("a", "b")], [0])
    with pytest.raises(InvalidLength):
        MetricGraph.build(["a", "b"], [("a", "b")], ["-1/2"])


@given(st.integers(0, 10_000))
def test_distance_symmetric(seed):
    r = rng(seed)
    g = random_multigraph(r, loops=False)
    if not g.edges:
        return
    gamma = MetricGraph(g, [Fraction(r.randint(1, 4), r.randint(1, 3)) for _ in g.edges])
    pts = []
    for _ in range(2):
        e = r.randrange(gamma.n_edges)
        pts.append(gamma.point(e, gamma.lengths[e] * Fraction(r.randint(0, 4), 4)))
    p, q = pts
    assert path_distance(gamma, p, q) == path_distance(gamma, q, p)
    assert (path_distance(gamma, p, q) == 0) == (p == q)


# PL functions and divisors

def test_pl_div_examples():
    g = fx.one_edge()
    assert pl_div(PLFunction.constant(g, 3)) == MetricDivisor(g)
    x = linear(g, 0, 1)
    assert pl_div(x) == MetricDivisor(g, {"v0": -1, "v1": 1})
    D = MetricDivisor(g, {"v0": 1})
    assert (D + pl_div(x)) == MetricDivisor(g, {"v1": 1})


def test_pl_function_validation():
    g = fx.one_edge()
    with pytest.raises(InvalidFunction):
        PLFunction(g, {0: [(0, 0), (1, half)]})
    with pytest.raises(InvalidFunction):
        PLFunction(g, {0: [(0, 0), (half, 0)]})
    tri = fx.elliptic_triangle()
    with pytest.raises(InvalidFunction):
        PLFunction(tri, {0: [(0, 0), (1, 1)], 1: [(0, 0), (1, 0)], 2: [(0, 0), (1, 0)]})


def test_in_R_examples():
    g = fx.one_edge()
    D = MetricDivisor(g, {"v0": 1})
    assert in_R(D, PLFunction.constant(g))
    assert in_R(D, linear(g, 0, 1))
    assert not in_R(D, linear(g, 0, 2))
    with pytest.raises(GraphMismatch):
        in_R(D, PLFunction.constant(fx.two_edge()))


@pytest.mark.parametrize("ell", [1, 2, 3])
def test_lollipop_bridge_slopes_in_R(ell):
    g = fx.lollipop()
    D = canonical_divisor(g) * ell
    for s in range(ell + 1):
        phi = PLFunction(g, {0: [(0, 0), (1, 0)], 1: [(0, 0), (1, s)]})
        assert in_R(D, phi)
    phi = PLFunction(g, {0: [(0, 0), (1, 0)], 1: [(0, 0), (1, ell + 1)]})
    assert not in_R(D, phi)


def test_fe_move_divisor_identity():
    g = fx.one_edge()
    F = MetricDivisor(g, {g.point(0, Fraction(1, 3)): 1, g.point(0, Fraction(2, 3)): 1})
    new, f, claimed = fe_move(F, 0)
    assert pl_div(f) == claimed
    assert claimed == MetricDivisor(g, {"v0": 1, g.point(0, Fraction(1, 3)): -1,
                                        g.point(0, Fraction(2, 3)): -1, "v1": 1})
    assert new == MetricDivisor(g, {"v0": 1, "v1": 1})


def test_fe_move_general_position():
    g = fx.one_edge(3)
    p1, p2 = g.point(0, half), g.point(0, 2)
    new, f, claimed = fe_move(MetricDivisor(g, {p1: 1, p2: 1}), 0)
    assert claimed == MetricDivisor(g, {"v0": 1, p1: -1, p2: -1, g.point(0, Fraction(5, 2)): 1})
    assert pl_div(f) == claimed


def test_concentration():
    g = fx.one_edge()
    D = MetricDivisor(g, {"v0": 2, "v1": -1})
    assert concentrate_degree(D) == D
    F = MetricDivisor(g, {g.point(0, Fraction(1, 3)): 1, g.point(0, Fraction(2, 3)): 1})
    assert concentrate_degree(F) == MetricDivisor(g, {"v0": 1, "v1": 1})
    G = MetricDivisor(g, {g.point(0, Fraction(1, 3)): -2, "v0": 3})
    assert concentrate_degree(G) == G


def test_fv_move_identity():
    g = fx.lollipop()
    F = MetricDivisor(g, {"v": 5})
    new, f, claimed = fv_move(F, ["v"])
    assert pl_div(f) == claimed
    assert new.degree() == F.degree()
    assert new["v"] == 2


# models

def test_model_one_edge():
    g = fx.one_edge()
    view = subdivision_model(g, MetricDivisor(g, {"v1": 1}))
    assert view.scale == 1 and view.graph.n == 2
    assert view.divisor == Divisor(view.graph, {"v1": 1})


def test_model_lollipop():
    g = fx.lollipop()
    view = subdivision_model(g, canonical_divisor(g))
    assert view.scale == 2
    assert view.graph.is_loopless()
    # one new vertex at the loop midpoint, one at the bridge midpoint
    assert view.graph.n == 4 and len(view.graph.edges) == 4
    assert [len(chain) - 1 for chain in view.model.chains] == [2, 2]


def test_model_conic():
    g = fx.conic_segment()
    view = subdivision_model(g, MetricDivisor(g, {"v_y": 2}))
    assert view.graph.n == 2 and len(view.graph.edges) == 1
    assert view.divisor.to_dict() == {"v_y": 2, "v_x": 0}


@given(st.integers(0, 10_000))
def test_model_function_divisor_is_laplacian(seed):
    from tropvol.divisor import laplacian_apply

    r = rng(seed)
    g = random_multigraph(r, max_vertices=3, max_edges=4)
    if not g.edges:
        return
    gamma = MetricGraph(g, [Fraction(r.randint(1, 3), r.randint(1, 2)) for _ in g.edges])
    view = subdivision_model(gamma, refine=r.randint(1, 2))
    pot = [r.randint(-3, 3) for _ in view.graph.vertices]
    phi = view.model.function_from_potential(pot)
    lap = laplacian_apply(view.graph, pot)
    assert view.model.to_model(pl_div(phi)) == Divisor(view.graph, lap)
    assert pl_div(phi).degree() == 0


# ranks

@pytest.mark.parametrize("ell", range(1, 6))
def test_lollipop_rank(ell):
    g = fx.lollipop()
    assert metric_bn_rank(canonical_divisor(g) * ell) == ell - 1


def test_barbell_and_two_edge_ranks():
    b = fx.barbell()
    assert metric_bn_rank(canonical_divisor(b)) == 1
    t = fx.two_edge()
    assert metric_bn_rank(MetricDivisor(t, {"v": 2})) == 2


def test_constants():
    assert constant_c(fx.lollipop()) == 18
    assert constant_c(fx.barbell()) == 24
    loop = MetricGraph.build(["v"], [("v", "v")], [1])
    assert constant_c(loop) == 8


@pytest.mark.parametrize("seed", range(30))
def test_metric_rank_matches_loopless_graph(seed):
    r = rng(seed)
    g = random_multigraph(r, loops=False)
    gamma = MetricGraph(g, [1] * len(g.edges))
    D = Divisor(g, [r.randint(-2, 4) for _ in g.vertices])
    assert metric_bn_rank(MetricDivisor.from_divisor(gamma, D)) == bn_rank(D)


@pytest.mark.parametrize("seed", range(15))
def test_refined_model_agrees(seed):
    r = rng(seed)
    g = random_multigraph(r, max_vertices=3, max_edges=3)
    gamma = MetricGraph(g, [Fraction(r.randint(1, 3), 2) for _ in g.edges])
    D = MetricDivisor.from_divisor(gamma, Divisor(g, [r.randint(-1, 2) for _ in g.vertices]))
    assert metric_bn_rank(D, refine=True) == metric_bn_rank(D)


@pytest.mark.parametrize("seed", range(15))
def test_metric_rank_superadditive_and_bounded(seed):
    r = rng(seed)
    gamma = fx.lollipop() if seed % 2 else fx.barbell()
    pts = [gamma.vertex_point(v) for v in gamma.vertices] + [gamma.point(0, half), gamma.point(1, half)]
    D1 = MetricDivisor(gamma, {r.choice(pts): r.randint(0, 2) for _ in range(2)})
    D2 = MetricDivisor(gamma, {r.choice(pts): r.randint(0, 2) for _ in range(2)})
    r1, r2 = metric_bn_rank(D1), metric_bn_rank(D2)
    if r1 >= 0 and r2 >= 0:
        assert metric_bn_rank(D1 + D2) >= r1 + r2
    assert r1 >= D1.degree() - constant_c(gamma)


# effectivization

def test_metric_effectivize_trivial():
    g = fx.lollipop()
    D = MetricDivisor(g, {"v": 2})
    res = metric_effectivize(D)
    assert res.found and res.representative == D
    assert not metric_effectivize(MetricDivisor(g, {"u": -1})).found


def test_metric_effectivize_lollipop():
    g = fx.lollipop()
    q = g.point(0, half)
    D = MetricDivisor(g, {"v": 20, q: -1})
    assert D.degree() >= constant_c(g)
    res = metric_effectivize(D)
    assert res.found and res.representative.is_effective()
    assert metric_linearly_equivalent(res.representative, D)


@pytest.mark.parametrize("seed", range(10))
def test_metric_effectivize_high_degree(seed):
    r = rng(seed)
    g = fx.barbell()
    pts = [g.point(e, Fraction(k, 4)) for e in range(3) for k in range(1, 4)]
    D = MetricDivisor(g, {p: -r.randint(0, 2) for p in r.sample(pts, 3)})
    D = D + MetricDivisor(g, {"v1": constant_c(g) - D.degree() + r.randint(0, 3)})
    res = metric_effectivize(D)
    assert res.found and res.representative.is_effective()
    assert metric_linearly_equivalent(res.representative, D)


def test_metric_effectivize_low_degree_uses_model():
    g = fx.two_edge()
    D = MetricDivisor(g, {"v1": 2, "v2": -1})
    res = metric_effectivize(D)
    assert res.found == metric_has_effective(D) is True
    assert metric_linearly_equivalent(res.representative, D)
