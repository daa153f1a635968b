import pytest
from hypothesis import given, strategies as st

from tropvol import (Divisor, bn_rank, constant_C, effectivize, equivalence_potential, euler_char,
                     fire_set, has_effective, jacobian_order, linearly_equivalent,
                     rank_certificate, reduce, saturate)
from tropvol import fixtures as fx
from tropvol.divisor import effective_representatives, laplacian_apply
from tropvol.errors import GraphMismatch, UnknownVertex

from graphs import random_multigraph, rng
import oracles


def random_divisor(r, graph, lo=-4, hi=4):
    return Divisor(graph, [r.randint(lo, hi) for _ in graph.vertices])


def test_divisor_arithmetic_and_parts():
    g = fx.cycle4()
    D = Divisor(g, [3, -1, 0, 2])
    assert D.degree() == 4
    assert D.positive_part() + D.negative_part() == D
    assert not D.is_effective() and D.positive_part().is_effective()
    assert repr(D) == "Divisor(3v0 - v1 + 2v3)"
    assert (2 * D).coeffs == (6, -2, 0, 4)


# firing

def test_single_loop_firing_is_identity():
    g = fx.single_loop()
    D = Divisor(g, [5])
    assert fire_set(D, ["v"]) == D


def test_firing_everything_is_identity():
    D = Divisor(fx.lollipop_graph(), [2, -3])
    assert fire_set(D, D.graph.vertices) == D


def test_cycle4_twelve_firings():
    D = fx.cycle4_start()
    for _ in range(12):
        D = fire_set(D, ["v0"])
    assert D.coeffs == (56, 2, -10, 2)


def test_fire_unknown_vertex():
    with pytest.raises(UnknownVertex):
        fire_set(fx.cycle4_start(), ["nope"])


# reduction and equivalence

def test_reduce_single_vertex():
    g = fx.single_loop()
    assert reduce(Divisor(g, [4])) == Divisor(g, [4])


@pytest.mark.parametrize("seed", range(40))
def test_reduce_matches_orbit_oracle(seed):
    r = rng(seed)
    g = fx.triangle()
    D = random_divisor(r, g, -3, 4)
    orbit = oracles.firing_orbit(g, D.coeffs, 16)
    for q in range(3):
        assert reduce(D, g.vertices[q]).coeffs == oracles.reduced_from_orbit(orbit, q)


@given(st.integers(0, 10_000))
def test_reduce_idempotent_and_equivalent(seed):
    r = rng(seed)
    g = random_multigraph(r)
    D = random_divisor(r, g)
    q = r.choice(g.vertices)
    red = reduce(D, q)
    assert reduce(red, q) == red
    assert linearly_equivalent(D, red)


@given(st.integers(0, 10_000))
def test_firing_preserves_class_and_degree(seed):
    r = rng(seed)
    g = random_multigraph(r)
    D = random_divisor(r, g)
    S = [v for v in g.vertices if r.random() < 0.5]
    F = fire_set(D, S)
    assert F.degree() == D.degree()
    assert linearly_equivalent(D, F)


def test_equivalence_examples():
    g = fx.cycle4()
    assert linearly_equivalent(fx.cycle4_start(), Divisor(g, [48, 1, 0, 1]))
    assert not linearly_equivalent(Divisor(g, [1, 0, 0, 0]), Divisor(g, [2, 0, 0, 0]))
    with pytest.raises(GraphMismatch):
        linearly_equivalent(Divisor(g), Divisor(fx.star3()))


def test_has_effective_examples():
    g = fx.cycle4()
    assert not has_effective(Divisor(g, [-1, 0, 0, 0]))
    assert has_effective(Divisor(g, [1, 2, 0, 0]))
    assert has_effective(Divisor(g, [90, -8, -8, -8]))
    assert not has_effective(Divisor(g, [1, -1, 0, 0]))


# rank

def test_rank_negative_degree():
    assert bn_rank(Divisor(fx.cycle4(), [3, -2, -1, -1])) == -1


@pytest.mark.parametrize("seed", range(20))
def test_star_rank_is_degree(seed):
    r = rng(seed)
    g = fx.star3()
    while True:
        D = random_divisor(r, g, -3, 6)
        if D.degree() >= -1:
            break
    assert bn_rank(D) == D.degree()


@pytest.mark.parametrize("d", range(0, 6))
def test_single_loop_rank(d):
    assert bn_rank(Divisor(fx.single_loop(), [d])) == d


@pytest.mark.parametrize("seed", range(25))
def test_rank_matches_definition(seed):
    r = rng(seed)
    g = random_multigraph(r, max_vertices=3, max_edges=4)
    D = random_divisor(r, g, -2, 3)
    assert bn_rank(D) == oracles.brute_rank(g, D.coeffs, 12)


@given(st.integers(0, 10_000))
def test_rank_certificate(seed):
    r = rng(seed)
    g = random_multigraph(r)
    D = random_divisor(r, g, -2, 5)
    rk, E = rank_certificate(D)
    assert rk == bn_rank(D)
    if rk >= 0:
        assert E.is_effective() and E.degree() == rk + 1
        assert not has_effective(D - E)


@given(st.integers(0, 10_000))
def test_rank_bounds(seed):
    r = rng(seed)
    g = random_multigraph(r)
    D = random_divisor(r, g, -3, 8)
    rk = bn_rank(D)
    assert rk >= D.degree() - constant_C(g)
    if D.degree() >= -1:
        assert rk <= D.degree()


@given(st.integers(0, 10_000))
def test_superadditivity(seed):
    r = rng(seed)
    g = random_multigraph(r)
    D1, D2 = random_divisor(r, g, -1, 3), random_divisor(r, g, -1, 3)
    r1, r2 = bn_rank(D1), bn_rank(D2)
    if r1 >= 0 and r2 >= 0:
        assert bn_rank(D1 + D2) >= r1 + r2


def test_constants():
    assert constant_C(fx.cycle4()) == 50
    assert constant_C(fx.lollipop_graph()) == 18
    from tropvol import Multigraph

    assert constant_C(Multigraph(["v"], [])) == 4
    assert jacobian_order(fx.cycle4()) == 4
    assert jacobian_order(fx.triangle()) == 3


# effectivization

def test_cycle4_effectivization_trace():
    res = effectivize(fx.cycle4_start())
    assert res.found
    assert res.representative.coeffs == (48, 1, 0, 1)
    assert len(res.trace) == 21
    assert res.trace.divisor_after(12).coeffs == (56, 2, -10, 2)
    assert res.trace.divisor_after(13).coeffs == (56, 1, -8, 1)
    assert res.trace.check()


def test_effectivize_trivial_cases():
    g = fx.cycle4()
    D = Divisor(g, [1, 0, 2, 0])
    res = effectivize(D)
    assert res.found and res.representative == D and len(res.trace) == 0
    assert not effectivize(Divisor(g, [0, -1, 0, 0])).found


@given(st.integers(0, 10_000))
def test_effectivize_consistency(seed):
    r = rng(seed)
    g = random_multigraph(r)
    D = random_divisor(r, g, -4, 6)
    res = effectivize(D)
    assert res.found == has_effective(D)
    assert res.trace.check()
    assert res.trace.final == res.representative
    if res.found:
        assert res.representative.is_effective()
        assert linearly_equivalent(res.representative, D)


@given(st.integers(0, 10_000))
def test_high_degree_schedule(seed):
    r = rng(seed)
    g = random_multigraph(r, max_vertices=3, max_edges=4)
    C = constant_C(g)
    D = random_divisor(r, g, -10, 10)
    D = D + Divisor.vertex(g, g.vertices[0], C - D.degree() + r.randint(0, 5))
    res = effectivize(D)
    assert res.found and res.representative.is_effective()
    assert all(len(rd.fired) for rd in res.trace.rounds)


@given(st.integers(0, 10_000))
def test_saturation(seed):
    r = rng(seed)
    g = random_multigraph(r, max_vertices=3, max_edges=4)
    C = constant_C(g)
    D = random_divisor(r, g, -10, 10)
    D = D + Divisor.vertex(g, g.vertices[-1], 2 * C - D.degree() + r.randint(0, 5))
    sat, trace = saturate(D)
    assert trace.check() and linearly_equivalent(sat, D)
    assert all(c >= g.valence(v) for v, c in zip(g.vertices, sat.coeffs))


# euler characteristic

def test_single_loop_rr_failure():
    g = fx.single_loop()
    assert euler_char(Divisor(g, [0])) == 0
    assert euler_char(Divisor(g, [1])) == 2


@pytest.mark.parametrize("seed", range(50))
def test_classical_rr_on_loopless(seed):
    r = rng(seed)
    g = random_multigraph(r, loops=False)
    D = random_divisor(r, g, -3, 5)
    assert euler_char(D) == oracles.classical_rr_chi(g, D.coeffs)


# helpers behind the metric layer

@given(st.integers(0, 10_000))
def test_equivalence_potential(seed):
    r = rng(seed)
    g = random_multigraph(r)
    D1 = random_divisor(r, g)
    S = [v for v in g.vertices if r.random() < 0.5]
    D2 = fire_set(fire_set(D1, S), [g.vertices[0]])
    pot = equivalence_potential(D1, D2)
    lap = laplacian_apply(g, pot)
    assert tuple(a + b for a, b in zip(D1.coeffs, lap)) == D2.coeffs
    assert equivalence_potential(D1, D1 + Divisor.vertex(g, g.vertices[0])) is None


@pytest.mark.parametrize("seed", range(15))
def test_effective_representatives_match_orbit(seed):
    r = rng(seed)
    g = fx.triangle()
    D = random_divisor(r, g, -1, 3)
    got = {E.coeffs for E in effective_representatives(D)}
    orbit = oracles.firing_orbit(g, D.coeffs, 14)
    want = {d for d in orbit if all(c >= 0 for c in d)}
    assert got == want
