import pytest
from hypothesis import given, strategies as st

from tropvol import Multigraph, build_multigraph, canonical_divisor, genus, valence
from tropvol import fixtures as fx
from tropvol.errors import Disconnected, EmptyGraph, UnknownVertex

from graphs import random_multigraph, rng


def test_single_loop_is_valid():
    g = build_multigraph(["v"], [("v", "v")])
    assert g.n == 1 and len(g.edges) == 1


def test_two_isolated_vertices_rejected():
    with pytest.raises(Disconnected):
        build_multigraph(["a", "b"], [])


def test_barbell_is_valid():
    g = fx.barbell_graph()
    assert g.vertices == ("v1", "v2")
    assert g.loop_count("v1") == g.loop_count("v2") == 1


def test_empty_and_unknown():
    with pytest.raises(EmptyGraph):
        Multigraph([], [])
    with pytest.raises(UnknownVertex):
        Multigraph(["a"], [("a", "b")])


def test_valences():
    assert valence(fx.single_loop(), "v") == 2
    star = fx.star3()
    assert valence(star, "c") == 3
    assert valence(star, "l1") == 1
    with pytest.raises(UnknownVertex):
        valence(star, "zz")


def test_genus():
    assert genus(fx.star3()) == 0
    assert genus(fx.lollipop_graph()) == 1
    assert genus(fx.barbell_graph()) == 2
    assert genus(fx.cycle4()) == 1


def test_canonical_divisors():
    # the leaf of the lollipop gets -1 here; the metric version drops it
    assert canonical_divisor(fx.lollipop_graph()).to_dict() == {"v": 1, "u": -1}
    assert canonical_divisor(fx.barbell_graph()).to_dict() == {"v1": 1, "v2": 1}
    assert canonical_divisor(fx.single_loop()).to_dict() == {"v": 0}


@given(st.integers(0, 10_000))
def test_handshake_and_canonical_degree(seed):
    g = random_multigraph(rng(seed))
    assert sum(g.valences()) == 2 * len(g.edges)
    assert canonical_divisor(g).degree() == 2 * genus(g) - 2


@given(st.integers(0, 10_000))
def test_relabel_invariance(seed):
    r = rng(seed)
    g = random_multigraph(r)
    names = [f"w{i}" for i in range(g.n)]
    r.shuffle(names)
    h = g.relabel(dict(zip(g.vertices, names)))
    assert genus(h) == genus(g)
    assert sorted(h.valences()) == sorted(g.valences())
    for v, w in zip(g.vertices, names):
        assert h.valence(w) == g.valence(v)
