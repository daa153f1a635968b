"""Small named graphs and curves used throughout the tests, the CLI and the README."""

from fractions import Fraction

from .divisor import Divisor
from .metric import MetricDivisor, MetricGraph
from .multigraph import Multigraph
from .specialization import PointMap, TropPoly2


def cycle4():
    return Multigraph(["v0", "v1", "v2", "v3"],
                      [("v0", "v1"), ("v1", "v2"), ("v2", "v3"), ("v3", "v0")])


def cycle4_start():
    """The starting divisor of the worked effectivization: 80v0 - 10v1 - 10v2 - 10v3."""
    return Divisor(cycle4(), [80, -10, -10, -10])


def star3():
    return Multigraph(["c", "l1", "l2", "l3"], [("c", "l1"), ("c", "l2"), ("c", "l3")])


def triangle():
    return Multigraph(["a", "b", "c"], [("a", "b"), ("b", "c"), ("c", "a")])


def single_loop():
    return Multigraph(["v"], [("v", "v")])


def lollipop_graph():
    return Multigraph(["v", "u"], [("v", "v"), ("v", "u")])


def barbell_graph():
    return Multigraph(["v1", "v2"], [("v1", "v1"), ("v1", "v2"), ("v2", "v2")])


def lollipop(loop=1, bridge=1):
    """Loop at ``v`` with a bridge to the leaf ``u``."""
    return MetricGraph(lollipop_graph(), [loop, bridge])


def barbell(loop1=1, bridge=1, loop2=1):
    return MetricGraph(barbell_graph(), [loop1, bridge, loop2])


def one_edge(length=1):
    return MetricGraph.build(["v0", "v1"], [("v0", "v1")], [length])


def two_edge(left=1, right=1):
    """Path v1 - v - v2; the middle vertex is ``v``."""
    return MetricGraph.build(["v1", "v", "v2"], [("v1", "v"), ("v", "v2")], [left, right])


def conic_segment():
    """Single segment starting at v_y."""
    return MetricGraph.build(["v_y", "v_x"], [("v_y", "v_x")], [1])


def conic_map():
    g = conic_segment()
    return PointMap(g, {"P": g.vertex_point("v_y"), "Q": g.vertex_point("v_y")})


def conic_divisor():
    return {"P": 1, "Q": 1}


def elliptic_triangle():
    return MetricGraph.build(["v_x", "v_y", "v_z"],
                             [("v_x", "v_y"), ("v_y", "v_z"), ("v_z", "v_x")], [1, 1, 1])


def elliptic_w(gamma=None):
    gamma = gamma or elliptic_triangle()
    return gamma.point(0, Fraction(1, 2))


def elliptic_map():
    g = elliptic_triangle()
    w = elliptic_w(g)
    return PointMap(g, {"P+": w, "P-": w, "Pinf": g.vertex_point("v_z")})


def elliptic_divisor():
    return {"P+": 1, "P-": 1, "Pinf": 1}


def elliptic_polynomial():
    """min{1 + 3x, 1 + 3y, 1, x + y}."""
    return TropPoly2([(1, 3, 0), (1, 0, 3), (1, 0, 0), (0, 1, 1)])


def metric_vertex_divisor(gamma, coeffs):
    return MetricDivisor(gamma, {gamma.vertex_point(v): c for v, c in coeffs.items()})


MULTIGRAPHS = {
    "cycle4": cycle4,
    "star3": star3,
    "triangle": triangle,
    "single_loop": single_loop,
    "lollipop": lollipop_graph,
    "barbell": barbell_graph,
}

CURVES = {
    "lollipop": lollipop,
    "barbell": barbell,
    "one_edge": one_edge,
    "two_edge": two_edge,
    "conic": conic_segment,
    "elliptic": elliptic_triangle,
}
