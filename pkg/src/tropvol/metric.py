"""Compact tropical curves: metric multigraphs with rational edge lengths.

Points are addressed as (edge, offset) and canonicalized so that a vertex has a
single representation. Piecewise-linear functions are stored as per-edge
breakpoint lists; their divisors use the convention that the order at a point
is minus the sum of outgoing slopes.
"""

import threading
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import NamedTuple, Optional

from . import divisor as comb
from .divisor import Divisor, format_terms
from .errors import (GraphMismatch, InvalidFunction, InvalidLength, InvalidPoint,
                     ScheduleError, UnknownEdge)
from .multigraph import Multigraph
from .rational import fmt, to_fraction

MAX_ROUNDS = 10**6


@dataclass(frozen=True)
class Point:
    """A point of a metric graph: either a vertex id, or an edge index with an interior offset."""

    vertex: Optional[str] = None
    edge: Optional[int] = None
    offset: Optional[Fraction] = None

    @property
    def is_vertex(self):
        return self.vertex is not None

    def __repr__(self):
        if self.is_vertex:
            return f"Point({self.vertex})"
        return f"Point(e{self.edge}@{fmt(self.offset)})"


class MetricGraph:
    """A multigraph whose edges carry positive rational lengths."""

    __slots__ = ("graph", "lengths", "edge_ids", "tails", "heads", "_eindex", "_key",
                 "_dist", "_core", "_lock")

    def __init__(self, graph, lengths, edge_ids=None):
        if edge_ids is None:
            edge_ids = [f"e{i}" for i in range(len(graph.edges))]
        edge_ids = tuple(str(e) for e in edge_ids)
        if len(edge_ids) != len(graph.edges) or len(set(edge_ids)) != len(edge_ids):
            raise UnknownEdge("edge ids must be unique, one per edge")
        if isinstance(lengths, dict):
            missing = [e for e in edge_ids if e not in lengths]
            if missing:
                raise InvalidLength(f"missing lengths for edges {missing}")
            lengths = [lengths[e] for e in edge_ids]
        lengths = tuple(to_fraction(x) for x in lengths)
        if len(lengths) != len(graph.edges):
            raise InvalidLength("one length per edge is required")
        if any(x <= 0 for x in lengths):
            raise InvalidLength("edge lengths must be positive")
        self.graph = graph
        self.lengths = lengths
        self.edge_ids = edge_ids
        self.tails = tuple(graph.index(a) for a, _ in graph.edges)
        self.heads = tuple(graph.index(b) for _, b in graph.edges)
        self._eindex = {e: i for i, e in enumerate(edge_ids)}
        self._key = (graph, lengths, edge_ids)
        self._dist = None
        self._core = None
        self._lock = threading.Lock()

    @classmethod
    def build(cls, vertices, edges, lengths=None, edge_ids=None):
        graph = Multigraph(vertices, edges)
        if lengths is None:
            lengths = [1] * len(graph.edges)
        return cls(graph, lengths, edge_ids)

    def __eq__(self, other):
        return isinstance(other, MetricGraph) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"MetricGraph({self.graph!r}, lengths={[fmt(x) for x in self.lengths]})"

    @property
    def vertices(self):
        return self.graph.vertices

    @property
    def n_edges(self):
        return len(self.lengths)

    def edge_index(self, ref):
        if isinstance(ref, int) and not isinstance(ref, bool):
            if 0 <= ref < self.n_edges:
                return ref
        elif ref in self._eindex:
            return self._eindex[ref]
        raise UnknownEdge(f"unknown edge {ref!r}")

    def is_loop(self, e):
        return self.tails[e] == self.heads[e]

    def valence(self, v):
        return self.graph.valence(v)

    # points

    def point(self, edge, offset):
        e = self.edge_index(edge)
        t = to_fraction(offset)
        L = self.lengths[e]
        if t < 0 or t > L:
            raise InvalidPoint(f"offset {fmt(t)} outside [0, {fmt(L)}] on edge {self.edge_ids[e]}")
        if t == 0:
            return Point(vertex=self.graph.vertices[self.tails[e]])
        if t == L:
            return Point(vertex=self.graph.vertices[self.heads[e]])
        return Point(edge=e, offset=t)

    def vertex_point(self, v):
        self.graph.index(v)
        return Point(vertex=v)

    def check_point(self, p):
        if p.is_vertex:
            self.graph.index(p.vertex)
        elif p.edge is None or not (0 <= p.edge < self.n_edges) or not (0 < p.offset < self.lengths[p.edge]):
            raise InvalidPoint(f"{p!r} is not a canonical point of this graph")
        return p

    def point_key(self, p):
        if p.is_vertex:
            return (0, self.graph.index(p.vertex), Fraction(0))
        return (1, p.edge, p.offset)

    def locate(self, p):
        """Some (edge, offset) pair representing ``p``; None for an isolated vertex."""
        if not p.is_vertex:
            return p.edge, p.offset
        i = self.graph.index(p.vertex)
        for e in range(self.n_edges):
            if self.tails[e] == i:
                return e, Fraction(0)
            if self.heads[e] == i:
                return e, self.lengths[e]
        return None

    def directions(self, p):
        """Tangent directions at ``p`` as (edge, sign); sign +1 points toward larger offsets."""
        if not p.is_vertex:
            return [(p.edge, 1), (p.edge, -1)]
        i = self.graph.index(p.vertex)
        out = []
        for e in range(self.n_edges):
            if self.tails[e] == i:
                out.append((e, 1))
            if self.heads[e] == i:
                out.append((e, -1))
        return out

    # metric

    def vertex_distances(self):
        if self._dist is None:
            n = self.graph.n
            inf = None
            dist = [[inf] * n for _ in range(n)]
            for i in range(n):
                dist[i][i] = Fraction(0)
            for e in range(self.n_edges):
                a, b, L = self.tails[e], self.heads[e], self.lengths[e]
                if dist[a][b] is None or L < dist[a][b]:
                    dist[a][b] = dist[b][a] = L
            for k in range(n):
                dk = dist[k]
                for i in range(n):
                    dik = dist[i][k]
                    if dik is None:
                        continue
                    di = dist[i]
                    for j in range(n):
                        if dk[j] is not None and (di[j] is None or dik + dk[j] < di[j]):
                            di[j] = dik + dk[j]
            with self._lock:
                self._dist = tuple(tuple(r) for r in dist)
        return self._dist

    def _anchors(self, p):
        if p.is_vertex:
            return [(self.graph.index(p.vertex), Fraction(0))]
        e, t = p.edge, p.offset
        return [(self.tails[e], t), (self.heads[e], self.lengths[e] - t)]

    def distance(self, p, q):
        self.check_point(p)
        self.check_point(q)
        if p == q:
            return Fraction(0)
        dist = self.vertex_distances()
        best = None
        if not p.is_vertex and not q.is_vertex and p.edge == q.edge:
            best = abs(p.offset - q.offset)
        for i, a in self._anchors(p):
            for j, b in self._anchors(q):
                cand = a + dist[i][j] + b
                if best is None or cand < best:
                    best = cand
        return best

    def scaled(self, factor):
        factor = to_fraction(factor)
        return MetricGraph(self.graph, [factor * x for x in self.lengths], self.edge_ids)

    def core(self):
        """The minimal model: valence-2 vertices smoothed into longer edges."""
        if self._core is None:
            core = CoreModel(self)
            with self._lock:
                self._core = core
        return self._core

    def to_json(self):
        out = self.graph.to_json()
        out["lengths"] = {e: fmt(x) for e, x in zip(self.edge_ids, self.lengths)}
        if self.edge_ids != tuple(f"e{i}" for i in range(self.n_edges)):
            out["edge_ids"] = list(self.edge_ids)
        return out


def path_distance(gamma, p, q):
    return gamma.distance(p, q)


class MetricDivisor:
    """Finitely supported integer combination of points of a metric graph (immutable)."""

    __slots__ = ("gamma", "terms")

    def __init__(self, gamma, terms=None):
        clean = {}
        items = terms.items() if isinstance(terms, dict) else (terms or ())
        for p, c in items:
            if isinstance(p, str):
                p = gamma.vertex_point(p)
            gamma.check_point(p)
            clean[p] = clean.get(p, 0) + int(c)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "terms", {p: c for p, c in clean.items() if c})

    def __setattr__(self, name, value):
        raise AttributeError("MetricDivisor is immutable")

    @classmethod
    def from_divisor(cls, gamma, D):
        if D.graph != gamma.graph:
            raise GraphMismatch("divisor is not on the underlying graph")
        return cls(gamma, {Point(vertex=v): c for v, c in zip(D.graph.vertices, D.coeffs) if c})

    def _check(self, other):
        if not isinstance(other, MetricDivisor):
            return False
        if other.gamma != self.gamma:
            raise GraphMismatch("divisors live on different metric graphs")
        return True

    def __add__(self, other):
        if not self._check(other):
            return NotImplemented
        out = dict(self.terms)
        for p, c in other.terms.items():
            out[p] = out.get(p, 0) + c
        return MetricDivisor(self.gamma, out)

    def __sub__(self, other):
        if not self._check(other):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return MetricDivisor(self.gamma, {p: -c for p, c in self.terms.items()})

    def __mul__(self, k):
        return MetricDivisor(self.gamma, {p: k * c for p, c in self.terms.items()})

    __rmul__ = __mul__

    def __getitem__(self, p):
        if isinstance(p, str):
            p = Point(vertex=p)
        return self.terms.get(p, 0)

    def __eq__(self, other):
        return isinstance(other, MetricDivisor) and self.gamma == other.gamma and self.terms == other.terms

    def __hash__(self):
        return hash((self.gamma, frozenset(self.terms.items())))

    def __repr__(self):
        return f"MetricDivisor({format_terms((repr(p)[6:-1], c) for p, c in self.items())})"

    def items(self):
        return sorted(self.terms.items(), key=lambda pc: self.gamma.point_key(pc[0]))

    def support(self):
        return [p for p, _ in self.items()]

    def degree(self):
        return sum(self.terms.values())

    def is_effective(self):
        return all(c > 0 for c in self.terms.values())

    def positive_part(self):
        return MetricDivisor(self.gamma, {p: c for p, c in self.terms.items() if c > 0})

    def negative_part(self):
        return MetricDivisor(self.gamma, {p: c for p, c in self.terms.items() if c < 0})

    def restrict(self, keep):
        return MetricDivisor(self.gamma, {p: c for p, c in self.terms.items() if keep(p)})

    def on_vertices(self):
        return self.restrict(lambda p: p.is_vertex)

    def on_edge_interior(self, e):
        return self.restrict(lambda p: not p.is_vertex and p.edge == e)


def _simplify(xs, ys):
    """Drop breakpoints where the slope does not change."""
    if len(xs) <= 2:
        return tuple(xs), tuple(ys)
    ox, oy = [xs[0]], [ys[0]]
    for k in range(1, len(xs) - 1):
        s_in = (ys[k] - oy[-1]) / (xs[k] - ox[-1])
        s_out = (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k])
        if s_in != s_out:
            ox.append(xs[k])
            oy.append(ys[k])
    ox.append(xs[-1])
    oy.append(ys[-1])
    return tuple(ox), tuple(oy)


class PLFunction:
    """Continuous piecewise-linear function with integer slopes on a metric graph.

    ``pieces`` maps each edge (index or id) to a list of ``(offset, value)``
    breakpoints covering ``[0, length]``. On an edgeless graph pass ``constant``.
    Stored in simplified form, so equal functions compare equal.
    """

    __slots__ = ("gamma", "pieces", "_base")

    def __init__(self, gamma, pieces, constant=0):
        raw = {}
        for ref, bps in dict(pieces).items():
            e = gamma.edge_index(ref)
            pts = sorted((to_fraction(x), to_fraction(y)) for x, y in bps)
            raw[e] = pts
        out = []
        for e in range(gamma.n_edges):
            if e not in raw:
                raise InvalidFunction(f"no breakpoints given for edge {gamma.edge_ids[e]}")
            pts = raw[e]
            xs = [x for x, _ in pts]
            ys = [y for _, y in pts]
            if len(xs) < 2 or xs[0] != 0 or xs[-1] != gamma.lengths[e]:
                raise InvalidFunction(f"breakpoints on {gamma.edge_ids[e]} must span the whole edge")
            for k in range(len(xs) - 1):
                if xs[k + 1] <= xs[k]:
                    raise InvalidFunction("breakpoint offsets must be strictly increasing")
                slope = (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k])
                if slope.denominator != 1:
                    raise InvalidFunction(f"non-integer slope {fmt(slope)} on {gamma.edge_ids[e]}")
            out.append(_simplify(xs, ys))
        values = {}
        for e, (xs, ys) in enumerate(out):
            for vi, y in ((gamma.tails[e], ys[0]), (gamma.heads[e], ys[-1])):
                if values.setdefault(vi, y) != y:
                    raise InvalidFunction(f"discontinuity at vertex {gamma.vertices[vi]}")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "pieces", tuple(out))
        object.__setattr__(self, "_base", to_fraction(constant) if not out else out[0][1][0])

    def __setattr__(self, name, value):
        raise AttributeError("PLFunction is immutable")

    @classmethod
    def constant(cls, gamma, c=0):
        c = to_fraction(c)
        return cls(gamma, {e: [(0, c), (gamma.lengths[e], c)] for e in range(gamma.n_edges)}, c)

    @classmethod
    def from_edge_slopes(cls, gamma, start_value, pieces):
        """Build from per-edge ``[(offset, slope), ...]`` runs starting at value ``start_value`` on each edge."""
        out = {}
        for ref, runs in pieces.items():
            e = gamma.edge_index(ref)
            y = to_fraction(start_value[ref] if isinstance(start_value, dict) else start_value)
            bps = [(Fraction(0), y)]
            runs = sorted((to_fraction(x), s) for x, s in runs)
            ends = [x for x, _ in runs[1:]] + [gamma.lengths[e]]
            for (x0, s), x1 in zip(runs, ends):
                y += s * (x1 - x0)
                bps.append((x1, y))
            out[e] = bps
        return cls(gamma, out)

    def __eq__(self, other):
        return (isinstance(other, PLFunction) and self.gamma == other.gamma
                and self.pieces == other.pieces and self._base == other._base)

    def __hash__(self):
        return hash((self.gamma, self.pieces, self._base))

    def __repr__(self):
        parts = []
        for e, (xs, ys) in enumerate(self.pieces):
            pts = ", ".join(f"({fmt(x)}, {fmt(y)})" for x, y in zip(xs, ys))
            parts.append(f"{self.gamma.edge_ids[e]}: [{pts}]")
        return "PLFunction({" + "; ".join(parts) + "})"

    def breakpoints(self, e):
        return self.pieces[e][0]

    def value_on_edge(self, e, t):
        xs, ys = self.pieces[e]
        k = bisect_right(xs, t) - 1
        if k >= len(xs) - 1:
            return ys[-1]
        return ys[k] + (ys[k + 1] - ys[k]) * (t - xs[k]) / (xs[k + 1] - xs[k])

    def slope_on_edge(self, e, t, sign=1):
        """Slope (with respect to increasing offset) just after ``t`` (sign +1) or just before it (sign -1)."""
        xs, ys = self.pieces[e]
        if sign > 0:
            k = bisect_right(xs, t) - 1
        else:
            k = bisect_right(xs, t) - 1
            if xs[k] == t:
                k -= 1
        k = max(0, min(k, len(xs) - 2))
        return (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k])

    def value(self, p):
        loc = self.gamma.locate(p)
        if loc is None:
            return self._base
        return self.value_on_edge(*loc)

    def outgoing_slope(self, p, direction):
        e, sign = direction
        if p.is_vertex:
            t = Fraction(0) if sign > 0 else self.gamma.lengths[e]
        else:
            if p.edge != e:
                raise InvalidPoint("direction is not tangent at this point")
            t = p.offset
        return int(sign * self.slope_on_edge(e, t, sign))

    def vertex_values(self):
        return {v: self.value(Point(vertex=v)) for v in self.gamma.vertices}

    def _combine(self, other, op):
        if other.gamma != self.gamma:
            raise GraphMismatch("functions live on different metric graphs")
        out = {}
        for e in range(self.gamma.n_edges):
            xs = sorted(set(self.pieces[e][0]) | set(other.pieces[e][0]))
            out[e] = [(x, op(self.value_on_edge(e, x), other.value_on_edge(e, x))) for x in xs]
        return PLFunction(self.gamma, out, op(self._base, other._base))

    def __add__(self, other):
        if isinstance(other, PLFunction):
            return self._combine(other, lambda a, b: a + b)
        return self.shift(other)

    def __sub__(self, other):
        if isinstance(other, PLFunction):
            return self._combine(other, lambda a, b: a - b)
        return self.shift(-to_fraction(other))

    def __neg__(self):
        return PLFunction(self.gamma, {e: [(x, -y) for x, y in zip(*self.pieces[e])]
                                       for e in range(self.gamma.n_edges)}, -self._base)

    def shift(self, c):
        c = to_fraction(c)
        return PLFunction(self.gamma, {e: [(x, y + c) for x, y in zip(*self.pieces[e])]
                                       for e in range(self.gamma.n_edges)}, self._base + c)

    def normalized(self):
        """Shifted so that the value at the first declared vertex is 0."""
        return self.shift(-self.value(Point(vertex=self.gamma.vertices[0])))

    def equal_up_to_constant(self, other):
        return self.normalized() == other.normalized()

    def to_json(self):
        out = {self.gamma.edge_ids[e]: [[fmt(x), fmt(y)] for x, y in zip(xs, ys)]
               for e, (xs, ys) in enumerate(self.pieces)}
        if not self.pieces:
            return {"constant": fmt(self._base)}
        return {"edges": out}


def pl_div(phi):
    """Divisor of a PL function: the order at p is minus the sum of outgoing slopes."""
    gamma = phi.gamma
    terms = {}
    for v in gamma.vertices:
        p = Point(vertex=v)
        c = -sum(phi.outgoing_slope(p, d) for d in gamma.directions(p))
        if c:
            terms[p] = c
    for e, (xs, ys) in enumerate(phi.pieces):
        for k in range(1, len(xs) - 1):
            left = (ys[k] - ys[k - 1]) / (xs[k] - xs[k - 1])
            right = (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k])
            if left != right:
                terms[Point(edge=e, offset=xs[k])] = int(left - right)
    return MetricDivisor(gamma, terms)


def in_R(D, phi):
    if D.gamma != phi.gamma:
        raise GraphMismatch("divisor and function live on different metric graphs")
    return (D + pl_div(phi)).is_effective()


def canonical_divisor(gamma, include_endpoints=False):
    """Sum of (valence - 2) v over vertices of valence other than 2.

    By default valence-1 endpoints are left out (they are treated as ends of
    the curve rather than genuine vertices); pass ``include_endpoints=True``
    for the full sum, whose degree is ``2g - 2``.
    """
    terms = {}
    for v in gamma.vertices:
        val = gamma.valence(v)
        if val == 2 or (val == 1 and not include_endpoints):
            continue
        terms[Point(vertex=v)] = val - 2
    return MetricDivisor(gamma, terms)


# subdivision models

def lattice_scale(gamma, points=(), refine=1):
    """Smallest integer scale putting all vertices, given points and loop midpoints on a unit lattice."""
    den = 1
    for e, L in enumerate(gamma.lengths):
        den = lcm(den, L.denominator)
        if gamma.is_loop(e):
            den = lcm(den, (L / 2).denominator)
    for p in points:
        if not p.is_vertex:
            den = lcm(den, p.offset.denominator)
    return den * refine


class SubdivisionModel:
    """Loopless multigraph obtained by cutting every edge of ``scale * gamma`` into unit edges."""

    def __init__(self, gamma, scale):
        self.gamma = gamma
        self.scale = scale
        taken = set(gamma.vertices)
        sep = "@"
        while any(sep in v for v in taken):
            sep += "@"
        vertices = list(gamma.vertices)
        edges = []
        self.chains = []
        for e in range(gamma.n_edges):
            steps = gamma.lengths[e] * scale
            if steps.denominator != 1:
                raise InvalidLength("scale does not clear the edge length")
            steps = int(steps)
            if gamma.is_loop(e) and steps < 2:
                raise InvalidLength("scale leaves a loop without a midpoint")
            names = [gamma.vertices[gamma.tails[e]]]
            for k in range(1, steps):
                names.append(f"{gamma.edge_ids[e]}{sep}{k}")
            names.append(gamma.vertices[gamma.heads[e]])
            vertices.extend(names[1:-1])
            edges.extend(zip(names[:-1], names[1:]))
            self.chains.append(tuple(names))
        self.graph = Multigraph(vertices, edges)
        self._points = {}
        for e, names in enumerate(self.chains):
            for k, name in enumerate(names[1:-1], start=1):
                self._points[name] = Point(edge=e, offset=Fraction(k, scale))
        for v in gamma.vertices:
            self._points[v] = Point(vertex=v)

    def vertex_of(self, p):
        if p.is_vertex:
            return p.vertex
        k = p.offset * self.scale
        if k.denominator != 1:
            raise InvalidPoint(f"{p!r} is not a lattice point at scale {self.scale}")
        return self.chains[p.edge][int(k)]

    def point_of(self, name):
        return self._points[name]

    def to_model(self, D):
        if D.gamma != self.gamma:
            raise GraphMismatch("divisor is not on this metric graph")
        coeffs = {}
        for p, c in D.terms.items():
            v = self.vertex_of(p)
            coeffs[v] = coeffs.get(v, 0) + c
        return Divisor(self.graph, coeffs)

    def from_model(self, D):
        return MetricDivisor(self.gamma, {self._points[v]: c
                                          for v, c in zip(self.graph.vertices, D.coeffs) if c})

    def function_from_potential(self, g):
        """PL function taking value ``g(v) / scale`` at every lattice vertex, linear in between.

        Its divisor on the curve is the model Laplacian of ``g``.
        """
        idx = self.graph.index
        pieces = {}
        for e, names in enumerate(self.chains):
            pieces[e] = [(Fraction(k, self.scale), Fraction(g[idx(v)], self.scale))
                         for k, v in enumerate(names)]
        return PLFunction(self.gamma, pieces, Fraction(g[0], self.scale))


@lru_cache(maxsize=128)
def _model(gamma, scale):
    return SubdivisionModel(gamma, scale)


class ModelView(NamedTuple):
    graph: Multigraph
    divisor: Optional[Divisor]
    scale: int
    model: SubdivisionModel


def subdivision_model(gamma, divisor=None, refine=1, extra_points=()):
    points = list(extra_points)
    if divisor is not None:
        points += divisor.support()
    scale = lattice_scale(gamma, points, refine)
    model = _model(gamma, scale)
    return ModelView(model.graph, None if divisor is None else model.to_model(divisor), scale, model)


def metric_bn_rank(D, refine=False):
    """Baker-Norine rank on the curve, computed on a loopless lattice model.

    For a loopless model containing the support, the combinatorial rank equals
    the rank on the curve, so the plain model is exact. ``refine=True``
    additionally multiplies the lattice scale by ``deg(D) + 1``.
    """
    factor = max(D.degree(), 0) + 1 if refine else 1
    view = subdivision_model(D.gamma, D, refine=factor)
    return comb.bn_rank(view.divisor)


def metric_linearly_equivalent(D1, D2):
    if D1.gamma != D2.gamma:
        raise GraphMismatch("divisors live on different metric graphs")
    if D1.degree() != D2.degree():
        return False
    view = subdivision_model(D1.gamma, D1, extra_points=D2.support())
    return comb.linearly_equivalent(view.divisor, view.model.to_model(D2))


def metric_has_effective(D):
    return comb.has_effective(subdivision_model(D.gamma, D).divisor)


def metric_euler_char(D, canonical=None):
    K = canonical_divisor(D.gamma) if canonical is None else canonical
    return metric_bn_rank(D) - metric_bn_rank(K - D)


# minimal model and the effectivization moves

class CoreModel:
    """The curve re-cut at its vertices of valence other than 2.

    A cycle with no such vertex keeps its first declared vertex as base point.
    ``to_core``/``from_core`` translate points and divisors between the two
    descriptions of the same metric space.
    """

    def __init__(self, gamma):
        self.gamma = gamma
        g = gamma.graph
        keep = [v for v in g.vertices if g.valence(v) != 2]
        if not keep:
            keep = [g.vertices[0]]
        keep_set = set(keep)
        incident = {v: [] for v in g.vertices}
        for e in range(gamma.n_edges):
            incident[g.vertices[gamma.tails[e]]].append((e, 1))
            incident[g.vertices[gamma.heads[e]]].append((e, -1))
        used = set()
        chains = []
        for v in keep:
            for e, s in incident[v]:
                if e in used:
                    continue
                chain = []
                cur_e, cur_s = e, s
                while True:
                    used.add(cur_e)
                    chain.append((cur_e, cur_s))
                    end = gamma.heads[cur_e] if cur_s > 0 else gamma.tails[cur_e]
                    w = g.vertices[end]
                    if w in keep_set:
                        break
                    nxt = [(f, t) for f, t in incident[w] if f not in used]
                    if not nxt:
                        break
                    cur_e, cur_s = nxt[0]
                chains.append((v, w, chain))
        edges, lengths, ids = [], [], []
        self._where = {}
        self._inner = {}
        for c, (a, b, chain) in enumerate(chains):
            cum = Fraction(0)
            for k, (e, s) in enumerate(chain):
                if k:
                    end = gamma.tails[e] if s > 0 else gamma.heads[e]
                    self._inner[g.vertices[end]] = (c, cum)
                self._where[e] = (c, cum, s)
                cum += gamma.lengths[e]
            edges.append((a, b))
            lengths.append(cum)
            ids.append(gamma.edge_ids[chain[0][0]] if len(chain) == 1 and chain[0][1] > 0
                       else "+".join(gamma.edge_ids[e] for e, _ in chain))
        self.chains = [chain for _, _, chain in chains]
        self.curve = MetricGraph(Multigraph(keep, edges), lengths, ids)

    def to_core(self, obj):
        if isinstance(obj, MetricDivisor):
            return MetricDivisor(self.curve, {self.to_core(p): c for p, c in obj.terms.items()})
        p = obj
        if p.is_vertex:
            if p.vertex in self._inner:
                c, cum = self._inner[p.vertex]
                return self.curve.point(c, cum)
            return Point(vertex=p.vertex)
        c, cum, s = self._where[p.edge]
        t = p.offset if s > 0 else self.gamma.lengths[p.edge] - p.offset
        return self.curve.point(c, cum + t)

    def from_core(self, obj):
        if isinstance(obj, MetricDivisor):
            return MetricDivisor(self.gamma, {self.from_core(p): c for p, c in obj.terms.items()})
        p = obj
        if p.is_vertex:
            return Point(vertex=p.vertex)
        cum = Fraction(0)
        for e, s in self.chains[p.edge]:
            L = self.gamma.lengths[e]
            if p.offset <= cum + L:
                t = p.offset - cum
                return self.gamma.point(e, t if s > 0 else L - t)
            cum += L
        raise InvalidPoint("offset beyond the end of the chain")


def constant_c(gamma):
    core = gamma.core().curve
    return 2 * (core.graph.n + 1) * (core.n_edges + 1)


def _vertex_mass(F):
    return sum(c for p, c in F.terms.items() if p.is_vertex)


def fe_move(F, e):
    """One degree-concentration move on edge ``e`` (an edge of ``F``'s own graph).

    Let p1, p2 be the positive interior points closest to the two ends, at
    distances s1 <= s2 from their ends v1, v2 (ties go to the smaller vertex
    id). The returned function has slope -1 from v1 to p1, slope +1 from p2
    for length s1, and is constant elsewhere. Returns ``(new divisor, f, div f)``.
    """
    gamma = F.gamma
    e = gamma.edge_index(e)
    L = gamma.lengths[e]
    pos = sorted(p.offset for p, c in F.terms.items()
                 if c > 0 and not p.is_vertex and p.edge == e for _ in range(c))
    if len(pos) < 2:
        raise ValueError("the move needs at least two positive interior chips on the edge")
    first, last = pos[0], pos[-1]
    s_tail, s_head = first, L - last
    tail_id = gamma.vertices[gamma.tails[e]]
    head_id = gamma.vertices[gamma.heads[e]]
    forward = s_tail < s_head or (s_tail == s_head and tail_id <= head_id)
    if forward:
        x1, x2 = first, last
        s1 = s_tail
        bps = [(0, 0), (x1, -x1), (x2, -x1), (x2 + s1, 0), (L, 0)]
        v1 = Point(vertex=tail_id)
        tilde = gamma.point(e, x2 + s1)
    else:
        # mirror image: v1 is the head end
        x1, x2 = last, first
        s1 = s_head
        bps = [(0, 0), (x2 - s1, 0), (x2, -s1), (x1, -s1), (L, 0)]
        v1 = Point(vertex=head_id)
        tilde = gamma.point(e, x2 - s1)
    dedup = {}
    for x, y in bps:
        dedup[Fraction(x)] = Fraction(y)
    pieces = {k: [(0, 0), (gamma.lengths[k], 0)] for k in range(gamma.n_edges)}
    pieces[e] = sorted(dedup.items())
    f = PLFunction(gamma, pieces)
    claimed = MetricDivisor(gamma, [(v1, 1), (gamma.point(e, x1), -1), (gamma.point(e, x2), -1), (tilde, 1)])
    if pl_div(f) != claimed:
        raise ScheduleError(f"concentration move on {gamma.edge_ids[e]} broke its divisor identity")
    return F + claimed, f, claimed


def _interior_positive(F, e):
    return sum(c for p, c in F.terms.items() if c > 0 and not p.is_vertex and p.edge == e)


def _concentrate(F, max_moves=MAX_ROUNDS):
    gamma = F.gamma
    moves = 0
    while True:
        todo = next((e for e in range(gamma.n_edges) if _interior_positive(F, e) >= 2), None)
        if todo is None:
            return F
        if moves >= max_moves:
            raise ScheduleError(f"degree concentration exceeded {max_moves} moves")
        before = _vertex_mass(F)
        F = fe_move(F, todo)[0]
        if _vertex_mass(F) < before:
            raise ScheduleError("concentration move lowered the degree on vertices")
        moves += 1


def concentrate_degree(F):
    """Equivalent divisor with at most one positive chip inside each edge of the minimal model."""
    core = F.gamma.core()
    return core.from_core(_concentrate(core.to_core(F)))


def fv_move(F, fire):
    """Fire the vertices in ``fire`` simultaneously on ``F``'s own graph.

    Each firing vertex v sends one chip along every tangent direction, to
    distance s_v: the distance to the nearest other vertex or negative point,
    capped at half of each loop at v. Returns ``(new divisor, f, div f)``
    where f is the sum of the individual functions.
    """
    gamma = F.gamma
    negatives = [p for p, c in F.terms.items() if c < 0 and not p.is_vertex]
    total = PLFunction.constant(gamma, 0)
    claimed = MetricDivisor(gamma)
    for v in fire:
        vi = gamma.graph.index(v)
        reach = []
        dirs = gamma.directions(Point(vertex=v))
        for e, s in dirs:
            L = gamma.lengths[e]
            hits = [L]
            if gamma.is_loop(e):
                hits.append(L / 2)
            for p in negatives:
                if p.edge == e:
                    hits.append(p.offset if s > 0 else L - p.offset)
                    if gamma.is_loop(e):
                        hits.append(L - p.offset if s > 0 else p.offset)
            reach.append(min(hits))
        s_v = min(reach)
        pieces = {}
        for e in range(gamma.n_edges):
            L = gamma.lengths[e]
            at_tail = gamma.tails[e] == vi
            at_head = gamma.heads[e] == vi
            if at_tail and at_head:
                bps = {0: 0, s_v: s_v, L - s_v: s_v, L: 0}
            elif at_tail:
                bps = {0: 0, s_v: s_v, L: s_v}
            elif at_head:
                bps = {0: s_v, L - s_v: s_v, L: 0}
            else:
                bps = {0: s_v, L: s_v}
            pieces[e] = sorted(bps.items())
        f = PLFunction(gamma, pieces)
        part = MetricDivisor(gamma, [(Point(vertex=v), -gamma.valence(v))]
                             + [(gamma.point(e, s_v if s > 0 else gamma.lengths[e] - s_v), 1)
                                for e, s in dirs])
        if pl_div(f) != part:
            raise ScheduleError(f"firing move at {v} broke its divisor identity")
        total = total + f
        claimed = claimed + part
    if pl_div(total) != claimed:
        raise ScheduleError("simultaneous firing moves broke their divisor identity")
    return F + claimed, total, claimed


class MetricEffectivization(NamedTuple):
    found: bool
    representative: MetricDivisor
    rounds: int


def metric_effectivize(D, max_rounds=MAX_ROUNDS):
    """Effective divisor equivalent to ``D`` on a curve.

    At degree at least ``constant_c`` this alternates degree concentration with
    simultaneous firing of every vertex holding at least its valence, checking
    after each firing that fired vertices stay nonnegative and do not grow and
    that negative vertices do not shrink. Below that degree the reduced form on
    a lattice model decides.
    """
    gamma = D.gamma
    if not D.negative_part().terms:
        return MetricEffectivization(True, D, 0)
    if D.degree() < 0:
        return MetricEffectivization(False, D, 0)
    if D.degree() < constant_c(gamma):
        view = subdivision_model(gamma, D)
        red = comb.reduce(view.divisor)
        rep = view.model.from_model(red)
        return MetricEffectivization(red.coeffs[0] >= 0, rep, 0)
    core = gamma.core()
    cg = core.curve
    F = _concentrate(core.to_core(D))
    rounds = 0
    while F.negative_part().terms:
        if rounds >= max_rounds:
            raise ScheduleError(f"effectivization exceeded {max_rounds} rounds")
        fire = [v for v in cg.vertices if F[v] >= cg.valence(v)]
        if not fire:
            raise ScheduleError("no vertex can fire; the degree is too small for the schedule")
        G = fv_move(F, fire)[0]
        for v in cg.vertices:
            if v in fire and not 0 <= G[v] <= F[v]:
                raise ScheduleError(f"fired vertex {v} left the range [0, {F[v]}]")
            if F[v] < 0 and G[v] < F[v]:
                raise ScheduleError(f"negative vertex {v} lost chips")
        F = _concentrate(G)
        rounds += 1
    return MetricEffectivization(True, core.from_core(F), rounds)
