"""Divisors on multigraphs: chip-firing, reduced forms, rank and effectivization."""

import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from .errors import GraphMismatch, ScheduleError, UnknownVertex

MAX_ROUNDS = 10**6


class Divisor:
    """Integer chip configuration on the vertices of a multigraph (immutable)."""

    __slots__ = ("graph", "coeffs")

    def __init__(self, graph, coeffs=None):
        if coeffs is None:
            vec = (0,) * graph.n
        elif isinstance(coeffs, dict):
            vec = [0] * graph.n
            for v, c in coeffs.items():
                vec[graph.index(v)] += int(c)
            vec = tuple(vec)
        else:
            vec = tuple(int(c) for c in coeffs)
            if len(vec) != graph.n:
                raise UnknownVertex(f"expected {graph.n} coefficients, got {len(vec)}")
        object.__setattr__(self, "graph", graph)
        object.__setattr__(self, "coeffs", vec)

    def __setattr__(self, name, value):
        raise AttributeError("Divisor is immutable")

    @classmethod
    def vertex(cls, graph, v, mult=1):
        return cls(graph, {v: mult})

    def _same(self, other):
        if not isinstance(other, Divisor):
            return False
        if other.graph != self.graph:
            raise GraphMismatch("divisors live on different graphs")
        return True

    def __add__(self, other):
        if not self._same(other):
            return NotImplemented
        return Divisor(self.graph, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        if not self._same(other):
            return NotImplemented
        return Divisor(self.graph, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return Divisor(self.graph, [-a for a in self.coeffs])

    def __mul__(self, k):
        return Divisor(self.graph, [k * a for a in self.coeffs])

    __rmul__ = __mul__

    def __getitem__(self, v):
        return self.coeffs[self.graph.index(v)]

    def __eq__(self, other):
        return isinstance(other, Divisor) and self.graph == other.graph and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.graph, self.coeffs))

    def __repr__(self):
        return f"Divisor({format_terms(zip(self.graph.vertices, self.coeffs))})"

    def degree(self):
        return sum(self.coeffs)

    def is_effective(self):
        return all(c >= 0 for c in self.coeffs)

    def positive_part(self):
        return Divisor(self.graph, [max(c, 0) for c in self.coeffs])

    def negative_part(self):
        """The anti-effective part, so that ``D == D.positive_part() + D.negative_part()``."""
        return Divisor(self.graph, [min(c, 0) for c in self.coeffs])

    def full_set(self):
        """Vertices holding at least as many chips as their valence."""
        val = self.graph.valences()
        return tuple(v for v, c, d in zip(self.graph.vertices, self.coeffs, val) if c >= d)

    def negative_set(self):
        return tuple(v for v, c in zip(self.graph.vertices, self.coeffs) if c < 0)

    def to_dict(self):
        return {v: c for v, c in zip(self.graph.vertices, self.coeffs)}


def format_terms(pairs):
    out = ""
    for label, c in pairs:
        if not c:
            continue
        sign = "-" if c < 0 else "+"
        mag = "" if abs(c) == 1 else f"{abs(c)}"
        out += f" {sign} {mag}{label}" if out else f"{'-' if c < 0 else ''}{mag}{label}"
    return out or "0"


def _fire_vec(graph, vec, members, times=1):
    out = list(vec)
    for i in members:
        for j, m in graph.neighbours(i):
            if j not in members:
                out[i] -= times * m
                out[j] += times * m
    return out


def fire_set(D, S):
    """Fire once from every vertex of ``S``; chips exchanged inside ``S`` cancel."""
    members = frozenset(D.graph.index(v) for v in S)
    return Divisor(D.graph, _fire_vec(D.graph, D.coeffs, members))


class _Reducer:
    """Dhar burning reduction on the loop-free part of a graph."""

    def __init__(self, graph):
        self.graph = graph
        self.n = graph.n
        self.nbrs = [graph.neighbours(i) for i in range(self.n)]
        self.deg = [sum(m for _, m in nb) for nb in self.nbrs]
        self._trees = {}
        self._lock = threading.Lock()

    def _tree(self, q):
        tree = self._trees.get(q)
        if tree is None:
            dist, parent = self.graph.bfs_tree(q)
            order = sorted((i for i in range(self.n) if i != q), key=lambda i: -dist[i])
            pmult = [0] * self.n
            for i in order:
                pmult[i] = dict(self.nbrs[i])[parent[i]]
            tree = (order, parent, pmult)
            with self._lock:
                self._trees[q] = tree
        return tree

    def reduce(self, vec, q, record=None):
        """Return the q-reduced vector equivalent to ``vec``.

        ``record`` (a list) receives ``(fired index set, times)`` pairs for every
        bulk firing performed, in order.
        """
        nbrs = self.nbrs
        d = list(vec)
        order, parent, pmult = self._tree(q)
        # make everything away from q nonnegative, far vertices first
        for i in order:
            if d[i] < 0:
                p = parent[i]
                k = (-d[i] + pmult[i] - 1) // pmult[i]
                d[p] -= k * self.deg[p]
                for j, m in nbrs[p]:
                    d[j] += k * m
                if record is not None:
                    record.append((frozenset((p,)), k))
        n = self.n
        while True:
            burnt = [False] * n
            burnt[q] = True
            threat = [0] * n
            stack = [q]
            while stack:
                u = stack.pop()
                for j, m in nbrs[u]:
                    if not burnt[j]:
                        threat[j] += m
                        if threat[j] > d[j]:
                            burnt[j] = True
                            stack.append(j)
            unburnt = [i for i in range(n) if not burnt[i]]
            if not unburnt:
                return d
            k = min(d[i] // threat[i] for i in unburnt if threat[i])
            for i in unburnt:
                for j, m in nbrs[i]:
                    if burnt[j]:
                        d[i] -= k * m
                        d[j] += k * m
            if record is not None:
                record.append((frozenset(unburnt), k))

    def jacobian_order(self):
        """Number of spanning trees, via an integer-exact Bareiss determinant."""
        n = self.n
        if n == 1:
            return 1
        mat = []
        for i in range(1, n):
            row = [0] * (n - 1)
            row[i - 1] = self.deg[i]
            for j, m in self.nbrs[i]:
                if j:
                    row[j - 1] -= m
            mat.append(row)
        size = n - 1
        prev = 1
        sign = 1
        for k in range(size - 1):
            if mat[k][k] == 0:
                swap = next((r for r in range(k + 1, size) if mat[r][k]), None)
                if swap is None:
                    return 0
                mat[k], mat[swap] = mat[swap], mat[k]
                sign = -sign
            for i in range(k + 1, size):
                for j in range(k + 1, size):
                    mat[i][j] = (mat[i][j] * mat[k][k] - mat[i][k] * mat[k][j]) // prev
            prev = mat[k][k]
        return sign * mat[size - 1][size - 1]


class _RankData:
    """Per-graph rank machinery.

    Level ``k`` holds the reduced forms of every effective class of degree
    ``k``. Once a level contains every class of the Picard torsor, each class
    of that degree or more is effective, so deeper levels are never built.
    """

    def __init__(self, graph):
        self.graph = graph
        self.reducer = _Reducer(graph.without_loops())
        self.q = 0
        self.jac = self.reducer.jacobian_order()
        self.levels = [{self._key((0,) * graph.n): (0,) * graph.n}]
        while len(self.levels[-1]) < self.jac:
            prev = self.levels[-1]
            nxt = {}
            for key, rep in prev.items():
                for i in range(graph.n):
                    vec = list(key)
                    vec[i] += 1
                    k2 = self._key(vec)
                    if k2 not in nxt:
                        r = list(rep)
                        r[i] += 1
                        nxt[k2] = tuple(r)
            self.levels.append(nxt)
        self.full_degree = len(self.levels) - 1
        self._ranks = {}
        self._lock = threading.Lock()

    def _key(self, vec):
        return tuple(self.reducer.reduce(vec, self.q))

    def effective(self, vec):
        return self.reducer.reduce(vec, self.q)[self.q] >= 0

    def rank(self, key):
        got = self._ranks.get(key)
        if got is not None:
            return got[0]
        res = self._rank(key)
        with self._lock:
            self._ranks[key] = res
        return res[0]

    def certificate(self, key):
        self.rank(key)
        return self._ranks[key]

    def _rank(self, key):
        q, n = self.q, self.graph.n
        if key[q] < 0:
            return -1, (0,) * n
        d = sum(key)
        m = self.full_degree
        for k in range(m):
            if k > d:
                return d, tuple((d + 1) * (i == q) for i in range(n))
            for c, rep in self.levels[k].items():
                if not self.effective([a - b for a, b in zip(key, c)]):
                    return k - 1, rep
        r = max(m - 1, d - m)
        # a failing E of degree r + 1: D - E must be a non-effective class of degree d - r - 1
        j = d - r - 1
        if j < 0:
            return r, tuple((r + 1) * (i == q) for i in range(n))
        for c in self.levels[m]:
            y = list(c)
            y[q] -= m - j
            if not self.effective(y):
                e = self.reducer.reduce([a - b for a, b in zip(key, y)], q)
                return r, tuple(e)
        raise AssertionError("no non-effective class below the saturation degree")


@lru_cache(maxsize=256)
def _rank_data(graph):
    return _RankData(graph)


@lru_cache(maxsize=256)
def _reducer(graph):
    return _Reducer(graph.without_loops())


def reduce(D, q=None):
    """The q-reduced divisor equivalent to ``D`` (``q`` defaults to the first vertex)."""
    qi = 0 if q is None else D.graph.index(q)
    return Divisor(D.graph, _reducer(D.graph).reduce(D.coeffs, qi))


def linearly_equivalent(D1, D2):
    if D1.graph != D2.graph:
        raise GraphMismatch("divisors live on different graphs")
    if D1.degree() != D2.degree():
        return False
    red = _reducer(D1.graph)
    return red.reduce(D1.coeffs, 0) == red.reduce(D2.coeffs, 0)


def has_effective(D):
    return _reducer(D.graph).reduce(D.coeffs, 0)[0] >= 0


def bn_rank(D):
    data = _rank_data(D.graph)
    return data.rank(tuple(data.reducer.reduce(D.coeffs, data.q)))


def rank_certificate(D):
    """Return ``(rank, E)`` with ``E`` effective of degree ``rank + 1`` and ``|D - E|`` empty.

    For rank -1 the returned ``E`` is the zero divisor.
    """
    data = _rank_data(D.graph)
    r, e = data.certificate(tuple(data.reducer.reduce(D.coeffs, data.q)))
    return r, Divisor(D.graph, e)


def jacobian_order(graph):
    return _rank_data(graph).jac


def constant_C(graph):
    return 2 * (len(graph.edges) + 1) * (graph.n + 1)


def euler_char(D, canonical=None):
    K = D.graph.canonical_divisor() if canonical is None else canonical
    return bn_rank(D) - bn_rank(K - D)


@dataclass(frozen=True)
class TraceRound:
    fired: tuple
    divisor: Divisor


@dataclass(frozen=True)
class FiringTrace:
    """Start divisor plus one entry per set-firing, each holding the divisor after it."""

    start: Divisor
    rounds: tuple = ()

    def __len__(self):
        return len(self.rounds)

    def divisor_after(self, k):
        return self.start if k == 0 else self.rounds[k - 1].divisor

    @property
    def final(self):
        return self.divisor_after(len(self.rounds))

    def check(self):
        """Every recorded divisor is the previous one with its fired set fired once."""
        prev = self.start
        for rnd in self.rounds:
            if fire_set(prev, rnd.fired) != rnd.divisor:
                return False
            prev = rnd.divisor
        return True


class Effectivization(NamedTuple):
    found: bool
    representative: Divisor
    trace: FiringTrace


def _trace_from_record(D, record):
    graph = D.graph
    rounds = []
    vec = list(D.coeffs)
    for members, times in record:
        fired = tuple(graph.vertices[i] for i in sorted(members))
        for _ in range(times):
            vec = _fire_vec(graph, vec, members)
            rounds.append(TraceRound(fired, Divisor(graph, vec)))
    return FiringTrace(D, tuple(rounds))


def _schedule(D, threshold, max_rounds):
    """Fire every vertex with at least ``threshold(v)`` chips until effective."""
    graph = D.graph
    vec = list(D.coeffs)
    rounds = []
    while any(c < 0 for c in vec):
        if len(rounds) >= max_rounds:
            raise ScheduleError(f"effectivization exceeded {max_rounds} rounds")
        members = frozenset(i for i in range(graph.n) if vec[i] >= threshold[i])
        if not members:
            raise ScheduleError("no vertex can fire; the degree is too small for the schedule")
        vec = _fire_vec(graph, vec, members)
        fired = tuple(graph.vertices[i] for i in sorted(members))
        rounds.append(TraceRound(fired, Divisor(graph, vec)))
    return FiringTrace(D, tuple(rounds))


def effectivize(D, max_rounds=MAX_ROUNDS):
    """Find an effective divisor equivalent to ``D``.

    At degree at least ``constant_C`` every round fires all vertices with at
    least valence-many chips, which is guaranteed to terminate. Below that the
    answer comes from the reduced form, and the trace replays the reduction.
    """
    if D.is_effective():
        return Effectivization(True, D, FiringTrace(D))
    if D.degree() < 0:
        return Effectivization(False, D, FiringTrace(D))
    if D.degree() >= constant_C(D.graph):
        trace = _schedule(D, D.graph.valences(), max_rounds)
        return Effectivization(True, trace.final, trace)
    record = []
    red = _reducer(D.graph).reduce(D.coeffs, 0, record)
    trace = _trace_from_record(D, record)
    if red[0] < 0:
        return Effectivization(False, trace.final, trace)
    return Effectivization(True, trace.final, trace)


def saturate(D, max_rounds=MAX_ROUNDS):
    """Equivalent divisor with at least valence-many chips on every vertex.

    Requires ``deg(D) >= 2 * constant_C``. Runs the schedule on ``D`` minus the
    valence divisor, i.e. fires vertices holding twice their valence.
    """
    graph = D.graph
    if D.degree() < 2 * constant_C(graph):
        raise ScheduleError("saturation needs degree at least twice the schedule constant")
    val = graph.valences()
    shifted = Divisor(graph, [c - v for c, v in zip(D.coeffs, val)])
    inner = _schedule(shifted, val, max_rounds)
    back = Divisor(graph, val)
    rounds = tuple(TraceRound(r.fired, r.divisor + back) for r in inner.rounds)
    trace = FiringTrace(D, rounds)
    return trace.final, trace


def _script(reducer, vec, q):
    record = []
    red = reducer.reduce(vec, q, record)
    script = [0] * reducer.n
    for members, times in record:
        for i in members:
            script[i] += times
    return red, script


def equivalence_potential(D1, D2):
    """Integer potential ``g`` with ``D1 + laplacian(g) == D2``, or None if not equivalent.

    Here ``laplacian(g)(v) = val(v) g(v) - sum over edges vw of g(w)`` with loops
    ignored, so ``-g`` is a firing script taking ``D1`` to ``D2``.
    """
    if D1.graph != D2.graph:
        raise GraphMismatch("divisors live on different graphs")
    red = _reducer(D1.graph)
    r1, s1 = _script(red, D1.coeffs, 0)
    r2, s2 = _script(red, D2.coeffs, 0)
    if r1 != r2:
        return None
    return tuple(b - a for a, b in zip(s1, s2))


def laplacian_apply(graph, g):
    return tuple(
        sum(m * (g[i] - g[j]) for j, m in graph.neighbours(i)) for i in range(graph.n)
    )


def effective_representatives(D):
    """Every effective divisor linearly equivalent to ``D`` (the complete linear system).

    Multisets of vertices are grown in index order and pruned as soon as the
    remainder has no effective representative; the last vertex is read off
    from the class of the remainder.
    """
    graph = D.graph
    n = graph.n
    red = _reducer(graph)
    d = D.degree()
    if d < 0 or red.reduce(D.coeffs, 0)[0] < 0:
        return []
    if d == 0:
        return [Divisor(graph)]
    by_class = {}
    for i in range(n):
        unit = [0] * n
        unit[i] = 1
        by_class.setdefault(tuple(red.reduce(unit, 0)), []).append(i)
    out = []
    partial = [0] * n

    def grow(start, left):
        rest = [a - b for a, b in zip(D.coeffs, partial)]
        rr = red.reduce(rest, 0)
        if rr[0] < 0:
            return
        if left == 1:
            for i in by_class.get(tuple(rr), ()):
                if i >= start:
                    partial[i] += 1
                    out.append(Divisor(graph, partial))
                    partial[i] -= 1
            return
        for i in range(start, n):
            partial[i] += 1
            grow(i, left - 1)
            partial[i] -= 1

    grow(0, d)
    return out
