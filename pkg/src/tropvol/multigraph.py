"""Finite connected multigraphs with loops and parallel edges."""

from collections import deque

from .errors import Disconnected, EmptyGraph, UnknownVertex


class Multigraph:
    """An immutable connected multigraph.

    Vertices are opaque string ids kept in declaration order; that order is the
    internal index used everywhere else. Edges are unordered endpoint pairs and
    a pair with equal endpoints is a loop.
    """

    __slots__ = ("vertices", "edges", "_index", "_valence", "_nbrs", "_key")

    def __init__(self, vertices, edges):
        vertices = tuple(str(v) for v in vertices)
        if not vertices:
            raise EmptyGraph("a multigraph needs at least one vertex")
        if len(set(vertices)) != len(vertices):
            raise EmptyGraph("duplicate vertex ids")
        index = {v: i for i, v in enumerate(vertices)}
        clean = []
        for e in edges:
            a, b = (str(x) for x in e)
            for x in (a, b):
                if x not in index:
                    raise UnknownVertex(f"edge endpoint {x!r} is not a declared vertex")
            clean.append((a, b))
        self.vertices = vertices
        self.edges = tuple(clean)
        self._index = index
        n = len(vertices)
        val = [0] * n
        mult = [dict() for _ in range(n)]
        for a, b in self.edges:
            i, j = index[a], index[b]
            val[i] += 1
            val[j] += 1
            if i != j:
                mult[i][j] = mult[i].get(j, 0) + 1
                mult[j][i] = mult[j].get(i, 0) + 1
        self._valence = tuple(val)
        # loopless adjacency with multiplicities, sorted by neighbour index
        self._nbrs = tuple(tuple(sorted(m.items())) for m in mult)
        self._key = (self.vertices, tuple(sorted(tuple(sorted(e)) for e in self.edges)))
        if not self._connected():
            raise Disconnected("multigraph is not connected")

    def _connected(self):
        seen = {0}
        todo = [0]
        while todo:
            i = todo.pop()
            for j, _ in self._nbrs[i]:
                if j not in seen:
                    seen.add(j)
                    todo.append(j)
        return len(seen) == len(self.vertices)

    def __eq__(self, other):
        return isinstance(other, Multigraph) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Multigraph({list(self.vertices)!r}, {[list(e) for e in self.edges]!r})"

    @property
    def n(self):
        return len(self.vertices)

    def index(self, v):
        try:
            return self._index[v]
        except KeyError:
            raise UnknownVertex(f"unknown vertex {v!r}") from None

    def __contains__(self, v):
        return v in self._index

    def valence(self, v):
        return self._valence[self.index(v)]

    def valences(self):
        return self._valence

    def neighbours(self, i):
        """(index, multiplicity) pairs of non-loop neighbours of vertex index ``i``."""
        return self._nbrs[i]

    def loop_count(self, v):
        i = self.index(v)
        return sum(1 for a, b in self.edges if a == b == self.vertices[i])

    def genus(self):
        return len(self.edges) - len(self.vertices) + 1

    def without_loops(self):
        return Multigraph(self.vertices, [e for e in self.edges if e[0] != e[1]])

    def is_loopless(self):
        return all(a != b for a, b in self.edges)

    def relabel(self, mapping):
        return Multigraph([mapping[v] for v in self.vertices],
                          [(mapping[a], mapping[b]) for a, b in self.edges])

    def bfs_tree(self, root):
        """Distances and parents of a BFS tree rooted at vertex index ``root``."""
        dist = [-1] * self.n
        parent = [-1] * self.n
        dist[root] = 0
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for j, _ in self._nbrs[i]:
                if dist[j] < 0:
                    dist[j] = dist[i] + 1
                    parent[j] = i
                    queue.append(j)
        return dist, parent

    def canonical_divisor(self):
        from .divisor import Divisor

        return Divisor(self, [d - 2 for d in self._valence])

    def to_json(self):
        return {"vertices": list(self.vertices), "edges": [list(e) for e in self.edges]}


def build_multigraph(vertex_ids, edge_pairs):
    return Multigraph(vertex_ids, edge_pairs)


def valence(graph, v):
    return graph.valence(v)


def genus(graph):
    return graph.genus()


def canonical_divisor(graph):
    return graph.canonical_divisor()
