"""Enumeration and random generation of small connected multigraphs."""

import random
from itertools import combinations_with_replacement

from tropvol import Multigraph
from tropvol.errors import Disconnected


def _connected(n, edges):
    adj = {i: set() for i in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen, stack = {0}, [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def small_multigraphs(max_vertices=4, max_edges=5):
    """Every connected multigraph up to the given sizes, one per edge multiset (labelled)."""
    out = []
    for n in range(1, max_vertices + 1):
        pairs = [(i, j) for i in range(n) for j in range(i, n)]
        for m in range(max(n - 1, 0), max_edges + 1):
            for edges in combinations_with_replacement(pairs, m):
                if _connected(n, edges):
                    names = [f"v{i}" for i in range(n)]
                    out.append(Multigraph(names, [(names[a], names[b]) for a, b in edges]))
    return out


def random_multigraph(rng, max_vertices=4, max_edges=5, loops=True):
    while True:
        n = rng.randint(1, max_vertices)
        m = rng.randint(n - 1, max(max_edges, n - 1))
        pairs = [(i, j) for i in range(n) for j in range(i, n) if loops or i != j]
        if not pairs:
            if n == 1 and m == 0:
                return Multigraph(["v0"], [])
            continue
        edges = [rng.choice(pairs) for _ in range(m)]
        names = [f"v{i}" for i in range(n)]
        try:
            return Multigraph(names, [(names[a], names[b]) for a, b in edges])
        except Disconnected:
            continue


def rng(seed):
    return random.Random(seed)


def _canonical_edges(n, edges):
    from itertools import permutations

    best = None
    for perm in permutations(range(n)):
        key = tuple(sorted(tuple(sorted((perm[a], perm[b]))) for a, b in edges))
        if best is None or key < best:
            best = key
    return best


def small_multigraphs_up_to_iso(max_vertices=4, max_edges=5):
    seen = set()
    out = []
    for g in small_multigraphs(max_vertices, max_edges):
        idx = {v: i for i, v in enumerate(g.vertices)}
        key = (g.n, _canonical_edges(g.n, [(idx[a], idx[b]) for a, b in g.edges]))
        if key not in seen:
            seen.add(key)
            out.append(g)
    return out


def class_representatives(graph, degrees):
    """One divisor from every linear-equivalence class of each listed degree.

    Uses the classes' reduced forms at the first vertex: all configurations off
    the base vertex below the loopless valence that are their own reduction.
    """
    from itertools import product as iproduct

    from tropvol import Divisor, reduce

    loopless = graph.without_loops()
    caps = [loopless.valence(v) for v in graph.vertices[1:]]
    forms = []
    for conf in iproduct(*(range(c) for c in caps)):
        D = Divisor(graph, [0, *conf])
        if reduce(D, graph.vertices[0]) == D:
            forms.append(conf)
    out = []
    for d in degrees:
        for conf in forms:
            out.append(Divisor(graph, [d - sum(conf), *conf]))
    return out
