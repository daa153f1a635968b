"""Divisor pushforward to a tropical curve and corner loci of bivariate min-plus polynomials."""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd

from .errors import DegeneratePolynomial, FormatError, GraphMismatch, UnassignedLabel
from .metric import MetricDivisor
from .rational import to_fraction


@dataclass(frozen=True)
class PointMap:
    """Assignment of abstract point labels to points of a metric graph."""

    gamma: object
    assign: dict

    def __post_init__(self):
        for label, p in self.assign.items():
            self.gamma.check_point(p)

    def __call__(self, label):
        try:
            return self.assign[label]
        except KeyError:
            raise UnassignedLabel(f"label {label!r} has no target point") from None


def pushforward(divisor, rho):
    """Image of a formal sum of labelled points; coincident targets add up."""
    terms = {}
    for label, c in divisor.items():
        p = rho(label)
        terms[p] = terms.get(p, 0) + int(c)
    out = MetricDivisor(rho.gamma, terms)
    if out.degree() != sum(int(c) for c in divisor.values()):
        raise AssertionError("pushforward changed the degree")
    return out


def vol_compat(divisor, rho):
    from .asymptotics import tropical_volume

    image = pushforward(divisor, rho)
    deg_source = sum(int(c) for c in divisor.values())
    vol = tropical_volume(image)
    return {
        "deg_source": deg_source,
        "deg_target": image.degree(),
        "vol_target": vol,
        "equal": max(deg_source, 0) == vol,
    }


class TropPoly2:
    """Min-plus polynomial min_k (c_k + a_k x + b_k y); repeated exponents keep the smallest coefficient."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        merged = {}
        for t in terms:
            if isinstance(t, dict):
                c, a, b = t["c"], t["a"], t["b"]
            else:
                c, a, b = t
            c = to_fraction(c)
            key = (int(a), int(b))
            if key not in merged or c < merged[key]:
                merged[key] = c
        if not merged:
            raise FormatError("a tropical polynomial needs at least one term")
        self.terms = tuple(sorted((c, a, b) for (a, b), c in merged.items()))

    def __eq__(self, other):
        return isinstance(other, TropPoly2) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self):
        return f"TropPoly2({[(str(c), a, b) for c, a, b in self.terms]})"

    def shifted(self, k):
        k = to_fraction(k)
        return TropPoly2([(c + k, a, b) for c, a, b in self.terms])


def eval_trop_poly(F, point):
    """Value at ``(x, y)`` and the exponent pairs of the terms attaining it."""
    x, y = (to_fraction(t) for t in point)
    vals = [(c + a * x + b * y, (a, b)) for c, a, b in F.terms]
    m = min(v for v, _ in vals)
    return m, frozenset(k for v, k in vals if v == m)


@dataclass(frozen=True)
class CornerLocus:
    vertices: tuple
    edges: tuple
    rays: tuple
    lines: tuple
    box: tuple

    def contains(self, point):
        """Whether ``point`` lies on one of the listed cells (exact)."""
        x, y = (to_fraction(t) for t in point)
        for p in self.vertices:
            if p == (x, y):
                return True
        for p, q in self.edges:
            if _on_segment((x, y), p, q):
                return True
        for p, d in self.rays:
            if _on_ray((x, y), p, d):
                return True
        for p, d in self.lines:
            if _cross((x - p[0], y - p[1]), d) == 0:
                return True
        return False


def _cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def _on_ray(pt, p, d):
    rel = (pt[0] - p[0], pt[1] - p[1])
    return _cross(rel, d) == 0 and rel[0] * d[0] + rel[1] * d[1] >= 0


def _on_segment(pt, p, q):
    d = (q[0] - p[0], q[1] - p[1])
    rel = (pt[0] - p[0], pt[1] - p[1])
    dot = rel[0] * d[0] + rel[1] * d[1]
    return _cross(rel, d) == 0 and 0 <= dot <= d[0] * d[0] + d[1] * d[1]


def _primitive(dx, dy):
    g = gcd(dx, dy)
    return dx // g, dy // g


def corner_locus(F, box=None):
    """Exact tropical curve of ``F``: cells where at least two terms attain the minimum.

    Each pair of terms contributes the part of its equality line on which the
    pair is minimal. Vertices are cell endpoints; unbounded cells come out as
    rays with primitive integer directions, or as whole lines. ``box`` is
    accepted for interface symmetry; the computation is exact and unbounded,
    and the returned box is the smallest one holding every vertex (grown to
    include the given box).
    """
    terms = F.terms
    if len(terms) < 2:
        raise DegeneratePolynomial("all terms share one exponent pair; no corner locus")
    pieces = []
    for (ci, ai, bi), (cj, aj, bj) in combinations(terms, 2):
        na, nb = ai - aj, bi - bj
        d = _primitive(-nb, na)
        # a point with na*x + nb*y = cj - ci
        rhs = cj - ci
        if na:
            p0 = (Fraction(rhs) / na, Fraction(0))
        else:
            p0 = (Fraction(0), Fraction(rhs) / nb)
        lo, hi = None, None
        empty = False
        for ck, ak, bk in terms:
            # (T_k - T_i)(p0 + t d) >= 0
            base = ck - ci + (ak - ai) * p0[0] + (bk - bi) * p0[1]
            rate = (ak - ai) * d[0] + (bk - bi) * d[1]
            if rate == 0:
                if base < 0:
                    empty = True
                    break
            elif rate > 0:
                bound = -base / rate
                lo = bound if lo is None else max(lo, bound)
            else:
                bound = -base / rate
                hi = bound if hi is None else min(hi, bound)
        if empty or (lo is not None and hi is not None and lo >= hi):
            continue
        pieces.append((p0, d, lo, hi))

    def at(p0, d, t):
        return (p0[0] + t * d[0], p0[1] + t * d[1])

    verts = set()
    for p0, d, lo, hi in pieces:
        for t in (lo, hi):
            if t is not None:
                verts.add(at(p0, d, t))
    edges, rays, lines = set(), set(), set()
    for p0, d, lo, hi in pieces:
        # split at vertices strictly inside the cell
        ts = set()
        for v in verts:
            rel = (v[0] - p0[0], v[1] - p0[1])
            if _cross(rel, d) == 0:
                t = (rel[0] * d[0] + rel[1] * d[1]) / (d[0] * d[0] + d[1] * d[1])
                if (lo is None or t > lo) and (hi is None or t < hi):
                    ts.add(t)
        cuts = sorted(ts)
        bounds = [lo] + cuts + [hi]
        for a, b in zip(bounds, bounds[1:]):
            if a is not None and b is not None:
                edges.add(tuple(sorted((at(p0, d, a), at(p0, d, b)))))
            elif a is not None:
                rays.add((at(p0, d, a), d))
            elif b is not None:
                rays.add((at(p0, d, b), (-d[0], -d[1])))
            else:
                lines.add(_canonical_line(p0, d))
    if not verts and not lines and not edges and not rays:
        raise DegeneratePolynomial("polynomial has an empty corner locus")
    xs = [v[0] for v in verts]
    ys = [v[1] for v in verts]
    if box:
        xs += [to_fraction(box[0]), to_fraction(box[2])]
        ys += [to_fraction(box[1]), to_fraction(box[3])]
    out_box = (min(xs), min(ys), max(xs), max(ys)) if xs else ()
    return CornerLocus(tuple(sorted(verts)), tuple(sorted(edges)), tuple(sorted(rays)),
                       tuple(sorted(lines)), out_box)


def _canonical_line(p0, d):
    if d[0] < 0 or (d[0] == 0 and d[1] < 0):
        d = (-d[0], -d[1])
    # base point: where the line meets x = 0, else y = 0
    if d[0]:
        t = -p0[0] / d[0]
    else:
        t = -p0[1] / d[1]
    return (p0[0] + t * d[0], p0[1] + t * d[1]), d


def check_locus(F, locus):
    """Independent re-evaluation: vertices tie 3+ terms (or end a cell), cell midpoints tie 2+."""
    for v in locus.vertices:
        if len(eval_trop_poly(F, v)[1]) < 2:
            return False
    for p, q in locus.edges:
        mid = ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
        if len(eval_trop_poly(F, mid)[1]) < 2:
            return False
    for p, d in locus.rays + locus.lines:
        if len(eval_trop_poly(F, (p[0] + d[0], p[1] + d[1]))[1]) < 2:
            return False
    return True


def same_graph_check(D, rho):
    if D.gamma != rho.gamma:
        raise GraphMismatch("divisor and point map target different graphs")
