"""Min-plus combinations of PL functions, tropical dependence and independence-rank bounds."""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from . import divisor as comb
from .errors import AllInfinite, BoundExceeded, GraphMismatch, InvalidFunction
from .metric import PLFunction, Point, in_R, subdivision_model
from .rational import fmt, to_fraction

DEFAULT_BOUND = 5


class TropicalNumber:
    """Element of (Q u {inf}, min, +). ``None`` stands for infinity."""

    __slots__ = ("value",)

    def __init__(self, value=None):
        self.value = _coef(value)

    @property
    def is_infinite(self):
        return self.value is None

    def oplus(self, other):
        other = other if isinstance(other, TropicalNumber) else TropicalNumber(other)
        if self.value is None:
            return other
        if other.value is None:
            return self
        return TropicalNumber(min(self.value, other.value))

    def otimes(self, other):
        other = other if isinstance(other, TropicalNumber) else TropicalNumber(other)
        if self.value is None or other.value is None:
            return TropicalNumber(None)
        return TropicalNumber(self.value + other.value)

    def __eq__(self, other):
        other = other if isinstance(other, TropicalNumber) else TropicalNumber(other)
        return self.value == other.value

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return "inf" if self.value is None else fmt(self.value)


def _coef(x):
    if isinstance(x, TropicalNumber):
        return x.value
    if x is None or (isinstance(x, float) and x == float("inf")):
        return None
    if isinstance(x, str) and x.strip().lower() in ("inf", "infinity", "oo"):
        return None
    return to_fraction(x)


def _at_base(f):
    return f.value(Point(vertex=f.gamma.vertices[0]))


def _check(a, phis):
    if len(a) != len(phis):
        raise ValueError("one coefficient per function is required")
    if not phis:
        raise AllInfinite("empty combination")
    gamma = phis[0].gamma
    if any(f.gamma != gamma for f in phis):
        raise GraphMismatch("functions live on different metric graphs")
    coeffs = [_coef(x) for x in a]
    if all(c is None for c in coeffs):
        raise AllInfinite("at least one coefficient must be finite")
    return gamma, coeffs


def trop_combination(a, phis):
    """Pointwise minimum of ``a_i + phi_i``, exact on the common refinement."""
    gamma, coeffs = _check(a, phis)
    live = [(c, f) for c, f in zip(coeffs, phis) if c is not None]
    if gamma.n_edges == 0:
        return PLFunction(gamma, {}, min(c + _at_base(f) for c, f in live))
    pieces = {}
    for e in range(gamma.n_edges):
        xs = sorted(set().union(*(f.breakpoints(e) for _, f in live)))
        pts = []
        for x0, x1 in zip(xs, xs[1:]):
            h = x1 - x0
            lines = [(c + f.value_on_edge(e, x0), (f.value_on_edge(e, x1) - f.value_on_edge(e, x0)) / h)
                     for c, f in live]
            ts = {Fraction(0), h}
            for (b1, s1), (b2, s2) in combinations(lines, 2):
                if s1 != s2:
                    t = (b2 - b1) / (s1 - s2)
                    if 0 < t < h:
                        ts.add(t)
            for t in sorted(ts):
                pts.append((x0 + t, min(b + s * t for b, s in lines)))
        pieces[e] = dict(pts).items()
    return PLFunction(gamma, pieces)


def _segments(phis):
    """Segments of the common refinement as (edge, start, length, start values, slopes)."""
    gamma = phis[0].gamma
    out = []
    for e in range(gamma.n_edges):
        xs = sorted(set().union(*(f.breakpoints(e) for f in phis)))
        vals = [[f.value_on_edge(e, x) for x in xs] for f in phis]
        for k in range(len(xs) - 1):
            h = xs[k + 1] - xs[k]
            starts = tuple(v[k] for v in vals)
            slopes = tuple((v[k + 1] - v[k]) / h for v in vals)
            out.append((e, xs[k], h, starts, slopes))
    return out


def _segment_ok(coeffs, starts, slopes, h):
    lines = [(c + v, s) for c, v, s in zip(coeffs, starts, slopes) if c is not None]
    ts = {Fraction(0), h}
    for (b1, s1), (b2, s2) in combinations(lines, 2):
        if s1 != s2:
            t = (b2 - b1) / (s1 - s2)
            if 0 < t < h:
                ts.add(t)
    ts = sorted(ts)
    probes = ts + [(x + y) / 2 for x, y in zip(ts, ts[1:])]
    for t in probes:
        vals = [b + s * t for b, s in lines]
        m = min(vals)
        if vals.count(m) < 2:
            return False
    return True


def _dependent_on(coeffs, segs, phis):
    if sum(c is not None for c in coeffs) < 2:
        return False
    if not segs:
        vals = [c + _at_base(f) for c, f in zip(coeffs, phis) if c is not None]
        return vals.count(min(vals)) >= 2
    return all(_segment_ok(coeffs, starts, slopes, h) for _, _, h, starts, slopes in segs)


def is_dependent_with(a, phis):
    """True iff the minimum of ``a_i + phi_i`` is attained at least twice at every point."""
    _, coeffs = _check(a, phis)
    live = [f for c, f in zip(coeffs, phis) if c is not None]
    return _dependent_on([c for c in coeffs if c is not None], _segments(live), live)


# exact dependence decision

def _dot(u, v):
    return sum(x * y for x, y in zip(u, v))


def _normalize(normal, rhs):
    lead = next((x for x in normal if x), None)
    if lead is None:
        return None
    return tuple(x / lead for x in normal), rhs / lead


def _meet(flat, normal, rhs):
    """Intersect the affine flat ``(point, basis)`` with a hyperplane.

    Returns the smaller flat, the string "contains" when the flat already lies
    in the hyperplane, or None when they are disjoint.
    """
    p, basis = flat
    nb = [_dot(normal, b) for b in basis]
    r = rhs - _dot(normal, p)
    j = next((k for k, x in enumerate(nb) if x), None)
    if j is None:
        return "contains" if r == 0 else None
    bj = basis[j]
    step = r / nb[j]
    newp = tuple(x + step * y for x, y in zip(p, bj))
    newb = []
    for k, b in enumerate(basis):
        if k != j:
            f = nb[k] / nb[j]
            newb.append(tuple(x - f * y for x, y in zip(b, bj)))
    return newp, tuple(newb)


def _canon(flat):
    """Canonical key of an affine flat: reduced row echelon basis plus reduced base point."""
    p, basis = flat
    rows = [list(b) for b in basis]
    pivots = []
    r = 0
    ncol = len(p)
    for c in range(ncol):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        lead = rows[r][c]
        rows[r] = [x / lead for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    p = list(p)
    for row, c in zip(rows, pivots):
        f = p[c]
        if f:
            p = [x - f * y for x, y in zip(p, row)]
    return tuple(tuple(row) for row in rows[:r]), tuple(p)


def _solve(mat, rhs):
    """Unique solution of a square rational system, or None if singular."""
    n = len(mat)
    aug = [list(row) + [b] for row, b in zip(mat, rhs)]
    for c in range(n):
        piv = next((i for i in range(c, n) if aug[i][c]), None)
        if piv is None:
            return None
        aug[c], aug[piv] = aug[piv], aug[c]
        lead = aug[c][c]
        aug[c] = [x / lead for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return [row[n] for row in aug]


class _SubsetSearch:
    """Witness search for one set of finite coefficients (local indices, first pinned to 0).

    Witnesses form a closed union of faces of an arrangement built from the
    pairwise ties at refinement points, the conditions "line k passes through
    the crossing of lines i and j" on each segment, and the coordinate
    hyperplanes. Every segment needs a pair of identical lines, so the search
    branches on those ties and enumerates arrangement vertices at the leaves.
    """

    def __init__(self, phis):
        self.phis = phis
        self.m = m = len(phis)
        self.segs = _segments(phis)
        hyps = set()
        self.ties = []

        def unit(i, j, coef_i, coef_j):
            v = [Fraction(0)] * m
            v[i] += coef_i
            v[j] += coef_j
            return v

        for _, _, h, starts, slopes in self.segs:
            ends = [v + s * h for v, s in zip(starts, slopes)]
            tie = set()
            for i, j in combinations(range(m), 2):
                for vals in (starts, ends):
                    hyps.add(_normalize(unit(i, j, 1, -1), vals[j] - vals[i]))
                if slopes[i] == slopes[j]:
                    tie.add(_normalize(unit(i, j, 1, -1), starts[j] - starts[i]))
                else:
                    si, sj = slopes[i], slopes[j]
                    vi, vj = starts[i], starts[j]
                    for k in range(m):
                        if k in (i, j):
                            continue
                        sk, vk = slopes[k], starts[k]
                        normal = [Fraction(0)] * m
                        normal[k] += si - sj
                        normal[i] += sj - sk
                        normal[j] += sk - si
                        rhs = -((si - sj) * (vk - vi) + (sk - si) * (vj - vi))
                        hn = _normalize(normal, rhs)
                        if hn is not None:
                            hyps.add(hn)
            self.ties.append(sorted(tie))
        for i in range(1, m):
            v = [Fraction(0)] * m
            v[i] = Fraction(1)
            hyps.add((tuple(v), Fraction(0)))
        self.hyps = sorted(hyps)
        self.failed = set()
        self.tested = set()

    def feasible(self):
        return all(self.ties)

    def run(self):
        if not self.feasible():
            return None
        zero = tuple(Fraction(0) for _ in range(self.m))
        basis = []
        for i in range(1, self.m):
            b = [Fraction(0)] * self.m
            b[i] = Fraction(1)
            basis.append(tuple(b))
        return self._search((zero, tuple(basis)))

    def _search(self, flat):
        key = _canon(flat)
        if key in self.failed:
            return None
        best = None
        for tie in self.ties:
            branches = []
            satisfied = False
            for normal, rhs in tie:
                got = _meet(flat, normal, rhs)
                if got == "contains":
                    satisfied = True
                    break
                if got is not None:
                    branches.append(got)
            if satisfied:
                continue
            if not branches:
                self.failed.add(key)
                return None
            if best is None or len(branches) < len(best):
                best = branches
        if best is None:
            found = self._leaf(flat)
        else:
            found = None
            seen = set()
            for sub in best:
                k2 = _canon(sub)
                if k2 in seen:
                    continue
                seen.add(k2)
                found = self._search(sub)
                if found is not None:
                    break
        if found is None:
            self.failed.add(key)
        return found

    def _test(self, point):
        if point in self.tested:
            return False
        self.tested.add(point)
        return _dependent_on(list(point), self.segs, self.phis)

    def _leaf(self, flat):
        p, basis = flat
        k = len(basis)
        if k == 0:
            return p if self._test(p) else None
        restricted = set()
        for normal, rhs in self.hyps:
            w = [_dot(normal, b) for b in basis]
            hn = _normalize(w, rhs - _dot(normal, p))
            if hn is not None:
                restricted.add(hn)
        restricted = sorted(restricted)
        for combo in combinations(restricted, k):
            t = _solve([w for w, _ in combo], [c for _, c in combo])
            if t is None:
                continue
            point = tuple(x + sum(ti * b[j] for ti, b in zip(t, basis)) for j, x in enumerate(p))
            if self._test(point):
                return point
        return None


def decide_dependence(phis, bound=DEFAULT_BOUND):
    """A coefficient vector making ``phis`` tropically dependent, or None if they are independent.

    Coefficients are Fractions, with None for infinity. Subsets of finite
    coefficients are tried by size, then lexicographically; the first finite
    coefficient of a witness is 0.
    """
    phis = list(phis)
    if len(phis) > bound:
        raise BoundExceeded(f"{len(phis)} functions exceed the exact-decision bound {bound}")
    if phis and any(f.gamma != phis[0].gamma for f in phis):
        raise GraphMismatch("functions live on different metric graphs")
    r = len(phis)
    for size in range(2, r + 1):
        for subset in combinations(range(r), size):
            sub = [phis[i] for i in subset]
            if not sub[0].gamma.n_edges:
                vals = [_at_base(f) for f in sub]
                found = tuple(vals[0] - v for v in vals)
            else:
                found = _SubsetSearch(sub).run()
            if found is not None:
                out = [None] * r
                for i, c in zip(subset, found):
                    out[i] = c
                return tuple(out)
    return None


def is_independent(phis, bound=DEFAULT_BOUND):
    return decide_dependence(phis, bound) is None


# modules and ranks

def slope_spectrum(gens, p, direction):
    """Outgoing slopes at ``p`` along ``direction`` realized by the module generated by ``gens``."""
    return sorted({f.outgoing_slope(p, direction) for f in gens})


def _dedupe(funcs):
    seen = {}
    for f in funcs:
        g = f.normalized()
        seen.setdefault(g, g)
    return list(seen)


@dataclass(frozen=True)
class TModuleGens:
    """Finite generating set of a submodule of R(D). An empty list is the zero module."""

    divisor: object
    generators: tuple = ()

    def __post_init__(self):
        gens = tuple(self.generators)
        for f in gens:
            if f.gamma != self.divisor.gamma:
                raise GraphMismatch("generator lives on a different metric graph")
            if not in_R(self.divisor, f):
                raise InvalidFunction("generator is not in R(D)")
        object.__setattr__(self, "generators", gens)

    @property
    def gamma(self):
        return self.divisor.gamma

    def __len__(self):
        return len(self.generators)


def module_product(m1, m2):
    """Generators of the product module: all pairwise sums, deduplicated up to constants."""
    if m1.gamma != m2.gamma:
        raise GraphMismatch("modules live on different metric graphs")
    sums = [f + g for f in m1.generators for g in m2.generators]
    return TModuleGens(m1.divisor + m2.divisor, tuple(_dedupe(sums)))


def module_power(m, ell):
    out = m
    for _ in range(ell - 1):
        out = module_product(out, m)
    return out


def complete_series_generators(D, refine=1):
    """Functions realizing every effective divisor equivalent to ``D`` on a lattice model.

    Each effective model divisor D' in the class of D gives the lattice function
    f with D + div f = D'. These generate a submodule of R(D); the lattice
    is the coarsest one carrying the support unless ``refine`` scales it up.
    """
    view = subdivision_model(D.gamma, D, refine=refine)
    gens = []
    for rep in comb.effective_representatives(view.divisor):
        g = comb.equivalence_potential(view.divisor, rep)
        gens.append(view.model.function_from_potential(g))
    return TModuleGens(D, tuple(_dedupe(gens)))


@dataclass(frozen=True)
class RankInterval:
    lower: int
    upper: int
    witness: tuple = field(default=(), compare=False)
    lower_reason: str = ""
    upper_reason: str = ""

    @property
    def exact(self):
        return self.lower == self.upper

    @property
    def value(self):
        return self.lower if self.exact else None


def _slope_certificate(gens):
    best = gens[:1]
    for _, _, _, _, slopes in _segments(gens):
        chosen = {}
        for f, s in zip(gens, slopes):
            chosen.setdefault(s, f)
        if len(chosen) > len(best):
            best = [chosen[s] for s in sorted(chosen)]
    return best


def _alignment_candidates(gens):
    segs = _segments(gens)
    values = set()
    for _, _, h, starts, slopes in segs:
        for vals in (starts, tuple(v + s * h for v, s in zip(starts, slopes))):
            for i, j in combinations(range(len(gens)), 2):
                values.add((i, j, vals[j] - vals[i]))
    out = []
    for i, j, c in sorted(values):
        out.append(trop_combination([c, 0], [gens[i], gens[j]]))
    return out


def ind_rank_bounds(gens, D, bound=DEFAULT_BOUND, greedy=True):
    """Certified interval for the independence rank of the module generated by ``gens``.

    The upper bound is ``deg(D) + 1``. The lower bound comes from a segment
    where the most generators have pairwise distinct slopes (such a tuple is
    always independent), optionally extended greedily with tropical
    combinations whose coefficients align breakpoint values, each extension
    certified by the exact dependence decision.
    """
    if isinstance(gens, TModuleGens):
        gens = gens.generators
    gens = _dedupe(gens)
    for f in gens:
        if f.gamma != D.gamma:
            raise GraphMismatch("generator lives on a different metric graph")
        if not in_R(D, f):
            raise InvalidFunction("generator is not in R(D)")
    if not gens:
        return RankInterval(0, 0, (), "zero module", "zero module")
    upper = D.degree() + 1
    if D.gamma.n_edges == 0:
        return RankInterval(1, 1, tuple(gens[:1]), "single function", "point curve")
    witness = _slope_certificate(gens)
    reason = "distinct slopes" if len(witness) > 1 else "single function"
    if 1 < len(witness) <= bound and not is_independent(witness, bound):
        raise AssertionError("slope certificate failed the exact dependence check")
    if greedy and len(witness) < upper:
        for cand in gens + _alignment_candidates(gens):
            if len(witness) >= min(upper, bound):
                break
            trial = witness + [cand]
            if is_independent(trial, bound):
                witness = trial
                reason = "greedy extension, decided exactly"
    return RankInterval(len(witness), upper, tuple(witness), reason, "degree bound")


def ind_rank(D, refine=1, bound=DEFAULT_BOUND):
    return ind_rank_bounds(complete_series_generators(D, refine), D, bound)


class _Undetermined:
    def __repr__(self):
        return "Undetermined"

    def __bool__(self):
        return False


UNDETERMINED = _Undetermined()


def ind_euler_char(D, canonical=None, refine=1):
    """Independence Euler characteristic, or ``UNDETERMINED`` when a rank interval stays open."""
    from .metric import canonical_divisor

    K = canonical_divisor(D.gamma) if canonical is None else canonical
    first = ind_rank(D, refine)
    second = ind_rank(K - D, refine)
    if first.exact and second.exact:
        return first.lower - second.lower
    return UNDETERMINED


def verify_module_certificate(gens, D, E, coeffs):
    """Check that the combination ``coeffs`` of ``gens`` lies in R(D - E).

    A certificate that the submodule reaches the effective divisor ``E``.
    """
    from .metric import pl_div

    phi = trop_combination(coeffs, list(gens))
    return (D - E + pl_div(phi)).is_effective()
