"""Tropical volume, rank sequences, bigness and Riemann-Roch residuals.

Every routine takes a rank provider: ``"bn"`` (Baker-Norine rank on a
multigraph or a metric graph), ``"metric"`` (metric Baker-Norine rank only) or
``"ind"`` (independence rank of the complete series, required to be exact).
A callable ``D -> int`` is accepted as well.
"""

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

from . import divisor as comb
from . import metric
from .errors import GraphMismatch, IndRankUndetermined
from .rational import fmt


def _is_metric(D):
    return isinstance(D, metric.MetricDivisor)


def tropical_volume(D):
    """Closed form max{deg D, 0}, for divisors on multigraphs and on metric graphs."""
    return Fraction(max(D.degree(), 0))


def is_big(D):
    return tropical_volume(D) > 0


def _ind_rank_exact(D):
    from .tropical import ind_rank

    interval = ind_rank(D)
    if not interval.exact:
        raise IndRankUndetermined(
            f"independence rank of {D!r} only known to lie in [{interval.lower}, {interval.upper}]")
    return interval.lower


def rank_provider(provider):
    if callable(provider):
        return provider
    if provider == "bn":
        return lambda D: metric.metric_bn_rank(D) if _is_metric(D) else comb.bn_rank(D)
    if provider == "metric":
        def _metric(D):
            if not _is_metric(D):
                raise GraphMismatch("the metric provider needs a divisor on a metric graph")
            return metric.metric_bn_rank(D)
        return _metric
    if provider == "ind":
        def _ind(D):
            if not _is_metric(D):
                raise GraphMismatch("the independence provider needs a divisor on a metric graph")
            return _ind_rank_exact(D)
        return _ind
    raise ValueError(f"unknown rank provider {provider!r}")


def _canonical(D):
    if _is_metric(D):
        return metric.canonical_divisor(D.gamma)
    return D.graph.canonical_divisor()


def sandwich_constant(D):
    """C_G for a multigraph divisor, c_C for a metric one."""
    if _is_metric(D):
        return metric.constant_c(D.gamma)
    return comb.constant_C(D.graph)


@dataclass(frozen=True)
class RankSequence:
    divisor: object
    L: int
    values: tuple
    normalized: tuple
    constant: int

    @property
    def degree(self):
        return self.divisor.degree()

    def rows(self):
        d = self.degree
        for ell, (r, q) in enumerate(zip(self.values, self.normalized), start=1):
            yield ell, r, q, d * ell, d * ell - self.constant

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["l", "rank", "rank_over_l", "deg_times_l", "lower_bound"])
        for ell, r, q, dl, lb in self.rows():
            w.writerow([ell, r, fmt(q), dl, lb])
        return buf.getvalue()

    @property
    def final_normalized(self):
        return self.normalized[-1]


def rank_sequence(D, L, provider="bn"):
    if int(L) < 1:
        raise ValueError("horizon L must be at least 1")
    L = int(L)
    rank = rank_provider(provider)
    values = tuple(rank(D * ell) for ell in range(1, L + 1))
    normalized = tuple(Fraction(r, ell) for ell, r in enumerate(values, start=1))
    return RankSequence(D, L, values, normalized, sandwich_constant(D))


def rr_constant(D, provider="bn"):
    """A constant C' with |chi(lD) - l deg D| <= C' for every l >= 1.

    From the sandwich bounds for lD and K - lD: C + |deg K| + 2, plus one
    for the independence rank, whose sandwich is shifted up by one.
    """
    extra = 3 if provider == "ind" else 2
    return sandwich_constant(D) + abs(_canonical(D).degree()) + extra


def rr_residual_sequence(D, L, provider="bn"):
    """chi(lD) - deg(D) l for l = 1..L."""
    if int(L) < 1:
        raise ValueError("horizon L must be at least 1")
    rank = rank_provider(provider)
    K = _canonical(D)
    d = D.degree()
    return [rank(D * ell) - rank(K - D * ell) - d * ell for ell in range(1, int(L) + 1)]
