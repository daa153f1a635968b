"""Exact divisor theory on finite multigraphs and compact tropical curves."""

from .asymptotics import (RankSequence, is_big, rank_sequence, rr_constant, rr_residual_sequence,
                          tropical_volume)
from .divisor import (Divisor, Effectivization, FiringTrace, TraceRound, bn_rank, constant_C,
                      effectivize, equivalence_potential, euler_char, fire_set, has_effective,
                      jacobian_order, linearly_equivalent, rank_certificate, reduce, saturate)
from .errors import (TropvolError, GraphError, EmptyGraph, Disconnected, UnknownVertex,
                     UnknownEdge, GraphMismatch, InvalidLength, InvalidPoint, InvalidFunction,
                     AllInfinite, BoundExceeded, IndRankUndetermined, UnassignedLabel,
                     DegeneratePolynomial, ScheduleError, FormatError)
from .metric import (MetricDivisor, MetricGraph, PLFunction, Point, constant_c, fe_move, fv_move,
                     in_R, metric_bn_rank, metric_effectivize, metric_euler_char,
                     metric_has_effective, metric_linearly_equivalent, pl_div, subdivision_model)
from .multigraph import Multigraph, build_multigraph, canonical_divisor, genus, valence
from .specialization import (CornerLocus, PointMap, TropPoly2, corner_locus, eval_trop_poly,
                             pushforward, vol_compat)
from .tropical import (UNDETERMINED, RankInterval, TModuleGens, TropicalNumber,
                       complete_series_generators, decide_dependence, ind_euler_char, ind_rank,
                       ind_rank_bounds, is_independent, module_power, module_product,
                       trop_combination)

__version__ = "0.1.0"
