"""Exception hierarchy. Every error carries a machine-readable ``code`` used by the CLI."""


class TropvolError(Exception):
    code = "error"


class GraphError(TropvolError):
    code = "graph_error"


class EmptyGraph(GraphError):
    code = "empty_graph"


class Disconnected(GraphError):
    code = "disconnected"


class UnknownVertex(GraphError):
    code = "unknown_vertex"


class UnknownEdge(GraphError):
    code = "unknown_edge"


class GraphMismatch(TropvolError):
    code = "graph_mismatch"


class InvalidLength(GraphError):
    code = "invalid_length"


class InvalidPoint(TropvolError):
    code = "invalid_point"


class InvalidFunction(TropvolError):
    code = "invalid_function"


class AllInfinite(TropvolError):
    code = "all_infinite"


class BoundExceeded(TropvolError):
    code = "bound_exceeded"


class IndRankUndetermined(TropvolError):
    code = "ind_rank_undetermined"


class UnassignedLabel(TropvolError):
    code = "unassigned_label"


class DegeneratePolynomial(TropvolError):
    code = "degenerate_polynomial"


class ScheduleError(TropvolError):
    """An effectivization schedule stalled, overran its round cap, or broke a round invariant."""

    code = "schedule_error"


class FormatError(TropvolError):
    code = "format_error"
