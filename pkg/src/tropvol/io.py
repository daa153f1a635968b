"""JSON encoding of every value the library produces.

Rationals are written as canonical "p/q" strings (integers bare), keys are
sorted, and each ``*_to_json`` has a matching parser returning an equal value.
"""

import csv
import io as _io
import json

from .divisor import Divisor, FiringTrace, TraceRound
from .errors import FormatError
from .metric import MetricDivisor, MetricGraph, PLFunction
from .multigraph import Multigraph
from .rational import fmt, to_fraction
from .specialization import CornerLocus, PointMap, TropPoly2
from .tropical import RankInterval


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path} is not valid JSON: {exc.msg} at line {exc.lineno}") from None


def _need(obj, key, what):
    if not isinstance(obj, dict) or key not in obj:
        raise FormatError(f"{what} needs a {key!r} field")
    return obj[key]


def _q(x):
    """Rational from a JSON string or integer; JSON floats are refused."""
    if isinstance(x, float):
        raise FormatError(f"write {x!r} as an exact \"p/q\" string")
    return to_fraction(x)


def _int(x):
    if isinstance(x, bool) or not isinstance(x, int):
        raise FormatError(f"expected an integer, got {x!r}")
    return x


# graphs

def graph_to_json(graph):
    return graph.to_json()


def graph_from_json(obj):
    vertices = _need(obj, "vertices", "graph")
    edges = _need(obj, "edges", "graph")
    try:
        pairs = [(str(a), str(b)) for a, b in edges]
    except (TypeError, ValueError):
        raise FormatError("edges must be [tail, head] pairs") from None
    return Multigraph([str(v) for v in vertices], pairs)


def metric_to_json(gamma):
    return gamma.to_json()


def metric_from_json(obj):
    """Metric graph from a graph object with ``lengths`` (list or edge-id map; unit when absent)."""
    graph = graph_from_json(obj)
    edge_ids = obj.get("edge_ids")
    lengths = obj.get("lengths", [1] * len(graph.edges))
    if isinstance(lengths, dict):
        lengths = {str(k): _q(v) for k, v in lengths.items()}
    else:
        lengths = [_q(x) for x in lengths]
    return MetricGraph(graph, lengths, edge_ids)


# divisors

def divisor_to_json(D, with_graph=False):
    out = {"coeffs": {v: c for v, c in zip(D.graph.vertices, D.coeffs) if c}}
    if with_graph:
        out["graph"] = D.graph.to_json()
    return out


def divisor_from_json(obj, graph=None):
    if "graph" in obj:
        own = graph_from_json(obj["graph"])
        graph = graph or own
    if graph is None:
        raise FormatError("divisor needs a graph")
    coeffs = obj.get("coeffs", {})
    if isinstance(coeffs, list):
        return Divisor(graph, [_int(c) for c in coeffs])
    return Divisor(graph, {str(v): _int(c) for v, c in coeffs.items()})


def point_to_json(gamma, p):
    if p.is_vertex:
        return {"vertex": p.vertex}
    return {"edge": gamma.edge_ids[p.edge], "offset": fmt(p.offset)}


def point_from_json(gamma, obj):
    if isinstance(obj, str):
        return gamma.vertex_point(obj)
    if "vertex" in obj:
        return gamma.vertex_point(str(obj["vertex"]))
    return gamma.point(_need(obj, "edge", "point"), _q(_need(obj, "offset", "point")))


def metric_divisor_to_json(D):
    coeffs, points = {}, []
    for p, c in D.items():
        if p.is_vertex:
            coeffs[p.vertex] = c
        else:
            points.append({"edge": D.gamma.edge_ids[p.edge], "offset": fmt(p.offset), "coeff": c})
    out = {"coeffs": coeffs}
    if points:
        out["points"] = points
    return out


def metric_divisor_from_json(obj, gamma):
    terms = []
    for v, c in obj.get("coeffs", {}).items():
        terms.append((gamma.vertex_point(str(v)), _int(c)))
    for item in obj.get("points", []):
        terms.append((point_from_json(gamma, item), _int(_need(item, "coeff", "point term"))))
    return MetricDivisor(gamma, terms)


# functions and traces

def function_to_json(phi):
    return phi.to_json()


def function_from_json(obj, gamma):
    if "edges" in obj:
        pieces = {}
        for eid, bps in obj["edges"].items():
            pieces[str(eid)] = [(_q(x), _q(y)) for x, y in bps]
        return PLFunction(gamma, pieces)
    if "constant" in obj:
        return PLFunction.constant(gamma, _q(obj["constant"]))
    raise FormatError("a PL function needs 'edges' or 'constant'")


def trace_to_json(trace):
    return {
        "start": divisor_to_json(trace.start),
        "rounds": [{"fired": list(r.fired), "divisor": divisor_to_json(r.divisor)} for r in trace.rounds],
    }


def trace_from_json(obj, graph):
    start = divisor_from_json(_need(obj, "start", "trace"), graph)
    rounds = tuple(TraceRound(tuple(r["fired"]), divisor_from_json(r["divisor"], graph))
                   for r in obj.get("rounds", []))
    return FiringTrace(start, rounds)


def interval_to_json(interval):
    return {
        "lower": interval.lower,
        "upper": interval.upper,
        "exact": interval.exact,
        "lower_reason": interval.lower_reason,
        "upper_reason": interval.upper_reason,
        "witness": [f.to_json() for f in interval.witness],
    }


def interval_from_json(obj, gamma):
    witness = tuple(function_from_json(f, gamma) for f in obj.get("witness", []))
    return RankInterval(_int(obj["lower"]), _int(obj["upper"]), witness,
                        obj.get("lower_reason", ""), obj.get("upper_reason", ""))


# plane polynomials and specialization data

def poly_to_json(F):
    return {"terms": [{"c": fmt(c), "a": a, "b": b} for c, a, b in F.terms]}


def poly_from_json(obj):
    terms = _need(obj, "terms", "tropical polynomial")
    return TropPoly2([(_q(t["c"]), _int(t["a"]), _int(t["b"])) for t in terms])


def _pt(p):
    return [fmt(p[0]), fmt(p[1])]


def _unpt(xs):
    return (_q(xs[0]), _q(xs[1]))


def locus_to_json(locus):
    return {
        "vertices": [_pt(v) for v in locus.vertices],
        "edges": [[_pt(p), _pt(q)] for p, q in locus.edges],
        "rays": [{"start": _pt(p), "direction": list(d)} for p, d in locus.rays],
        "lines": [{"point": _pt(p), "direction": list(d)} for p, d in locus.lines],
        "box": [fmt(x) for x in locus.box],
    }


def locus_from_json(obj):
    return CornerLocus(
        tuple(_unpt(v) for v in obj.get("vertices", [])),
        tuple((_unpt(p), _unpt(q)) for p, q in obj.get("edges", [])),
        tuple((_unpt(r["start"]), tuple(_int(x) for x in r["direction"])) for r in obj.get("rays", [])),
        tuple((_unpt(r["point"]), tuple(_int(x) for x in r["direction"])) for r in obj.get("lines", [])),
        tuple(_q(x) for x in obj.get("box", [])),
    )


def locus_to_csv(locus):
    """Rows ``kind,x1,y1,x2,y2``; rays and lines give a start point and a direction."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "x1", "y1", "x2", "y2"])
    for v in locus.vertices:
        w.writerow(["vertex", *_pt(v), "", ""])
    for p, q in locus.edges:
        w.writerow(["edge", *_pt(p), *_pt(q)])
    for p, d in locus.rays:
        w.writerow(["ray", *_pt(p), d[0], d[1]])
    for p, d in locus.lines:
        w.writerow(["line", *_pt(p), d[0], d[1]])
    return buf.getvalue()


def pointmap_to_json(rho):
    return {"assign": {label: point_to_json(rho.gamma, p) for label, p in sorted(rho.assign.items())}}


def pointmap_from_json(obj, gamma):
    assign = _need(obj, "assign", "point map")
    return PointMap(gamma, {str(k): point_from_json(gamma, v) for k, v in assign.items()})


def abstract_divisor_from_json(obj):
    coeffs = obj.get("coeffs", obj)
    return {str(k): _int(v) for k, v in coeffs.items()}


__all__ = [name for name in dir() if name.endswith(("_to_json", "_from_json")) or name in
           ("dumps", "load", "locus_to_csv")]
