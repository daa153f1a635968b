"""Command-line front end: ``tropvol <subcommand> [options]``.

Results go to stdout (or ``--out``) as JSON; errors go to stderr as
``{"code": ..., "message": ...}``. Exit status is 0 on success, 1 on bad
input and 2 when a result is undetermined.
"""

import argparse
import json
import sys

from . import asymptotics, divisor as comb, io, metric, specialization, tropical
from .errors import FormatError, IndRankUndetermined, TropvolError
from .rational import fmt

EXIT_OK, EXIT_INPUT, EXIT_UNDETERMINED = 0, 1, 2


class _Undetermined(Exception):
    def __init__(self, payload):
        super().__init__("undetermined")
        self.payload = payload


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise FormatError(message)


# input helpers

def _space(args, allow_graph=True, allow_metric=True):
    """The graph the divisor lives on: (is_metric, object)."""
    if args.metric and allow_metric:
        return True, io.metric_from_json(io.load(args.metric))
    if args.graph and allow_graph:
        return False, io.graph_from_json(io.load(args.graph))
    wanted = " or ".join(f for f, ok in (("--graph", allow_graph), ("--metric", allow_metric)) if ok)
    raise FormatError(f"{wanted} is required")


def _divisor(args, is_metric, space):
    if not args.divisor:
        raise FormatError("--divisor is required")
    obj = io.load(args.divisor)
    if is_metric:
        return io.metric_divisor_from_json(obj, space)
    return io.divisor_from_json(obj, space)


def _div_json(D):
    return io.metric_divisor_to_json(D) if isinstance(D, metric.MetricDivisor) else io.divisor_to_json(D)


def _functions(args, gamma):
    paths = list(args.function or []) + list(args.functions or [])
    out = []
    for path in paths:
        obj = io.load(path)
        items = obj if isinstance(obj, list) else obj.get("functions", [obj]) if isinstance(obj, dict) else None
        if items is None:
            raise FormatError(f"{path} holds neither a function nor a list of functions")
        out.extend(io.function_from_json(f, gamma) for f in items)
    if not out:
        raise FormatError("--function is required")
    return out


def _module(path, gamma):
    obj = io.load(path)
    D = io.metric_divisor_from_json(obj.get("divisor", {}), gamma)
    gens = tuple(io.function_from_json(f, gamma) for f in obj.get("generators", []))
    return tropical.TModuleGens(D, gens)


def _module_json(m):
    return {"divisor": io.metric_divisor_to_json(m.divisor),
            "generators": [f.to_json() for f in m.generators]}


def _write_csv(path, text):
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# subcommands

def cmd_rank(args):
    is_metric, space = _space(args)
    D = _divisor(args, is_metric, space)
    if is_metric:
        return {"rank": metric.metric_bn_rank(D)}
    r, E = comb.rank_certificate(D)
    return {"rank": r, "certificate": io.divisor_to_json(E)}


def cmd_reduce(args):
    _, graph = _space(args, allow_metric=False)
    D = _divisor(args, False, graph)
    q = args.base if args.base is not None else graph.vertices[0]
    graph.index(q)
    return {"base": q, "reduced": io.divisor_to_json(comb.reduce(D, q))}


def cmd_effectivize(args):
    is_metric, space = _space(args)
    D = _divisor(args, is_metric, space)
    if is_metric:
        res = metric.metric_effectivize(D)
        return {"found": res.found, "representative": io.metric_divisor_to_json(res.representative),
                "rounds": res.rounds}
    res = comb.effectivize(D)
    return {"found": res.found, "representative": io.divisor_to_json(res.representative),
            "rounds": len(res.trace), "trace": io.trace_to_json(res.trace)}


def cmd_volume(args):
    is_metric, space = _space(args)
    D = _divisor(args, is_metric, space)
    return {"degree": D.degree(), "volume": fmt(asymptotics.tropical_volume(D)),
            "big": asymptotics.is_big(D)}


def cmd_chi(args):
    is_metric, space = _space(args)
    D = _divisor(args, is_metric, space)
    if not is_metric:
        return {"chi_bn": comb.euler_char(D), "chi_ind": None}
    ind = tropical.ind_euler_char(D)
    return {"chi_bn": metric.metric_euler_char(D),
            "chi_ind": None if ind is tropical.UNDETERMINED else ind}


def cmd_rank_seq(args):
    is_metric, space = _space(args)
    D = _divisor(args, is_metric, space)
    seq = asymptotics.rank_sequence(D, args.L, args.provider)
    if args.csv:
        _write_csv(args.csv, seq.to_csv())
    return {"values": list(seq.values), "normalized": [fmt(x) for x in seq.normalized],
            "volume": fmt(asymptotics.tropical_volume(D)), "constant": seq.constant}


def cmd_rr_residual(args):
    is_metric, space = _space(args)
    D = _divisor(args, is_metric, space)
    try:
        res = asymptotics.rr_residual_sequence(D, args.L, args.provider)
    except IndRankUndetermined as exc:
        raise _Undetermined({"code": exc.code, "message": str(exc)}) from None
    return {"residuals": res, "constant": asymptotics.rr_constant(D, args.provider)}


def cmd_ind_rank(args):
    _, gamma = _space(args, allow_graph=False)
    D = _divisor(args, True, gamma)
    interval = tropical.ind_rank(D, bound=args.bound)
    out = io.interval_to_json(interval)
    if args.require_exact and not interval.exact:
        raise _Undetermined(out)
    return out


def cmd_dependence(args):
    _, gamma = _space(args, allow_graph=False)
    phis = _functions(args, gamma)
    found = tropical.decide_dependence(phis, args.bound)
    if found is None:
        return {"dependent": False, "coefficients": None}
    return {"dependent": True, "coefficients": ["inf" if c is None else fmt(c) for c in found]}


def cmd_product(args):
    _, gamma = _space(args, allow_graph=False)
    if len(args.module or []) != 2:
        raise FormatError("product needs exactly two --module files")
    m1, m2 = (_module(p, gamma) for p in args.module)
    return _module_json(tropical.module_product(m1, m2))


def cmd_pushforward(args):
    _, gamma = _space(args, allow_graph=False)
    if not args.map:
        raise FormatError("--map is required")
    rho = io.pointmap_from_json(io.load(args.map), gamma)
    if not args.divisor:
        raise FormatError("--divisor is required")
    D = io.abstract_divisor_from_json(io.load(args.divisor))
    image = specialization.pushforward(D, rho)
    report = specialization.vol_compat(D, rho)
    report["vol_target"] = fmt(report["vol_target"])
    return {"divisor": io.metric_divisor_to_json(image), "report": report}


def cmd_corner_locus(args):
    if not args.poly:
        raise FormatError("--poly is required")
    F = io.poly_from_json(io.load(args.poly))
    locus = specialization.corner_locus(F)
    if args.csv:
        _write_csv(args.csv, io.locus_to_csv(locus))
    return io.locus_to_json(locus)


COMMANDS = {
    "rank": cmd_rank,
    "reduce": cmd_reduce,
    "effectivize": cmd_effectivize,
    "volume": cmd_volume,
    "chi": cmd_chi,
    "rank-seq": cmd_rank_seq,
    "rr-residual": cmd_rr_residual,
    "ind-rank": cmd_ind_rank,
    "dependence": cmd_dependence,
    "product": cmd_product,
    "pushforward": cmd_pushforward,
    "corner-locus": cmd_corner_locus,
}


def build_parser():
    parser = _Parser(prog="tropvol", description="Divisors on multigraphs and tropical curves.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--graph", help="multigraph JSON file")
        p.add_argument("--metric", help="metric graph JSON file")
        p.add_argument("--divisor", help="divisor JSON file")
        p.add_argument("--function", action="append", help="PL function JSON file (repeatable)")
        p.add_argument("--functions", nargs="+", help="PL function JSON files")
        p.add_argument("--module", action="append", help="module JSON file (repeatable)")
        p.add_argument("--map", help="point map JSON file")
        p.add_argument("--poly", help="tropical polynomial JSON file")
        p.add_argument("--L", type=int, default=10, help="horizon for rank sequences")
        p.add_argument("--base", help="base vertex for reduction")
        p.add_argument("--provider", choices=["bn", "metric", "ind"], default="bn")
        p.add_argument("--bound", type=int, default=tropical.DEFAULT_BOUND,
                       help="largest tuple size for exact dependence decisions")
        p.add_argument("--require-exact", action="store_true",
                       help="exit 2 when an independence rank interval does not close")
        p.add_argument("--out", help="write the JSON result here instead of stdout")
        p.add_argument("--csv", help="write CSV plot data here ('-' for stdout)")
    return parser


def _emit(payload, out):
    text = io.dumps(payload)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fail(code, message):
    sys.stderr.write(json.dumps({"code": code, "message": message}, sort_keys=True) + "\n")


def run(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if not args.command:
            raise FormatError("a subcommand is required: " + ", ".join(COMMANDS))
        if args.L < 1:
            raise FormatError("--L must be at least 1")
        payload = COMMANDS[args.command](args)
    except _Undetermined as und:
        _emit(und.payload, getattr(args, "out", None))
        _fail("undetermined", "the result could not be decided exactly")
        return EXIT_UNDETERMINED
    except TropvolError as exc:
        _fail(exc.code, str(exc))
        return EXIT_INPUT
    except (ValueError, KeyError, TypeError) as exc:
        _fail("input_error", str(exc))
        return EXIT_INPUT
    _emit(payload, args.out)
    return EXIT_OK


def main():
    sys.exit(run())
