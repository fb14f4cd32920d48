"""Command-line interface.

Exit status is 0 on success, 1 on bad input (unparseable graph, invalid
parameters, instance above a node cap) and 2 when a certification or
identity check fails.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import analytic, cavity, oracle
from .contraction import GridSpec, grid_search_max, taylor_certify
from .errors import CertificationFailed, GirthCountError
from .experiments import experiment_random_regular, experiment_rows_to_csv
from .generators import parse_generator
from .graph import INFINITE, format_graph, read_graph
from .trees import decay_experiment, decay_rows_to_csv

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERIFY = 2


class InputError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _num(x):
    if x is None:
        return None
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else float(f"{float(x):.12g}")
    if isinstance(x, float):
        if math.isinf(x) or math.isnan(x):
            return None
        return float(f"{x:.12g}")
    return x


def _emit(data, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(data) + "\n")
    elif fmt == "text":
        for key, value in data.items():
            out.write(f"{key}: {value}\n")
    elif fmt == "csv":
        out.write(",".join(data) + "\n")
        out.write(",".join("" if v is None else str(v) for v in data.values()) + "\n")
    else:
        raise InputError(f"unknown format {fmt!r}")


def _load_graph(args):
    if bool(args.input) == bool(args.gen):
        raise InputError("give exactly one of --input or --gen")
    if args.input:
        return read_graph(args.input)
    return parse_generator(args.gen)


def _parse_order(text, n):
    if text is None:
        return None
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"--order must be a comma-separated list of node ids, got {text!r}") from None


def _add_graph_args(p):
    p.add_argument("--input", help="graph file in the 'p n m' / 'e u v' format")
    p.add_argument("--gen", help="generator spec such as cycle:60 or random_regular:20:3:1")


def cmd_count_ind(args, out):
    g = _load_graph(args)
    est = cavity.count_independent_sets(
        g, epsilon=args.epsilon, lam=args.lam, order=_parse_order(args.order, g.n), cap=args.cap
    )
    if est.warning:
        print(f"warning: {est.warning}", file=sys.stderr)
    _emit(est.to_json_dict(), args.format, out)
    return EXIT_OK


def cmd_count_color(args, out):
    g = _load_graph(args)
    est = cavity.count_colorings(g, args.q, order=_parse_order(args.order, g.n))
    _emit(est.to_json_dict(), args.format, out)
    return EXIT_OK


def cmd_oracle(args, out):
    g = _load_graph(args)
    data = {"n": g.n}
    status = EXIT_OK
    if args.kind == "ind":
        res = oracle.independence_polynomial(g, args.lam, cap=args.cap)
        value = Fraction(res.value)
        data.update({"kind": "ind", "lambda": _num(args.lam), "value": str(value),
                     "log_value": _num(cavity.log_fraction(value))})
        if args.verify:
            rep = oracle.verify_cavity_identity(g, args.lam, _parse_order(args.order, g.n), cap=args.cap)
            data["identity_holds"] = rep.passed
            status = EXIT_OK if rep.passed else EXIT_VERIFY
    else:
        if args.q is None:
            raise InputError("--q is required for --kind color")
        res = oracle.count_proper_colorings(g, args.q, cap=args.cap)
        data.update({"kind": "color", "q": args.q, "value": str(res.value),
                     "log_value": _num(math.log(res.value)) if res.value else None})
        if args.verify:
            rep = oracle.verify_color_identity(g, args.q, _parse_order(args.order, g.n), cap=args.cap)
            data["identity_holds"] = rep.passed
            status = EXIT_OK if rep.passed else EXIT_VERIFY
    data["cap"] = res.node_budget
    _emit(data, args.format, out)
    return status


ANALYTIC_QUANTITIES = ("threshold", "fixed-point", "ind-limit", "color-limit", "kelly", "energy-shift", "bezakova")


def cmd_analytic(args, out):
    lam = float(args.lam)
    q = args.quantity
    data = {"quantity": q}
    if q in ("color-limit", "bezakova"):
        if args.q is None:
            raise InputError(f"--q is required for {q}")
        data.update({"q": args.q, "r": args.r})
        fn = analytic.color_limit if q == "color-limit" else analytic.bezakova_bound
        value = fn(args.q, args.r)
        data.update({"value": _num(value), "exp_value": _num(math.exp(value))})
    elif q == "threshold":
        value = analytic.lambda_threshold(args.r)
        data.update({"r": args.r, "value": None if value == INFINITE else _num(value)})
    else:
        data.update({"r": args.r, "lambda": _num(args.lam)})
        if q == "fixed-point":
            fp = analytic.solve_fixed_point(args.r, lam)
            data.update({"x": _num(fp.x), "residual": fp.residual})
        elif q == "ind-limit":
            value = analytic.ind_limit(args.r, lam)
            data.update({"value": _num(value), "exp_value": _num(math.exp(value))})
        elif q == "kelly":
            a, b = analytic.kelly_marginals(args.r, lam)
            data.update({"leaf_side": _num(a), "full_degree": _num(b)})
        elif q == "energy-shift":
            data["value"] = _num(analytic.energy_shift(args.r, lam))
    _emit(data, args.format, out)
    return EXIT_OK


def cmd_verify_contraction(args, out):
    spec = GridSpec(args.k, resolution=args.resolution, lam=args.lam)
    grid = grid_search_max(spec, workers=args.workers)
    try:
        report = taylor_certify(spec, target=args.target, min_resolution=args.min_resolution, grid=grid)
        status = EXIT_OK
    except CertificationFailed as exc:
        report = exc.report
        print(f"certification failed: {exc}", file=sys.stderr)
        status = EXIT_VERIFY
        if report is None:
            _emit({"k": args.k, "certified": False}, args.format, out)
            return status
    _emit(report.to_json_dict(), args.format, out)
    return status


def cmd_gen(args, out):
    g = parse_generator(args.spec)
    text = format_graph(g)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_rewire_demo(args, out):
    g = _load_graph(args)
    report = cavity.rewire_count_demo(g, args.lam, args.girth_target, cap=args.cap, max_steps=args.max_steps)
    _emit(report.to_json_dict(), "json" if args.format == "csv" else args.format, out)
    return EXIT_OK


def cmd_decay(args, out):
    param = args.q if args.model == "color" else args.lam
    if param is None:
        raise InputError("--q is required for the color model")
    rows = decay_experiment(args.r, args.t, args.model, param, samples=args.samples, seed=args.seed)
    if args.format == "json":
        out.write(json.dumps([
            {"depth": r.depth, "model": r.model, "param": _num(r.param),
             "max_dev": _num(float(r.max_dev)),
             "certified_width": _num(None if r.certified_width is None else float(r.certified_width))}
            for r in rows
        ]) + "\n")
    else:
        out.write(decay_rows_to_csv(rows))
    return EXIT_OK


def cmd_experiment(args, out):
    if args.n_min > args.n_max:
        raise InputError("--n-min must not exceed --n-max")
    n_values = [n for n in range(args.n_min, args.n_max + 1) if (n * args.r) % 2 == 0]
    rows = experiment_random_regular(
        args.r, n_values, reps=args.reps, seed=args.seed, lam=args.lam, q=args.q, epsilon=args.epsilon
    )
    out.write(experiment_rows_to_csv(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="girthcount", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt=("json", "text", "csv"), default="json"):
        p.add_argument("--format", choices=fmt, default=default)
        return p

    p = common(sub.add_parser("count-ind", help="cavity estimate of ln Z for independent sets"))
    _add_graph_args(p)
    p.add_argument("--lambda", dest="lam", type=_fraction, default=Fraction(1))
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--order", help="elimination order, comma separated")
    p.add_argument("--cap", type=int, help="node cap for the exact fallback")
    p.set_defaults(func=cmd_count_ind)

    p = common(sub.add_parser("count-color", help="cavity estimate of ln Z for proper colorings"))
    _add_graph_args(p)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--order")
    p.set_defaults(func=cmd_count_color)

    p = common(sub.add_parser("oracle", help="exact partition function"))
    _add_graph_args(p)
    p.add_argument("--kind", choices=("ind", "color"), default="ind")
    p.add_argument("--lambda", dest="lam", type=_fraction, default=Fraction(1))
    p.add_argument("--q", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--order")
    p.add_argument("--verify", action="store_true", help="also check the telescoping identity")
    p.set_defaults(func=cmd_oracle)

    p = common(sub.add_parser("analytic", help="closed-form limits"))
    p.add_argument("quantity", choices=ANALYTIC_QUANTITIES)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=_fraction, default=Fraction(1))
    p.add_argument("--q", type=int)
    p.set_defaults(func=cmd_analytic)

    p = common(sub.add_parser("verify-contraction", help="grid maximum and certification of the gradient bound"))
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--resolution", type=_fraction, default=Fraction(1, 1000))
    p.add_argument("--lambda", dest="lam", type=_fraction, default=Fraction(1))
    p.add_argument("--target", type=float, default=0.9)
    p.add_argument("--min-resolution", type=float, default=1e-4)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_verify_contraction)

    p = sub.add_parser("gen", help="write a generated graph")
    p.add_argument("spec", help="e.g. cycle:12, named:petersen, random_regular:20:3:SEED")
    p.add_argument("--output")
    p.set_defaults(func=cmd_gen)

    p = common(sub.add_parser("rewire-demo", help="energy shift along the rewiring schedule"), ("json", "text"))
    _add_graph_args(p)
    p.add_argument("--lambda", dest="lam", type=_fraction, default=Fraction(1))
    p.add_argument("--girth-target", type=int, default=4)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--cap", type=int)
    p.set_defaults(func=cmd_rewire_demo)

    p = common(sub.add_parser("decay", help="boundary sensitivity on regular trees"), ("csv", "json"), "csv")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--model", choices=("ind", "color"), default="ind")
    p.add_argument("--lambda", dest="lam", type=_fraction, default=Fraction(1))
    p.add_argument("--q", type=int)
    p.add_argument("--samples", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("experiment-random-regular", help="ln Z / n on random regular graphs (CSV)")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambda", dest="lam", type=_fraction, default=Fraction(1))
    p.add_argument("--q", type=int, help="count q-colorings instead of independent sets")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args, out)
    except (InputError, GirthCountError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
