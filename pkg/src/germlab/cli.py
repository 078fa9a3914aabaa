"""Command-line front end.

    germlab classify --doc pair.json
    germlab classify --catalog "(IV,I)" --theta y
    germlab reduce --catalog "(III,III)" --theta "x*y"
    germlab moduli solve --b "1+flat(t)" --out a.csv --report a.json
    germlab web singular --v-i 0 --pair 1 2 --grid -1.3 0.1 0.01 0.4 141 40
    germlab web equiv-vi1 --lhs '{"theta": "u*v", "f": "v"}' --rhs lhs.json
    germlab render --catalog "(I,I)^1" --t -0.2 0 0.2 --format svg --out fam.svg

Exit codes: 0 success, 1 usage or parse error, 2 nongeneric input or
violated constraint, 3 numerical failure.
"""

import argparse
import json
import os
import sys

from .exceptions import (
    DomainError,
    GermlabError,
    InexactRootError,
    NotExpandableAtOrigin,
    NumericError,
    UsageError,
)

EXIT_OK, EXIT_USAGE, EXIT_NONGENERIC, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _summary(msg):
    print(msg, file=sys.stderr)


def _load_json(arg):
    """Inline JSON text or a path to a JSON file."""
    text = arg
    if os.path.exists(arg):
        with open(arg) as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"not JSON and not a readable file: {arg!r}") from exc


def _document(args):
    from .normal_forms import catalog_text
    from .render import DiagramDocument

    if bool(args.doc) == bool(args.catalog):
        raise UsageError("give exactly one of --doc or --catalog")
    if args.doc:
        doc = DiagramDocument.from_json(_load_json(args.doc))
        if args.degree is None and args.mode is None:
            return doc
        raw = doc.to_json()
    else:
        raw = catalog_text(args.catalog, args.theta, args.alpha, args.sign)
    if args.degree is not None:
        raw["degree"] = args.degree
    if args.mode is not None:
        raw["mode"] = args.mode
    return DiagramDocument.from_json(raw)


def _add_source(p):
    p.add_argument("--doc", help="diagram document (JSON file or inline JSON)")
    p.add_argument("--catalog", metavar="TYPE", help="use a catalog normal form, e.g. '(V,I)'")
    p.add_argument("--theta", default="0", help="theta(x, y) for --catalog")
    p.add_argument("--alpha", default="0", help="alpha(u, v) for --catalog (VI,I)")
    p.add_argument("--sign", type=int, default=1, choices=(1, -1), help="sign for (II,I)")
    p.add_argument("--degree", type=int, help="jet degree (overrides the document)")
    p.add_argument("--mode", choices=("exact", "float"), help="arithmetic (overrides the document)")
    p.add_argument("--out", help="output file (default stdout)")


def cmd_classify(args):
    from .germs import classify_pair, classify_single

    doc = _document(args)
    diagram = doc.to_diagram()
    cls = classify_pair(diagram) if doc.is_pair else classify_single(diagram)
    _emit(_dump(cls.to_json()), args.out)
    _summary(f"type {cls.tag}" + (f": {cls.reason}" if cls.reason else ""))
    return EXIT_OK if cls.generic else EXIT_NONGENERIC


def cmd_reduce(args):
    from .normal_forms import reduce_III_III

    doc = _document(args)
    if not doc.is_pair:
        raise UsageError("reduce needs a pair diagram")
    res = reduce_III_III(doc.to_diagram())
    _emit(_dump(res.to_json()), args.out)
    _summary(f"type {res.pair_type}: theta = {res.theta}")
    return EXIT_OK


def cmd_moduli_solve(args):
    from . import moduli
    from .expr import taylor
    from .jets import jet_to_json
    from .normal_forms import solve_moduli_formal

    eps, count = args.grid
    count = int(count)
    if not 0 < eps < 0.5 or count < 2:
        raise UsageError("--grid needs 0 < eps < 1/2 and at least 2 points")
    b = moduli.SmoothFunction1D.from_text(args.b, eps)
    triple = moduli.make_triple(b, dps=args.dps)
    rows = moduli.pointwise_residuals(triple, moduli.default_grid(eps, count), args.target)
    lines = ["x,a,residual"] + [f"{x:.12g},{a:.17g},{r:.3e}" for x, a, r in rows]
    _emit("\n".join(lines) + "\n", args.out)

    worst = max(r for _, _, r in rows)
    _, rep = moduli.a_product(triple, min(eps, float(triple.x_range[1])), args.target, report=True)
    report = {"b": args.b, "dps": args.dps, "grid": [eps, count], "max_residual": worst, "report": rep.to_json()}
    if args.formal is not None:
        report["formal"] = jet_to_json(solve_moduli_formal(taylor(b.expr, args.formal, exact=True), args.formal))
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(_dump(report))
    _summary(f"max residual {worst:.3e}; {rep.n_used} factors at x = {rep.x:g}")
    return EXIT_OK if worst <= args.tol else EXIT_NUMERIC


def cmd_web_singular(args):
    from .webs import FoliationConfig, v_I_web, web_singular_set

    if bool(args.config) == (args.v_i is not None):
        raise UsageError("give exactly one of --config or --v-i")
    W = FoliationConfig.from_json(_load_json(args.config)) if args.config else v_I_web(args.v_i, args.b)
    S = web_singular_set(W, tuple(args.pair), tuple(args.grid))
    lines = ["u,v"] + [f"{u:.12g},{v:.12g}" for u, v in S.to_csv_rows()]
    _emit("\n".join(lines) + "\n", args.out)
    _summary(f"{len(S)} singular points for pair {tuple(args.pair)}")
    return EXIT_OK


def _vi_data(arg):
    d = _load_json(arg)
    if not isinstance(d, dict) or "theta" not in d or "f" not in d:
        raise UsageError("equivalence inputs need 'theta' and 'f'")
    return str(d["theta"]), str(d["f"])


def cmd_web_equiv(args):
    from .webs import vi_I_equivalence_test

    t1, f1 = _vi_data(args.lhs)
    t2, f2 = _vi_data(args.rhs)
    rep = vi_I_equivalence_test(t1, f1, t2, f2, args.samples, args.tol, seed=args.seed)
    _emit(_dump(rep.to_json()), args.out)
    _summary("equivalent" if rep.equivalent else "not equivalent")
    return EXIT_OK


def cmd_render(args):
    from .render import render_family

    doc = _document(args)
    text = render_family(doc, args.t, tuple(args.domain), args.format, args.step, tuple(args.view) if args.view else None)
    _emit(text, args.out)
    _summary(f"rendered {len(args.t)} level(s) of {2 if doc.is_pair else 1} component(s)")
    return EXIT_OK


def build_parser():
    p = _Parser(prog="germlab", description="Classify, reduce and draw divergent diagrams of plane maps.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("classify", help="classify a single or pair diagram")
    _add_source(c)
    c.set_defaults(func=cmd_classify)

    r = sub.add_parser("reduce", help="reduce a (III,III) pair to its normal form")
    _add_source(r)
    r.set_defaults(func=cmd_reduce)

    m = sub.add_parser("moduli", help="boundary modulus equation")
    msub = m.add_subparsers(dest="action", required=True, parser_class=_Parser)
    ms = msub.add_parser("solve", help="evaluate the product solution on a grid")
    ms.add_argument("--b", required=True, help="b(t) with b(0) = 1")
    ms.add_argument("--formal", type=int, metavar="N", help="also report the formal solution to degree N")
    ms.add_argument("--grid", type=float, nargs=2, default=(0.4, 201), metavar=("EPS", "COUNT"))
    ms.add_argument("--dps", type=int, default=40, help="working decimal digits")
    ms.add_argument("--target", type=float, default=1e-30, help="tail bound target")
    ms.add_argument("--tol", type=float, default=1e-9, help="residual tolerance for exit status")
    ms.add_argument("--out", help="CSV output (default stdout)")
    ms.add_argument("--report", help="JSON convergence report")
    ms.set_defaults(func=cmd_moduli_solve)

    w = sub.add_parser("web", help="web singular sets and the (VI,I) equivalence test")
    wsub = w.add_subparsers(dest="action", required=True, parser_class=_Parser)
    ws = wsub.add_parser("singular", help="tangency set of two foliations")
    ws.add_argument("--config", help="web config JSON: {functions: [...], domain: ...}")
    ws.add_argument("--v-i", dest="v_i", metavar="THETA", help="use the (V,I) web with this theta(u, v)")
    ws.add_argument("--b", type=float, default=1.0, help="b for --v-i")
    ws.add_argument("--pair", type=int, nargs=2, default=(1, 2), metavar=("I", "J"))
    ws.add_argument("--grid", type=float, nargs=6, required=True, metavar=("UMIN", "UMAX", "VMIN", "VMAX", "NU", "NV"))
    ws.add_argument("--out", help="CSV output (default stdout)")
    ws.set_defaults(func=cmd_web_singular)
    we = wsub.add_parser("equiv-vi1", help="compare two (VI,I) normal forms on the cusp interior")
    we.add_argument("--lhs", required=True, help='{"theta": ..., "f": ...} as JSON or a file')
    we.add_argument("--rhs", required=True)
    we.add_argument("--samples", type=int, default=2000)
    we.add_argument("--tol", type=float, default=1e-8)
    we.add_argument("--seed", type=int, help="sampling seed (default $GERMLAB_SEED or 0)")
    we.add_argument("--out", help="JSON output (default stdout)")
    we.set_defaults(func=cmd_web_equiv)

    rd = sub.add_parser("render", help="draw the level-curve families gamma(f^-1(t))")
    _add_source(rd)
    rd.add_argument("--t", type=float, nargs="*", default=[], help="levels")
    rd.add_argument("--domain", type=float, nargs=4, default=(-1.0, 1.0, -1.0, 1.0), metavar=("XMIN", "XMAX", "YMIN", "YMAX"))
    rd.add_argument("--view", type=float, nargs=4, metavar=("UMIN", "UMAX", "VMIN", "VMAX"))
    rd.add_argument("--step", type=float, default=0.01)
    rd.add_argument("--format", choices=("svg", "csv"), default="svg")
    rd.set_defaults(func=cmd_render)
    return p


def _exit_code(exc):
    if isinstance(exc, (UsageError, DomainError, NotExpandableAtOrigin, InexactRootError)):
        return EXIT_USAGE
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC
    return EXIT_NONGENERIC


def run(argv=None):
    """Run one command line; returns the exit code."""
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except GermlabError as exc:
        _summary(f"germlab: {type(exc).__name__}: {exc}")
        return _exit_code(exc)
    except OSError as exc:
        _summary(f"germlab: {exc}")
        return EXIT_USAGE


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
