"""Command-line interface: ``curvclass <command> ...``.

Exit codes: 0 holds / pass, 1 fails, 2 usage or parse error, 3 degenerate.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import catalog as cat
from . import structure as st
from . import tensor as tc
from .btensor import (
    CATALOG_NAMES,
    PARAMETERS,
    BCoefficients,
    BTensorError,
    build_tensor,
    canonical_name,
    catalog,
    classification_report,
    flatness_identity_residual,
    generic,
)
from .engine import SingularMetric, curvature_package
from .theorems import BLOCKS, SuiteConfig, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2, 3

CONDITIONS = (
    "flat",
    "symmetric",
    "recurrent",
    "generalized-recurrent",
    "chaki",
    "weakly-symmetric",
    "semisym",
    "pseudosym",
    "order2",
)


class UsageError(Exception):
    pass


# ----------------------------------------------------------- json helpers

def jsonable(obj):
    """Convert numpy and Fraction values into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        val = float(obj)
        return val if math.isfinite(val) else str(val)
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True)


def _human_value(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, list):
        return "[" + ", ".join(_human_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_human_value(x)}" for k, x in v.items()) + "}"
    return str(v)


def _emit(args, payload: dict, human_lines: list[str]) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(dumps(payload) + "\n")
    if args.format == "json":
        print(dumps(payload))
    else:
        print("\n".join(human_lines))


# ----------------------------------------------------------- input parsing

def parse_named(spec: str, n: int, verbatim: bool = False) -> BCoefficients:
    """``NAME`` or ``NAME:param=val,param=val``; missing parameters use generic values."""
    name, _, rest = spec.partition(":")
    key = canonical_name(name)
    params = {}
    if rest:
        for item in rest.split(","):
            k, eq, v = item.partition("=")
            if not eq:
                raise UsageError(f"bad parameter {item!r} in {spec!r}; expected key=value")
            params[k.strip()] = Fraction(v.strip())
    if not params and PARAMETERS.get(key):
        return generic(key, n, verbatim)
    return catalog(key, n, verbatim, **params)


def coefficients_from_args(args) -> BCoefficients:
    sources = [s for s in (args.named, args.a, args.coeff_file) if s]
    if len(sources) != 1:
        raise UsageError("give exactly one of --named, --a, --coeff-file")
    if args.named:
        if args.dim is None:
            raise UsageError("--named needs --dim")
        return parse_named(args.named, args.dim, args.verbatim)
    if args.a:
        if args.dim is None:
            raise UsageError("--a needs --dim")
        vals = [v for v in args.a.replace(";", ",").split(",") if v.strip()]
        return BCoefficients(args.dim, tuple(Fraction(v.strip()) for v in vals))
    with open(args.coeff_file) as fh:
        c = BCoefficients.from_json(json.load(fh))
    if args.dim is not None and args.dim != c.n:
        raise UsageError(f"--dim {args.dim} does not match file dimension {c.n}")
    return c


def metric_from_args(args) -> cat.CatalogMetric:
    if getattr(args, "metric_file", None):
        return cat.load_spec(args.metric_file)
    if not args.metric:
        raise UsageError("give --metric NAME[:ARGS] or --metric-file")
    return cat.get(args.metric)


# ----------------------------------------------------------- commands

def cmd_classify(args) -> int:
    c = coefficients_from_args(args)
    rep = classification_report(c)
    lines = [str(c), f"class: {rep['class']}"]
    prof = rep["profile"]
    lines.append("traces ^ij S = p S + q r g:")
    for pair in prof["p"]:
        lines.append(f"  {pair}: p = {prof['p'][pair]}, q = {prof['q'][pair]}")
    lines.append("traces ^ij r: " + ", ".join(f"{k} = {v}" for k, v in prof["r"].items()))
    lines.append(f"gct: {str(rep['gct']).lower()}  proper-gct: {str(rep['proper_gct']).lower()}  skew: {str(rep['skew_endomorphism']).lower()}")
    if rep["canonical_form"]:
        cf = rep["canonical_form"]
        lines.append(f"canonical form: {cf['b0']} R + {cf['b1']} g∧S + {cf['b2']} r g∧g")
    for note in c.notes:
        lines.append(f"note: {note}")
    _emit(args, rep, lines)
    return EXIT_OK


def cmd_eval(args) -> int:
    cm = metric_from_args(args)
    if args.dim is None and not args.coeff_file:
        args.dim = cm.dim
    c = coefficients_from_args(args)
    if cm.dim != c.n:
        raise UsageError(f"coefficients are for n={c.n} but metric {cm.name} has dimension {cm.dim}")
    points = []
    lines = [f"{c} on {cm.name}"]
    for p in cm.sample_points(args.points, args.seed):
        pkg = curvature_package(cm.field, p, 0)
        B = np.asarray(build_tensor(c, pkg).data, dtype=float)
        ident = flatness_identity_residual(c, pkg)
        norm = float(np.abs(B).max())
        R = np.asarray(pkg.R.data, dtype=float)
        minus_R = float(np.abs(B - R).max()) / max(1.0, float(np.abs(R).max()))
        entry = {
            "coords": p.tolist(),
            "max_norm": norm,
            "frobenius": float(np.sqrt(np.sum(B * B))),
            "minus_R": minus_R,
            "identity": ident,
        }
        if args.components:
            entry["components"] = B.tolist()
        points.append(entry)
        if ident["identity"] is None:
            ident_txt = "no class identity (class 4)"
        else:
            ident_txt = f"class-{ident['class']} identity residual {ident['residual']:.6g}"
        lines.append(f"  x = {_human_value(p.tolist())}: |B| = {norm:.6g}, |B - R| = {minus_R:.6g}, {ident_txt}")
    payload = {"coefficients": c.to_json(), "metric": cm.name, "points": points}
    _emit(args, payload, lines)
    return EXIT_OK


def _tensor_field(cm, name: str, n: int) -> st.TensorField:
    if name in ("g", "R", "S", "r"):
        return st.TensorField(cm.field, name)
    return st.TensorField(cm.field, parse_named(name, n), label=name)


def _pointwise_tensor(cm, name: str, pkg):
    if name == "g":
        return pkg.g
    if name == "R":
        return pkg.R
    if name == "S":
        return pkg.S
    if name == "r":
        return tc.Tensor(np.array(pkg.r), cm.dim)
    return build_tensor(parse_named(name, cm.dim), pkg)


def _pointwise_report(cond: str, cm, pts, fn, tol: float, tensor: str) -> st.ConditionReport:
    results = []
    for p in pts:
        pkg = curvature_package(cm.field, p, 0)
        rep = fn(pkg)
        pr = rep.points[0]
        pr.coords = [float(v) for v in p]
        results.append(pr)
    return st.ConditionReport(cond, results, tol, tensor=tensor, metric=cm.name)


def cmd_check(args) -> int:
    cond = args.condition
    if cond not in CONDITIONS:
        raise UsageError(f"unknown condition {cond!r}; choose from {', '.join(CONDITIONS)}")
    cm = metric_from_args(args)
    n = cm.dim
    pts = cm.sample_points(args.points, args.seed)
    tol = args.tol
    field = _tensor_field(cm, args.tensor, n)
    if cond == "flat":
        rep = st.check_flat(field, pts, tol)
    elif cond == "symmetric":
        rep = st.check_symmetric(field, pts, tol)
    elif cond == "recurrent":
        rep = st.fit_recurrence(field, pts, tol, pairing=args.pairing)
    elif cond == "generalized-recurrent":
        psi = np.array([float(v) for v in args.psi.split(",")]) if args.psi else None
        rep = st.check_generalized_recurrent_family(field, pts, args.variant, psi, tol)
    elif cond == "chaki":
        rep = st.check_chaki_pseudosymmetric(field, pts, tol)
    elif cond == "weakly-symmetric":
        rep = st.check_weak_symmetry(field, pts, args.type, tol)
    elif cond == "order2":
        rep = st.check_order2_family(field, pts, args.kind, tol)
    elif cond == "semisym":
        D = args.D or "R"

        def fn(pkg):
            return st.check_semisymmetric_type(
                _pointwise_tensor(cm, D, pkg), _pointwise_tensor(cm, args.tensor, pkg), pkg.metric, tol
            )

        rep = _pointwise_report(f"{D}-semisymmetric", cm, pts, fn, tol if tol is not None else st.TOL_FLAT, args.tensor)
    else:
        D = args.D or "R"

        def fn(pkg):
            A = None if args.A == "g" else pkg.S
            return st.fit_deszcz_L(
                _pointwise_tensor(cm, D, pkg), _pointwise_tensor(cm, args.tensor, pkg), pkg.metric, A, tol, args.pairing
            )

        rep = _pointwise_report(f"{D}-pseudosymmetric (A={args.A})", cm, pts, fn, tol if tol is not None else st.TOL_FLAT, args.tensor)

    payload = rep.to_json()
    lines = [f"{rep.condition} for {rep.tensor or args.tensor} on {cm.name}: {rep.verdict} (tolerance {rep.tolerance:g})"]
    for pt in payload["points"]:
        small = {k: v for k, v in pt["unknowns"].items() if np.size(v) <= 16}
        extra = f"  {_human_value(small)}" if small else ""
        flag = "  [degenerate]" if pt.get("degenerate") else ""
        lines.append(f"  x = {_human_value(pt['coords'])}: residual {pt['residual']:.6g}{flag}{extra}")
    _emit(args, payload, lines)
    return {"holds": EXIT_OK, "fails": EXIT_FAIL, "degenerate": EXIT_DEGENERATE}[rep.verdict]


def _int_list(s: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in s.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {s!r}") from None


def cmd_verify(args) -> int:
    dims = _int_list(args.dims)
    if not dims or any(d < 3 or d > 8 for d in dims):
        raise UsageError("--dims must be a subset of 3..8")
    seeds = _int_list(args.seeds) if args.seeds else (args.seed,) if args.seed is not None else (0, 1, 2)
    if args.points < 1:
        raise UsageError("--points must be positive")
    cfg = SuiteConfig.from_cli(dims, seeds, args.points)
    only = None
    if args.blocks:
        only = set()
        for b in args.blocks.split(","):
            only.add(int(b) if b.strip().isdigit() else b.strip())
    printer = (lambda r: print(r.line(), flush=True)) if args.format == "human" else None
    results = run_suite(cfg, only, printer)
    passed = all(r.passed for r in results)
    payload = {
        "config": {"dims": list(cfg.classifier_dims), "metric_dims": list(cfg.metric_dims), "seeds": list(seeds), "points": cfg.points},
        "blocks": [r.to_json() for r in results],
        "passed": passed,
    }
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(dumps(payload) + "\n")
    if args.format == "json":
        print(dumps(payload))
    else:
        print(f"{sum(r.passed for r in results)}/{len(results)} blocks passed")
    return EXIT_OK if passed else EXIT_FAIL


def cmd_catalog(args) -> int:
    metrics = []
    lines = ["metrics:"]
    for spec in cat.DEFAULT_NAMES:
        cm = cat.get(spec)
        entry = cm.to_json()
        if args.self_test:
            entry["self_test"] = cat.self_test(cm, args.points)
        metrics.append(entry)
        status = ""
        if args.self_test:
            status = "  self-test " + ("ok" if entry["self_test"]["ok"] else "FAILED")
        lines.append(f"  {spec:<24} {cm.description}{status}")
    lines.append("families: " + ", ".join(cat.names()))
    tensors = {name: list(PARAMETERS.get(name, ())) for name in CATALOG_NAMES}
    lines.append("tensors: " + ", ".join(f"{k}({','.join(v)})" if v else k for k, v in tensors.items()))
    payload = {"metrics": metrics, "families": cat.names(), "tensors": tensors}
    _emit(args, payload, lines)
    if args.self_test and not all(m["self_test"]["ok"] for m in metrics):
        return EXIT_FAIL
    return EXIT_OK


# ----------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("human", "json"), default="human")
    p.add_argument("--out", help="also write the JSON report to this path")


def _coeff_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--named", help="catalog tensor, e.g. C, W3*, 'C*:a0=1,a2=1/3'")
    p.add_argument("--a", help="eleven comma-separated coefficients a0..a10 (p/q allowed)")
    p.add_argument("--coeff-file", help="JSON file {n, a}")
    p.add_argument("--dim", type=int)
    p.add_argument("--verbatim", action="store_true", help="use rows exactly as printed (W*)")


def _metric_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--metric", help="catalog metric NAME[:ARGS], e.g. sphere:3:1")
    p.add_argument("--metric-file", help="JSON metric spec")
    p.add_argument("--points", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="curvclass", description="Classify and verify curvature tensors.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", help="class, traces and GCT data of a coefficient set")
    _coeff_args(p)
    _common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("eval", help="evaluate a B-tensor on a metric")
    _coeff_args(p)
    _metric_args(p)
    p.add_argument("--components", action="store_true", help="include all components in JSON")
    _common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", help="check a curvature condition at sample points")
    p.add_argument("condition", help=", ".join(CONDITIONS))
    p.add_argument("--tensor", default="R", help="g, R, S or a catalog tensor name")
    p.add_argument("--D", help="operator tensor for semisym / pseudosym (default R)")
    p.add_argument("--A", choices=("g", "S"), default="g", help="Tachibana tensor for pseudosym")
    p.add_argument("--variant", choices=st.VARIANTS, default="generalized")
    p.add_argument("--psi", help="fixed 1-form for the quasi variant, comma-separated")
    p.add_argument("--type", choices=("I", "II", "III"), default="III")
    p.add_argument("--kind", choices=("symmetric", "recurrent"), default="symmetric")
    p.add_argument("--pairing", choices=("component", "metric"), default="component")
    p.add_argument("--tol", type=float)
    _metric_args(p)
    _common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify-theorems", help="run the theorem-verification suite")
    p.add_argument("--dims", default="3,4")
    p.add_argument("--seeds", help="comma-separated seeds (default 0,1,2)")
    p.add_argument("--seed", type=int, help="single seed")
    p.add_argument("--points", type=int, default=8)
    p.add_argument("--blocks", help="run only these blocks (numbers or names)")
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("catalog", help="list built-in metrics and tensors")
    p.add_argument("--self-test", action="store_true")
    p.add_argument("--points", type=int, default=8)
    _common(p)
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, BTensorError, KeyError, ValueError, tc.TensorError, SingularMetric, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"curvclass: error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
