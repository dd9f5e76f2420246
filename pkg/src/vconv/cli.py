"""Command line front end: ``vconv <subcommand> [flags]``.

Exit codes: 0 pass, 1 fail, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

DEFAULT_SEED = 0
DEFAULT_ORDER = 16
DEFAULT_TOL = 1e-6

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("VCONV_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"VCONV_SEED must be an integer, got {env!r}") from None


def _config(args) -> dict:
    return {
        "command": args.command,
        "n": args.n,
        "k": args.k,
        "d": getattr(args, "d", None),
        "seed": _seed(args),
        "quad_order": args.quad_order,
        "tol": args.tol,
        "format": args.format,
    }


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    return str(obj)


def _rows_to_csv(rows: list) -> str:
    buf = io.StringIO()
    keys = list(rows[0].keys()) if rows else []
    writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (json.dumps(v, default=_jsonable) if isinstance(v, (list, dict)) else v) for k, v in r.items()})
    return buf.getvalue()


def _pretty(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        lines = []
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(_pretty(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {json.dumps(v, default=_jsonable)}")
        return "\n".join(lines)
    if isinstance(obj, list):
        return "\n".join(
            (_pretty(v, indent) if isinstance(v, dict) else f"{pad}- {json.dumps(v, default=_jsonable)}")
            + ("\n" + pad + "--" if isinstance(v, dict) else "")
            for v in obj
        )
    return f"{pad}{obj}"


def _emit(report: dict, args) -> None:
    report = {"config": _config(args), **report, "timestamp": datetime.now(timezone.utc).isoformat()}
    if args.format == "json":
        text = json.dumps(report, indent=2, default=_jsonable) + "\n"
    elif args.format == "csv":
        rows = report.get("rows")
        if rows is None:
            raise UsageError("csv output is only available for tabular commands")
        text = _rows_to_csv(rows)
    else:
        text = _pretty(json.loads(json.dumps(report, default=_jsonable))) + "\n"
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc}") from None
    else:
        sys.stdout.write(text)


def _shape(args):
    from .poly import MatShape

    if args.n is None or args.k is None:
        raise UsageError("--n and --k are required")
    try:
        return MatShape(args.n, args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _read_poly(path: str, shape):
    from .poly import PolyParseError, parse_poly

    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    try:
        return parse_poly(text.strip(), shape)
    except PolyParseError as exc:
        raise UsageError(f"{path}: parse error at position {exc.position}: {exc}") from None


# subcommands


def cmd_dim_table(args) -> int:
    from .suites import suite_dimension

    n_max = args.n if args.n is not None else 5
    if not 1 <= n_max <= 6:
        raise UsageError("dim-table needs 1 <= --n <= 6")
    rep = suite_dimension(n_max)
    rep.pop("runtime_s", None)
    _emit(rep, args)
    return EXIT_PASS if rep["verdict"] else EXIT_FAIL


def cmd_groebner(args) -> int:
    from .minors import buchberger_check, build_basis, side_condition_check

    basis = build_basis(_shape(args))
    rep = {"basis": basis.to_dict()}
    ok = True
    if args.buchberger:
        bb = buchberger_check(basis)
        side = side_condition_check(basis)
        rep["buchberger"] = {k: bb[k] for k in ("pairs", "max_reduction_length", "all_reduced")}
        rep["side_condition"] = {k: side[k] for k in ("monomials_checked", "holds", "cross_condition_holds")}
        ok = bb["all_reduced"] and side["holds"]
        print(f"pairs={bb['pairs']} all_reduced={bb['all_reduced']}", file=sys.stderr)
    _emit(rep, args)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_divide(args) -> int:
    from .minors import build_basis, divide

    shape = _shape(args)
    f = _read_poly(args.file, shape)
    cert = divide(f, build_basis(shape))
    _emit({"certificate": cert.to_dict(), "member": cert.remainder.is_zero()}, args)
    return EXIT_PASS


def cmd_membership(args) -> int:
    from .minors import build_basis, membership

    shape = _shape(args)
    f = _read_poly(args.file, shape)
    member = membership(f, build_basis(shape))
    _emit({"polynomial": str(f), "member": member}, args)
    return EXIT_PASS


def _load_valuation(args):
    from .suites import standard_valuation
    from .valuation import SmoothValuation

    if getattr(args, "valuation", None):
        try:
            data = json.loads(Path(args.valuation).read_text(encoding="utf-8"))
            return SmoothValuation.from_dict(data, seed=_seed(args))
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot load valuation {args.valuation}: {exc}") from None
    shape = _shape(args)
    return standard_valuation(shape.n, shape.k)


def cmd_series(args) -> int:
    from .fourier import series_of_F
    from .minors import build_basis, divide

    mu = _load_valuation(args)
    order = args.order if args.order is not None else 2 * mu.k + 4
    S = series_of_F(mu, order)
    basis = build_basis(mu.shape)
    members = {str(m): divide(S.slice(m), basis).remainder.is_zero() for m in range(order + 1)}
    _emit({"series": S.to_dict(), "slice_membership": members}, args)
    return EXIT_PASS if all(members.values()) else EXIT_FAIL


def cmd_wd(args) -> int:
    from .fourier import wd_membership
    from .suites import wd_ladder_valuation

    shape = _shape(args)
    d_max = args.d if args.d is not None else 2
    rows = []
    ok = True
    for d in range(d_max + 1):
        mu = wd_ladder_valuation(shape.n, shape.k, d)
        inside, outside = wd_membership(mu, d), wd_membership(mu, d + 1)
        row = {"d": d, "in_Wd": inside.verdict, "in_Wd_plus_1": outside.verdict, "codimension": inside.codimension}
        ok = ok and inside.verdict and not outside.verdict
        rows.append(row)
    _emit({"rows": rows, "verdict": ok}, args)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_envelope(args) -> int:
    from .fourier import SupportBody, pws_envelope
    from .suites import default_envelope_valuation

    shape = _shape(args)
    mu, A = default_envelope_valuation(shape.n, shape.k)
    if args.body:
        try:
            A = SupportBody.parse(args.body, shape.n)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    N_list = [int(x) for x in args.N.split(",")] if args.N else [0, 1, 2, 3, 4]
    rep = pws_envelope(mu, A, N_list, _seed(args))
    _emit(rep, args)
    return EXIT_PASS if rep["verdict"] else EXIT_FAIL


def cmd_verify(args) -> int:
    from . import suites

    name = args.suite
    if name not in suites.SUITES:
        raise UsageError(f"unknown suite {name!r}; choose from {', '.join(suites.SUITES)}")
    seed = _seed(args)
    tol = args.tol
    order = args.quad_order
    shape = None
    if args.n is not None and args.k is not None:
        shape = ((args.n, args.k),)
    kwargs: dict = {}
    if name == "fourier":
        kwargs = dict(seed=seed, order=order, tol=tol if tol is not None else DEFAULT_TOL)
        if shape:
            kwargs["shapes"] = shape
    elif name == "three-path":
        kwargs = dict(seed=seed, order=order, tol=tol if tol is not None else 1e-5)
        if shape:
            kwargs["shapes"] = shape
    elif name == "gram":
        kwargs = dict(seed=seed, order=order, tol=tol if tol is not None else 1e-5)
        if shape:
            kwargs["shapes"] = shape
    elif name == "wd":
        if args.n is not None and args.k is not None:
            d_max = args.d if args.d is not None else 1
            kwargs["cases"] = [(args.n, args.k, d) for d in range(d_max + 1)]
    elif name == "envelope":
        from .fourier import SupportBody

        if shape:
            kwargs["shapes"] = shape
        kwargs["seed"] = seed
        if args.body:
            n = args.n if args.n is not None else 1
            kwargs["shapes"] = kwargs.get("shapes", ((n, n),))
            try:
                kwargs["body"] = SupportBody.parse(args.body, n)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
    elif name in ("groebner", "series"):
        if shape:
            kwargs["shapes"] = shape
    elif name == "division":
        kwargs["seed"] = seed
        if shape:
            kwargs["shapes"] = shape
    elif name == "dimension":
        if args.n is not None:
            kwargs["n_max"] = args.n
    elif name == "valuation-properties":
        kwargs = dict(seed=seed, order=order)
    elif name == "mixed-discriminant":
        kwargs["seed"] = seed
        if args.n is not None:
            kwargs["n_max"] = args.n
    rep = suites.run_suite(name, **kwargs)
    rep.pop("runtime_s", None)
    _emit(rep, args)
    print(f"{name}: {'PASS' if rep['verdict'] else 'FAIL'}", file=sys.stderr)
    return EXIT_PASS if rep["verdict"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--n", type=int, help="dimension n (n_max for dim-table)")
    common.add_argument("--k", type=int, help="degree k")
    common.add_argument("--d", type=int, help="W_d index")
    common.add_argument("--seed", type=int, help="seed (default: $VCONV_SEED or 0)")
    common.add_argument("--quad-order", type=int, default=DEFAULT_ORDER, help="base quadrature order")
    common.add_argument("--tol", type=float, default=None, help="numeric tolerance override")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "pretty"), default="json")

    parser = _Parser(prog="vconv", description="Smooth valuations on convex functions: algebra and Fourier checks.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sub.add_parser("dim-table", parents=[common], help="dimension law table").set_defaults(func=cmd_dim_table)
    p = sub.add_parser("groebner", parents=[common], help="dump the Groebner basis")
    p.add_argument("--buchberger", action="store_true", help="also run the S-pair check")
    p.set_defaults(func=cmd_groebner)
    for name, func, text in (("divide", cmd_divide, "division certificate"), ("membership", cmd_membership, "membership verdict")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("file", help="polynomial file ('-' for stdin)")
        p.set_defaults(func=func)
    p = sub.add_parser("series", parents=[common], help="power series of F(mu)")
    p.add_argument("--order", type=int)
    p.add_argument("--valuation", help="valuation JSON file")
    p.set_defaults(func=cmd_series)
    sub.add_parser("wd", parents=[common], help="W_d ladder").set_defaults(func=cmd_wd)
    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", help="one of: " + ", ".join(__import__("vconv.suites", fromlist=["SUITES"]).SUITES))
    p.add_argument("--body", help="support body, e.g. ball:1.5 or box:1")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("envelope", parents=[common], help="PWS envelope report")
    p.add_argument("--body", help="support body, e.g. ball:1.5 or box:1")
    p.add_argument("--N", help="comma separated list of N")
    p.set_defaults(func=cmd_envelope)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"vconv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
