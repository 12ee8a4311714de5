"""Batch command surface: deterministic CSV/JSON emission for every
computation in the package.

Exit statuses: 0 success, 1 usage errors, 2 domain errors (divergence,
poles, ceilings), 3 capability errors (unsupported family, caps).  The
seed defaults to REPZETA_SEED or the documented constant.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys

from . import arith, probgen, repcount, wedderburn, zeta
from .errors import ParameterError, RepzetaError, ShapeError

_MOD = "cli"

DEFAULT_SEED = probgen.DEFAULT_SEED


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParameterError(_MOD, "usage", message)


def emit_table(rows: list[dict], fmt: str) -> bytes:
    """CSV (header + quoted rows) or JSON array; UTF-8, newline-terminated."""
    if fmt not in ("csv", "json"):
        raise ParameterError(_MOD, "bad-format", f"unknown format '{fmt}'")
    rows = list(rows)
    if fmt == "json":
        return (json.dumps(rows, sort_keys=True) + "\n").encode("utf-8")
    if not rows:
        return b""
    header = list(rows[0].keys())
    for r in rows:
        if list(r.keys()) != header:
            raise ShapeError(_MOD, "ragged-rows", "rows do not share a header")
    import csv

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(r)
    return buf.getvalue().encode("utf-8")


def _load_spec(arg: str) -> repcount.GroupSpec:
    if arg.strip().startswith("{"):
        return repcount.from_json(arg)
    with open(arg, "r", encoding="utf-8") as fh:
        return repcount.from_json(fh.read())


def _write_out(data: bytes, path):
    if path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(data)


def _emit_obj(obj, fmt, out):
    if fmt == "json":
        _write_out((json.dumps(obj, sort_keys=True) + "\n").encode("utf-8"), out)
    else:
        rows = obj if isinstance(obj, list) else [obj]
        _write_out(emit_table(rows, "csv"), out)


def build_parser() -> _Parser:
    ap = _Parser(prog="repzeta", description="representation zeta computations")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (REPZETA_SEED overrides default)")
    common.add_argument("--threads", type=int, default=1, help="worker cap (advisory)")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    c = add("count", help="absolutely irreducible / irreducible counts")
    c.add_argument("--spec", required=True)
    c.add_argument("--p", type=int, required=True)
    c.add_argument("--j", type=int, required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--mode", choices=("exact", "bound"), default="exact")
    c.add_argument("--irr", action="store_true", help="plain irreducible counts")

    z = add("zeta", help="truncated log zeta with tail bound")
    z.add_argument("--spec", required=True)
    z.add_argument("--s", type=float, required=True)
    z.add_argument("--X", type=int, required=True)
    z.add_argument("--c", type=float, default=None, help="growth constant for the tail bound")
    z.add_argument("--allow-divergent", action="store_true")

    lf = add("local-factor", help="exact local log coefficients u_m")
    lf.add_argument("--spec", required=True)
    lf.add_argument("--p", type=int, required=True)
    lf.add_argument("--D", type=int, required=True)

    ra = add("rationality", help="detect a rational local factor")
    ra.add_argument("--spec", required=True)
    ra.add_argument("--p", type=int, required=True)
    ra.add_argument("--D", type=int, required=True)
    ra.add_argument("--max-order", type=int, default=None)

    ab = add("abscissa", help="partial-sum slope estimate")
    ab.add_argument("--spec", required=True)
    ab.add_argument("--X", type=int, required=True)
    ab.add_argument("--window", default="0.5,1.0")
    ab.add_argument("--samples", type=int, default=32)

    co = add("constants", help="named constants and growth profiles")
    co.add_argument("--id", required=True)
    co.add_argument("--params", default="{}", help="JSON object of parameters")

    vp = add("verify-prob", help="generation-probability identity report")
    vp.add_argument("--spec", required=True)
    vp.add_argument("--l", type=int, required=True, dest="ell")
    vp.add_argument("--X", type=int, required=True)
    vp.add_argument("--trials", type=int, default=10000)

    au = add("audit", help="abscissa inequality audit")

    de = add("decompose", help="Wedderburn data of F_q[G]")
    de.add_argument("--group", default=None, help="named group (s3, s4, c4, ...)")
    de.add_argument("--degree", type=int, default=None)
    de.add_argument("--gens", default=None, help="JSON list of permutations")
    de.add_argument("--q", type=int, required=True)
    return ap


def run(args) -> int:
    fmt, out = args.format, args.out
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("REPZETA_SEED", DEFAULT_SEED))
    cmd = args.command
    if cmd == "count":
        spec = _load_spec(args.spec)
        q = repcount.CountQuery(args.p, args.j, args.n)
        res = repcount.count_irr(spec, q) if args.irr else repcount.count_abs_irr(spec, q, args.mode)
        _emit_obj({"value": res.value, "exactness": res.exactness}, fmt, out)
    elif cmd == "zeta":
        spec = _load_spec(args.spec)
        res = zeta.log_zeta_truncated(spec, args.s, args.X, args.c, args.allow_divergent)
        _emit_obj(
            {"value": res.value, "tail_bound": res.tail_bound, "diverging": res.diverging}, fmt, out
        )
    elif cmd == "local-factor":
        spec = _load_spec(args.spec)
        u = zeta.local_log_coeffs(spec, args.p, args.D)
        if fmt == "csv":
            _emit_obj([{"m": m + 1, "u": v} for m, v in enumerate(u)], fmt, out)
        else:
            _emit_obj({"p": args.p, "u": u}, fmt, out)
    elif cmd == "rationality":
        spec = _load_spec(args.spec)
        u = zeta.local_log_coeffs(spec, args.p, args.D)
        res = zeta.detect_rational_local_factor(u, args.max_order)
        _emit_obj(
            {
                "status": res.status,
                "order": res.order,
                "alphas": list(res.alphas),
                "betas": list(res.betas),
                "numerator": list(res.numerator),
                "denominator": list(res.denominator),
                "diagnostics": {k: list(v) if isinstance(v, (list, tuple)) else v
                                for k, v in res.diagnostics.items()},
            },
            fmt,
            out,
        )
    elif cmd == "abscissa":
        spec = _load_spec(args.spec)
        lo, hi = (float(x) for x in args.window.split(","))
        res = zeta.estimate_abscissa(spec, args.X, (lo, hi), args.samples)
        _emit_obj(
            {
                "value": res.value,
                "x_lo": res.window[0],
                "x_hi": res.window[1],
                "residual": res.residual,
                "samples": res.samples,
            },
            fmt,
            out,
        )
    elif cmd == "constants":
        try:
            params = json.loads(args.params)
        except json.JSONDecodeError as exc:
            raise ParameterError(_MOD, "bad-params", f"bad params JSON: {exc}") from exc
        val = arith.named_constant(arith.ConstantRequest(args.id, params))
        if isinstance(val, arith.GrowthProfile):
            rows = [
                {"k": r.k, "pp_min": r.ppmin, "f": r.value, "running_inf": r.running_inf}
                for r in val.rows
            ]
            if fmt == "json":
                _emit_obj(
                    {"id": args.id, "rows": rows, "infimum": val.infimum, "certified": val.certified},
                    fmt,
                    out,
                )
            else:
                _emit_obj(rows, fmt, out)
        else:
            _emit_obj({"id": args.id, "value": val}, fmt, out)
    elif cmd == "verify-prob":
        spec = _load_spec(args.spec)
        rep = probgen.verify_reciprocal_identity(spec, args.ell, args.X, args.trials, seed)
        if fmt == "csv":
            _emit_obj([rep.csv_row()], fmt, out)
        else:
            _emit_obj(rep.to_obj(), fmt, out)
    elif cmd == "audit":
        entries, relations = zeta.default_audit_table()
        violations = zeta.abscissa_bound_audit(entries, relations)
        rows = [{"relation": v.relation, "detail": v.detail, "slack": v.slack} for v in violations]
        _emit_obj({"violations": rows, "ok": not rows} if fmt == "json" else rows, fmt, out)
    elif cmd == "decompose":
        if args.group:
            degree, gens = wedderburn.named_group(args.group)
        elif args.degree and args.gens:
            degree, gens = args.degree, json.loads(args.gens)
        else:
            raise ParameterError(_MOD, "usage", "need --group or (--degree and --gens)")
        G = wedderburn.FiniteGroupPresentation(degree, gens)
        dec = wedderburn.decompose_group_algebra(G, args.q)
        _emit_obj({"q": args.q, "components": [[n, k] for n, k in dec.components]}, fmt, out)
    else:  # pragma: no cover
        raise ParameterError(_MOD, "usage", f"unknown command {cmd}")
    return 0


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return run(args)
    except RepzetaError as exc:
        print(str(exc), file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"cli.missing-file: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
