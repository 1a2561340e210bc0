"""Command-line surface.

Exit codes: 0 clean, 1 a verification reported violations, 2 unusable
input.  Every command prints a human report by default and a
deterministic JSON document with ``--json`` (no timestamps; input files
are identified by content digest under ``"inputs"``).
"""

import argparse
import json
import math
import os
import sys
from fractions import Fraction

from . import io as cio
from .abnormal import (certificate_text, detect_abnormal, minor_system,
                       nonvanishing_certificate)
from .algebra import StructureError, validate
from .dynamics import (ControlPath, duality_check, integrate_adjoint,
                       integrate_horizontal, integrate_normal,
                       spiral_example, uniform_grid)
from .extremal import build_family, verify_structure
from .freelie import DimensionCapError, build_free
from .io import InputError
from .poly import canonical_text
from .prolongation import prolong


def _max_dim():
    try:
        return int(os.environ.get("CARNOT_MAX_DIM", "256"))
    except ValueError:
        return 256


def _emit(report, as_json, status=0):
    if as_json:
        print(json.dumps(report, indent=2, sort_keys=True, default=str))
    else:
        _print_human(report)
    return status


def _print_human(report, indent=""):
    for key, value in report.items():
        if isinstance(value, dict):
            print(f"{indent}{key}:")
            _print_human(value, indent + "  ")
        elif isinstance(value, list) and value and isinstance(value[0], str):
            print(f"{indent}{key}:")
            for line in value:
                print(f"{indent}  {line}")
        else:
            print(f"{indent}{key}: {value}")


def _load(path):
    algebra, overrides = cio.load_algebra(path, max_dim=_max_dim())
    problems = validate(algebra)
    return algebra, overrides, problems


def _family_rows_text(family, rows=None):
    lines = []
    for j in (rows if rows is not None else family.rows()):
        parts = []
        for k in range(1, family.n + 1):
            q = family.Q.get((j, k))
            if q is not None:
                lines_text = canonical_text(q, family.weights)
                parts.append(f"v{k}*({lines_text})")
        lines.append(f"P_{j} = " + (" + ".join(parts) if parts else "0"))
    return lines


def cmd_free(args):
    try:
        algebra, words = build_free(args.rank, args.step, max_dim=_max_dim())
    except (StructureError, DimensionCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = {
        "command": "free",
        "rank": args.rank,
        "step": args.step,
        "dim": algebra.n,
        "stratum_dims": [len(algebra.stratum(d))
                         for d in range(1, algebra.s + 1)],
        "hall_words": [f"X_{w.serial} = [X_{w.left}, X_{w.right}]"
                       for w in words if w.left is not None],
    }
    if args.emit:
        cio.save_algebra(args.emit, algebra)
        report["emitted"] = args.emit
    return _emit(report, args.json)


def _prolonged(algebra, overrides, depth):
    if depth is None:
        return None
    return prolong(algebra, depth, basis_overrides=overrides or None)


def cmd_prolong(args):
    algebra, overrides, problems = _load(args.algebra)
    if problems:
        print("input algebra fails validation:", file=sys.stderr)
        for line in problems:
            print("  " + line, file=sys.stderr)
        return 2
    P = prolong(algebra, args.max_depth, basis_overrides=overrides or None)
    report = {
        "command": "prolong",
        "inputs": {args.algebra: cio.file_digest(args.algebra)},
        "stratum_dims": P.stratum_dims,
        "terminated": P.complete,
        "extended_dim": len(P.algebra.indices()),
        "validation": P.validate(),
    }
    if args.emit_basis:
        exported = {}
        for st in P.strata:
            if st.dim == 0:
                continue
            g1 = P.base.stratum(1)
            targets = P.algebra.stratum(st.degree + 1)
            exported[st.degree] = [
                [[blk.get(q, {}).get(t, Fraction(0)) for q in g1]
                 for t in targets] for blk in st.g1_blocks]
        cio.save_algebra(args.emit_basis, algebra, overrides=exported)
        report["emitted"] = args.emit_basis
    status = 1 if report["validation"] and P.complete else 0
    return _emit(report, args.json, status)


def cmd_polys(args):
    algebra, overrides, problems = _load(args.algebra)
    if problems:
        print("input algebra fails validation", file=sys.stderr)
        return 2
    target = algebra
    if args.max_depth is not None:
        target = prolong(algebra, args.max_depth,
                         basis_overrides=overrides or None)
    family = build_family(target)
    report = {
        "command": "polys",
        "inputs": {args.algebra: cio.file_digest(args.algebra)},
        "rows": _family_rows_text(family),
    }
    return _emit(report, args.json)


def cmd_verify(args):
    algebra, overrides, problems = _load(args.algebra)
    report = {
        "command": "verify",
        "inputs": {args.algebra: cio.file_digest(args.algebra)},
        "table_validation": problems,
    }
    if problems:
        report["status"] = "invalid table"
        _emit(report, args.json)
        return 1
    target = algebra
    if args.max_depth is not None:
        target = prolong(algebra, args.max_depth,
                         basis_overrides=overrides or None)
    family = build_family(target)
    residuals = verify_structure(family)
    report["residuals"] = [
        f"X_{i} P_{j} row k={k}: {canonical_text(res, family.weights)}"
        for i, j, k, res in residuals]
    report["residual_count"] = len(residuals)
    report["status"] = "ok" if not residuals else "violations"
    return _emit(report, args.json, 0 if not residuals else 1)


def cmd_minors(args):
    algebra, overrides, problems = _load(args.algebra)
    if problems:
        print("input algebra fails validation", file=sys.stderr)
        return 2
    target = prolong(algebra, args.max_depth,
                     basis_overrides=overrides or None) \
        if args.max_depth is not None else algebra
    family = build_family(target)
    system = minor_system(family)
    certs = nonvanishing_certificate(system)
    report = {
        "command": "minors",
        "inputs": {args.algebra: cio.file_digest(args.algebra)},
        "rows": system.row_indices,
        "columns": system.col_indices,
        "minor_count": len(system.minors),
        "nonzero_minors": sum(1 for c in certs if c is not None),
        "certificates": certificate_text(system, certs),
    }
    return _emit(report, args.json)


def cmd_detect(args):
    algebra, overrides, problems = _load(args.algebra)
    if problems:
        print("input algebra fails validation", file=sys.stderr)
        return 2
    times, points, lams = cio.load_samples(args.curve, algebra.n)
    target = prolong(algebra, args.max_depth,
                     basis_overrides=overrides or None) \
        if args.max_depth is not None else algebra
    family = build_family(target)
    result = detect_abnormal(family, points, tol=args.tol)
    report = {
        "command": "detect",
        "inputs": {args.algebra: cio.file_digest(args.algebra),
                   args.curve: cio.file_digest(args.curve)},
        "exact": result["exact"],
        "corank_lower_bound": result["corank_lower_bound"],
        "basis": [[cio.format_rational(c) if result["exact"] else float(c)
                   for c in vec] for vec in result["basis"]],
        "warnings": result["warnings"],
    }
    if "singular_values" in result:
        report["singular_values"] = result["singular_values"]
    return _emit(report, args.json)


def _parse_vector(text, n):
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != n:
        raise InputError(f"expected {n} comma-separated entries")
    return [cio.parse_scalar(p) for p in parts]


def _parse_controls(text, r):
    names = {k: getattr(math, k) for k in ("sin", "cos", "tan", "exp", "log",
                                           "sqrt", "pi", "e")}
    exprs = [p.strip() for p in text.split(";")]
    if len(exprs) != r:
        raise InputError(f"expected {r} semicolon-separated control exprs")
    codes = [compile(e, "<control>", "eval") for e in exprs]

    def func(t):
        env = dict(names)
        env["t"] = t
        return [eval(code, {"__builtins__": {}}, env) for code in codes]

    return ControlPath(r, func=func)


def cmd_integrate(args):
    algebra, overrides, problems = _load(args.algebra)
    if problems:
        print("input algebra fails validation", file=sys.stderr)
        return 2
    n = algebra.n
    grid = uniform_grid(args.t0, args.t1, args.step)
    x0 = _parse_vector(args.x0, n) if args.x0 else [0.0] * n
    try:
        if args.mode == "normal":
            if not args.lambda0:
                raise InputError("--lambda0 is required for mode normal")
            lam0 = _parse_vector(args.lambda0, n)
            curve = integrate_normal(algebra, lam0, x0, grid)
            family = build_family(algebra)
            drift = duality_check(family, curve)
            extra = {"prime_integral_drift": max(drift.values())}
        elif args.mode == "horizontal":
            if not args.controls:
                raise InputError("--controls is required for mode horizontal")
            controls = _parse_controls(args.controls, algebra.r)
            curve = integrate_horizontal(algebra, controls, x0, grid)
            extra = {}
        else:
            if not (args.controls and args.lambda0):
                raise InputError(
                    "--controls and --lambda0 are required for mode adjoint")
            controls = _parse_controls(args.controls, algebra.r)
            curve = integrate_horizontal(algebra, controls, x0, grid)
            lam0 = _parse_vector(args.lambda0, n)
            curve = integrate_adjoint(algebra, curve, lam0)
            family = build_family(algebra)
            drift = duality_check(family, curve)
            extra = {"prime_integral_drift": max(drift.values())}
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = {
        "command": "integrate",
        "mode": args.mode,
        "inputs": {args.algebra: cio.file_digest(args.algebra)},
        "steps": len(grid) - 1,
        "endpoint": [float(c) for c in curve.gamma[-1]],
    }
    report.update(extra)
    if args.emit:
        with open(args.emit, "w") as fh:
            fh.write(cio.curve_to_csv(curve, n))
        report["emitted"] = args.emit
    return _emit(report, args.json)


def cmd_spiral(args):
    report = spiral_example(samples_per_side=args.samples // 2,
                            puncture=args.puncture, tol=args.tol)
    report = {"command": "spiral", **report}
    report["covector_support"] = {
        str(k): cio.format_rational(c)
        for k, c in report["covector_support"].items()}
    ok = report["goh_ok"] and report["origin_exact_zero"] \
        and report["control_bound_ok"]
    return _emit(report, args.json, 0 if ok else 1)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="carnotpoly",
        description="exact toolkit for stratified Lie groups, extremal "
                    "polynomials, and abnormal extremals")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("free", help="build a free nilpotent algebra")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--step", type=int, required=True)
    p.add_argument("--emit", help="write the AlgebraFile JSON here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_free)

    p = sub.add_parser("prolong", help="compute the graded prolongation")
    p.add_argument("algebra")
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--emit-basis",
                   help="write the algebra plus the stratum bases "
                        "(prolongation_basis section) here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_prolong)

    p = sub.add_parser("polys", help="print the extremal polynomial family")
    p.add_argument("algebra")
    p.add_argument("--max-depth", type=int, default=None,
                   help="prolong to this depth first (default: base only)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_polys)

    p = sub.add_parser("verify", help="check the structure formulas exactly")
    p.add_argument("algebra")
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("minors", help="minor determinants and certificates")
    p.add_argument("algebra")
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_minors)

    p = sub.add_parser("detect", help="abnormal detection on curve samples")
    p.add_argument("algebra")
    p.add_argument("curve", help="CSV with header t,x1..xn")
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("integrate", help="RK4 integrators")
    p.add_argument("algebra")
    p.add_argument("--mode", choices=("normal", "horizontal", "adjoint"),
                   required=True)
    p.add_argument("--lambda0", help="comma-separated dual start")
    p.add_argument("--x0", help="comma-separated start point")
    p.add_argument("--controls",
                   help="semicolon-separated expressions in t, e.g. 'cos(t);sin(t)'")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--emit", help="write the curve CSV here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("spiral", help="the 64-dimensional spiral Goh example")
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--puncture", type=float, default=1e-6)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_spiral)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
