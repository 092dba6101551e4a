"""Command-line front end: ``ampbench <subcommand> [flags]``.

Exit codes: 0 success, 1 a verification check failed, 2 usage or domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import closed_forms as cf
from .a_operator import AOperatorSpec, build_a, cross_norm_numeric, operator_norm_numeric
from .channels import (
    TruncationError,
    apply_squeezer,
    filter_fidelity_exact,
    squeezer_fidelity_pointwise,
    verify_mp_attenuated_equivalence,
)
from .fock_core import ConvergenceError, coherent_state, expectation
from .montecarlo import mc_cft, mc_squeezer
from .verify import SUITES, run_suite

QUANTITIES = ("f_det", "f_prob", "cft", "norm_gap")
SWEEP_FIELDS = ("g", "lambda", "quantity", "value", "meta")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def fmt(value):
    """12 significant digits; integers and strings pass through."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.12g}")
    return value


def _emit(records, fmt_name, out=None, fields=None):
    records = [{k: fmt(v) for k, v in rec.items()} for rec in records]
    if fmt_name == "json":
        text = json.dumps(records if len(records) != 1 or fields else records[0], indent=None)
        text += "\n"
    else:
        fields = list(fields or records[0].keys())
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(records)
        text = buf.getvalue()
    if out:
        try:
            with open(out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


# -- subcommands ----------------------------------------------------------------


def cmd_closed_form(args):
    _require(args, "g", "lam")
    g, lam = args.g, args.lam
    f_det, r_opt = cf.f_squeeze_opt(g, lam)
    rec = {"g": g, "lambda": lam, "f_det": f_det, "r_opt": r_opt,
           "f_prob": cf.f_prob(g, lam), "cft": cf.cft(g, lam)}
    if args.r is not None:
        rec["r"] = args.r
        rec["f_squeeze_r"] = cf.f_squeeze_r(g, lam, args.r)
    if args.x is not None:
        rec["x"] = args.x
        rec["norm_a_closed"] = cf.norm_a_closed(g, lam, args.x)
    if args.N is not None:
        x = args.x if args.x is not None else cf.filter_x(g, lam)
        res = filter_fidelity_exact(g, lam, x, args.N)
        rec.update({"N": args.N, "filter_x": x, "filter_fidelity": res.conditional_fidelity,
                    "filter_success_probability": res.success_probability})
    _emit([rec], args.format, args.out)
    return EXIT_OK


def cmd_simulate(args):
    _require(args, "g", "lam")
    g, lam, dim = args.g, args.lam, args.dim
    r = args.r if args.r is not None else cf.f_squeeze_opt(g, lam)[1]
    alpha = complex(args.alpha)
    psi = coherent_state(alpha, dim)
    out, deficit = apply_squeezer(np.outer(psi, psi.conj()), r, args.anc_dim,
                                  max_deficit=args.max_deficit, return_deficit=True)
    rec = {"g": g, "lambda": lam, "r": r, "alpha": str(alpha), "dim": dim,
           "anc_dim": args.anc_dim or dim,
           "simulated_fidelity": expectation(out, coherent_state(g * alpha, dim)),
           "pointwise_fidelity": float(squeezer_fidelity_pointwise(g, r, alpha)),
           "trace_deficit": deficit}
    if lam <= g - 1:
        rec["mp_equivalence_trace_distance"] = verify_mp_attenuated_equivalence(
            g, lam, alpha, dim, args.anc_dim)
    _emit([rec], args.format, args.out)
    return EXIT_OK


def cmd_norms(args):
    _require(args, "g", "lam")
    g, lam = args.g, args.lam
    x = args.x if args.x is not None else cf.optimal_sigma_x(g, lam)
    tol = args.tol if args.tol is not None else 1e-3
    if args.dim is not None:
        res = operator_norm_numeric(AOperatorSpec(g, lam, x, args.dim, args.dim), adaptive=False)
    else:
        res = operator_norm_numeric(AOperatorSpec(g, lam, x), tol=tol)
    rec = {"g": g, "lambda": lam, "x": x, "operator_norm": res.value, "dim": res.dim_out,
           "truncation_warning": res.truncation_warning}
    try:
        rec["norm_a_closed"] = cf.norm_a_closed(g, lam, x)
    except cf.DomainError as exc:
        rec["norm_a_closed"] = f"n/a ({exc})"
    if args.cross:
        xc = 1 / (lam + 1)
        d = args.dim or 40
        A = build_a(AOperatorSpec(g, lam, xc, d, d))
        cn = cross_norm_numeric(A, restarts=args.restarts, seed=args.seed)
        rec.update({"cross_norm_x": xc, "cross_norm_lower_bound": cn.value,
                    "cross_norm_restarts": cn.restarts_used, "cft": cf.cft(g, lam),
                    "seed": args.seed})
    _emit([rec], args.format, args.out)
    return EXIT_OK


def cmd_mc(args):
    _require(args, "g", "lam")
    g, lam, n, seed = args.g, args.lam, args.samples, args.seed
    r = args.r if args.r is not None else cf.f_squeeze_opt(g, lam)[1]
    a = mc_cft(g, lam, n, seed)
    b = mc_squeezer(g, lam, r, n, seed)
    rec = {"g": g, "lambda": lam, "samples": n, "seed": seed,
           "mc_cft": a.mean, "mc_cft_stderr": a.stderr, "cft": cf.cft(g, lam),
           "r": r, "mc_squeezer": b.mean, "mc_squeezer_stderr": b.stderr,
           "f_squeeze_r": cf.f_squeeze_r(g, lam, r)}
    _emit([rec], args.format, args.out)
    return EXIT_OK


def _sweep_point(g, lam, quantity):
    meta = ""
    if quantity == "f_det":
        value, r_opt = cf.f_squeeze_opt(g, lam)
        meta = f"r_opt={r_opt:.12g}"
    elif quantity == "f_prob":
        value = cf.f_prob(g, lam)
    elif quantity == "cft":
        value = cf.cft(g, lam)
    else:
        value = cf.norm_gap(g, lam)
    return {"g": g, "lambda": lam, "quantity": quantity, "value": value, "meta": meta}


def _parse_list(text, name):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"--{name} expects comma-separated numbers") from exc
    if not values:
        raise UsageError(f"--{name} must not be empty")
    return values


def cmd_sweep(args):
    gs = _parse_list(args.g_values, "g-values")
    lams = _parse_list(args.lambda_values, "lambda-values")
    quantities = [q.strip() for q in args.quantities.split(",") if q.strip()]
    bad = [q for q in quantities if q not in QUANTITIES]
    if bad or not quantities:
        raise UsageError(f"unknown quantities {bad}; choose from {', '.join(QUANTITIES)}")
    if any(g < 1 for g in gs) or any(lam < 0 for lam in lams):
        raise UsageError("sweep requires all g >= 1 and lambda >= 0")
    grid = [(g, lam, q) for g in gs for lam in lams for q in quantities]
    threads = max(1, int(os.environ.get("AMPBENCH_THREADS", "1") or 1))
    with ThreadPoolExecutor(threads) as pool:
        rows = list(pool.map(lambda p: _sweep_point(*p), grid))
    _emit(rows, args.format, args.out, fields=SWEEP_FIELDS)
    return EXIT_OK


def cmd_verify(args):
    rows = run_suite(args.suite, tol=args.tol, seed=args.seed)
    records = []
    for row in rows:
        rec = row.as_dict()
        rec["seed"] = args.seed
        records.append(rec)
    _emit(records, args.format, args.out, fields=list(records[0].keys()))
    failed = [r for r in rows if not r.passed]
    for r in failed:
        print(f"FAIL {r.name}: computed={r.computed:.12g} target={r.target:.12g} "
              f"tol={r.tolerance:.3g} ({r.mode})", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


# -- parser ------------------------------------------------------------------------


def _add_common(p, fmt="json", dim=None):
    p.add_argument("--g", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--x", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--dim", type=int, default=dim)
    p.add_argument("--anc-dim", type=int)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tol", type=float)
    p.add_argument("--format", choices=("csv", "json"), default=fmt)
    p.add_argument("--out")
    return p


def build_parser():
    parser = argparse.ArgumentParser(prog="ampbench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = _add_common(sub.add_parser("closed-form", help="closed-form fidelities"))
    p.set_defaults(func=cmd_closed_form)

    p = _add_common(sub.add_parser("simulate", help="truncated Fock-space squeezer run"), dim=60)
    p.add_argument("--alpha", default="0.5", help="coherent input amplitude (Python complex)")
    p.add_argument("--max-deficit", type=float, default=1e-4)
    p.set_defaults(func=cmd_simulate)

    p = _add_common(sub.add_parser("norms", help="operator and cross norms of A"))
    p.add_argument("--cross", action="store_true", help="also run the cross-norm ascent")
    p.add_argument("--restarts", type=int, default=20)
    p.set_defaults(func=cmd_norms)

    p = _add_common(sub.add_parser("mc", help="Monte-Carlo fidelity estimates"))
    p.set_defaults(func=cmd_mc)

    p = _add_common(sub.add_parser("sweep", help="closed forms over a (g, lambda) grid"), "csv")
    p.add_argument("--g-values", required=True, help="comma-separated gains")
    p.add_argument("--lambda-values", required=True, help="comma-separated lambdas")
    p.add_argument("--quantities", default=",".join(QUANTITIES))
    p.set_defaults(func=cmd_sweep)

    p = _add_common(sub.add_parser("verify", help="run verification suites"), "csv")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ValueError, ArithmeticError, TruncationError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry():  # console script
    sys.exit(main())


if __name__ == "__main__":
    entry()
