"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 validation error (bad model file,
failed hypothesis, wrong model kind), 3 numerical failure or a reference
comparison outside tolerance.

The optimizer tolerance defaults to 1e-10 and can be overridden with the
``RATE_TOL`` environment variable.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .closed_forms import closed_form_gaussian, gaussian_wedge
from .errors import (BracketFailure, CapacityExceeded, Degenerate, DomainError,
                     HypothesisViolation, Infeasible, NoConvergence, NotCoercive,
                     NotSalient, ParseError)
from .geometry import distance_to_cone, dual_cone, project_onto_cone
from .models import QUADRANT, QUADRANT_MODELS, load_model
from .montecarlo import McConfig, survival_mc
from .oracle_dp import LatticeModel, extract_rate, survival_dp, survival_limit_estimate
from .rate import DEFAULT_TOL, compute_rate

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERIC = 0, 1, 2, 3
TABLE_TOL = 1e-9
GAUSS_TOL = 1e-6

VALIDATION_ERRORS = (ParseError, HypothesisViolation, Infeasible, NotSalient,
                     DomainError, ValueError, OSError)
NUMERIC_ERRORS = (NoConvergence, NotCoercive, BracketFailure, CapacityExceeded, Degenerate)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def rate_tol():
    raw = os.environ.get("RATE_TOL")
    if not raw:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise ParseError(f"RATE_TOL={raw!r} is not a number") from None
    if not tol > 0:
        raise ParseError("RATE_TOL must be positive")
    return tol


def _provenance(spec=None):
    doc = {"tool": "pyramidrate", "version": __version__}
    if spec is not None:
        doc["model_sha256"] = spec.digest
    return doc


def _fmt(x, digits=12):
    if x is None:
        return "-"
    return f"{x:.{digits}g}"


def _vec(v):
    return "(" + ", ".join(_fmt(float(c), 8) for c in v) + ")"


def _emit(doc, as_json, text):
    if as_json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(text)


# ---------------------------------------------------------------------------
# rate
# ---------------------------------------------------------------------------

def cmd_rate(args):
    spec = load_model(args.model)
    report = compute_rate(spec.distribution, spec.cone, tol=rate_tol())
    doc = {"provenance": _provenance(spec), "report": report.as_dict()}
    lines = [f"# pyramidrate {__version__}  model {spec.digest[:16]}",
             f"drift      {_vec(report.drift)}  ({report.drift_class.value})",
             f"branch     {report.branch}"]
    if report.branch == "thm1":
        lines.append(f"{'u':<28}{'s_u':>18}{'rho_u':>18}{'kkt':>10}{'root':>10}  z*")
        for r in report.records:
            if r.in_s_prime:
                lines.append(f"{_vec(r.u):<28}{_fmt(r.s_u):>18}{_fmt(r.rho_u):>18}"
                             f"{r.kkt_residual:>10.1e}{r.root_residual:>10.1e}  {_vec(r.zstar)}")
            else:
                lines.append(f"{_vec(r.u):<28}{'(not in S prime)':>18}")
        lines.append(f"argmax     {report.argmax}  maximizers {report.maximizers}")
    else:
        lines.append(f"z*         {_vec(report.zstar)}  kkt {report.kkt_residual:.1e}")
    lines.append(f"rho        {report.rho!r}")
    _emit(doc, args.json, "\n".join(lines))
    return EXIT_OK


# ---------------------------------------------------------------------------
# table1
# ---------------------------------------------------------------------------

def quadrant_rows(tol=DEFAULT_TOL):
    """Recompute every built-in quadrant model and compare with its reference values."""
    from .geometry import Pyramid

    cone = Pyramid(QUADRANT)
    rows = []
    for ref in QUADRANT_MODELS:
        rep = compute_rate(ref.distribution(), cone, tol=tol)
        a, b = rep.records
        got = {"s10": a.s_u, "rho10": a.rho_u, "s01": b.s_u, "rho01": b.rho_u, "rho": rep.rho}
        want = {"s10": ref.s10, "rho10": ref.rho10, "s01": ref.s01, "rho01": ref.rho01,
                "rho": ref.rho}
        err = max(abs(got[k] - want[k]) for k in got)
        rows.append({"model": ref.number, "steps": [list(s) for s in ref.steps],
                     "computed": got, "reference": want, "max_abs_diff": err,
                     "ok": err <= TABLE_TOL})
    return rows


def cmd_table1(args):
    rows = quadrant_rows(rate_tol())
    ok = all(r["ok"] for r in rows)
    cols = ("s10", "rho10", "s01", "rho01", "rho")
    if args.csv:
        print("model," + ",".join(cols) + ",max_abs_diff,ok")
        for r in rows:
            print(f"{r['model']}," + ",".join(repr(r["computed"][c]) for c in cols)
                  + f",{r['max_abs_diff']!r},{int(r['ok'])}")
    else:
        lines = [f"# pyramidrate {__version__}  quadrant models",
                 f"{'model':>5}" + "".join(f"{c:>18}" for c in cols) + f"{'|diff|':>11}"]
        for r in rows:
            flag = "" if r["ok"] else "  MISMATCH"
            lines.append(f"{r['model']:>5}" + "".join(f"{r['computed'][c]:>18.12f}" for c in cols)
                         + f"{r['max_abs_diff']:>11.1e}{flag}")
        _emit({"provenance": _provenance(), "rows": rows, "ok": ok}, args.json, "\n".join(lines))
    return EXIT_OK if ok else EXIT_NUMERIC


# ---------------------------------------------------------------------------
# survival
# ---------------------------------------------------------------------------

def cmd_survival(args):
    spec = load_model(args.model)
    if args.method == "dp":
        model = LatticeModel.from_model(spec.distribution, spec.cone)
        if not np.allclose(spec.start, np.round(spec.start)):
            raise ParseError("start: dp requires an integer start point")
        curve = survival_dp(model, np.round(spec.start).astype(int), args.N)
    else:
        cfg = McConfig(args.chains, args.N, args.seed, tuple(spec.start), args.workers)
        curve = survival_mc(spec.distribution, spec.cone, cfg)

    header = f"# pyramidrate {__version__} model={spec.digest} method={args.method}"
    if args.method == "mc":
        header += f" seed={args.seed} chains={args.chains}"
    body = header + "\n" + curve.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(body)
        diag_stream = sys.stdout
    else:
        sys.stdout.write(body)
        diag_stream = sys.stderr

    diag = {"provenance": _provenance(spec), "method": args.method, "N": args.N}
    try:
        est = extract_rate(curve)
        lim = survival_limit_estimate(curve)
        diag.update(rho_hat=est.rho_hat, rho_raw=est.rho_raw, period=est.period,
                    last_ratios=est.last_ratios, monotone=est.monotone,
                    limit_upper=lim.upper, limit_corrected=lim.corrected)
    except Degenerate as exc:
        diag["rate_error"] = str(exc)
    try:
        diag["rho_theory"] = compute_rate(spec.distribution, spec.cone, tol=rate_tol()).rho
    except (HypothesisViolation, NoConvergence, NotCoercive) as exc:
        diag["rho_theory"] = None
        diag["theory_error"] = str(exc)
    if diag.get("rho_theory") and "rho_hat" in diag:
        diag["relative_diff"] = abs(diag["rho_hat"] / diag["rho_theory"] - 1.0)
    if args.json:
        print(json.dumps(diag, indent=2, sort_keys=True), file=diag_stream)
    else:
        for key in ("rho_hat", "rho_raw", "period", "rho_theory", "relative_diff",
                    "limit_upper", "limit_corrected", "rate_error", "theory_error"):
            if key in diag:
                print(f"{key:<16}{diag[key]}", file=diag_stream)
    return EXIT_OK


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

def cmd_geometry(args):
    spec = load_model(args.model)
    K = spec.cone
    Kd = dual_cone(K)
    doc = {"provenance": _provenance(spec), "op": args.op}
    if args.op == "dual":
        doc["generators"] = Kd.generators.tolist()
        text = "\n".join(_vec(g) for g in Kd.generators)
    elif args.op == "extremal":
        idx = list(Kd.extremal.indices)
        doc["indices"] = idx
        doc["generators"] = Kd.generators[idx].tolist()
        text = "\n".join(f"{i}  {_vec(Kd.generators[i])}" for i in idx)
    elif args.op == "interior":
        doc["point"] = K.interior.tolist()
        text = _vec(K.interior)
    else:
        if args.point is None:
            raise ParseError("--point is required for --op project")
        x = np.array([float(v) for v in args.point.split(",")])
        if x.shape != (K.dim,):
            raise ParseError(f"--point needs {K.dim} comma-separated numbers")
        z = project_onto_cone(K, x)
        dk = distance_to_cone(K, x)
        dpolar = distance_to_cone(Kd, -x)
        doc.update(point=x.tolist(), projection=z.tolist(), distance=dk,
                   distance_polar=dpolar, moreau_residual=dk**2 + dpolar**2 - float(x @ x))
        text = (f"projection  {_vec(z)}\ndistance    {_fmt(dk)}\n"
                f"d(x,polar)  {_fmt(dpolar)}\nmoreau res  {doc['moreau_residual']:.1e}")
    _emit(doc, args.json, text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# gaussian
# ---------------------------------------------------------------------------

def cmd_gaussian(args):
    closed, z_u, z_v = closed_form_gaussian(args.alpha, args.beta, args.r)
    d, cone = gaussian_wedge(args.alpha, args.beta, args.r)
    numeric = compute_rate(d, cone, tol=rate_tol()).rho
    diff = abs(closed - numeric)
    doc = {"provenance": _provenance(), "alpha": args.alpha, "beta": args.beta, "r": args.r,
           "closed_form": closed, "numeric": numeric, "abs_diff": diff,
           "z_u": z_u.tolist(), "z_v": z_v.tolist(), "ok": diff <= GAUSS_TOL}
    _emit(doc, args.json, f"closed form  {closed!r}\nnumeric      {numeric!r}\n|diff|       {diff:.3e}")
    return EXIT_OK if diff <= GAUSS_TOL else EXIT_NUMERIC


def build_parser():
    parser = _Parser(prog="pyramidrate", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pyramidrate {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rate", help="rate report for a model file")
    p.add_argument("model")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("table1", help="recompute the built-in quadrant models")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("survival", help="survival curve by exact DP or Monte Carlo")
    p.add_argument("model")
    p.add_argument("--method", choices=("dp", "mc"), default="dp")
    p.add_argument("--N", type=int, default=600)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--chains", type=int, default=100_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_survival)

    p = sub.add_parser("geometry", help="cone operations on a model's pyramid")
    p.add_argument("model")
    p.add_argument("--op", choices=("dual", "extremal", "interior", "project"), required=True)
    p.add_argument("--point", help="comma-separated coordinates for --op project")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("gaussian", help="closed form vs numeric rate in a planar wedge")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_gaussian)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VALIDATION_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NUMERIC_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
