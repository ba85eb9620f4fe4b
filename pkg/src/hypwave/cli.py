"""Command-line front end: identity checks, kernel samples, convergence traces.

Exit status is 0 when every check passes, 1 when a check fails and 2 on a
configuration or usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .errors import HypwaveError, NoConvergence
from .fields import CharPolynomial, parse_poly
from .geom import DependenceConfig, rho_angles
from .hypcore import HPoint
from .nonhomog import (SourceProblem, combined_identity_finite, half_source_integral,
                       nonhomog_final_identity)
from .poisson import (LimitSchedule, boundary_sum_trace, final_identity, finite_rho_identity,
                      kernel, kernel_integral_closed_form, limit_of_trace, mean_trace)
from .quad import QuadSpec

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
DEFAULT_TOL = 1e-8
DEFAULT_CONVERGENCE_RHO = "0.1,0.01,0.001,0.0001,0.00001"


class UsageError(ValueError):
    pass


# --- parsing helpers -------------------------------------------------------------

def _floats(text) -> List[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse number list {text!r}") from None


def _point(text) -> HPoint:
    vals = _floats(text)
    if len(vals) != 2:
        raise UsageError(f"--Q expects 'x,y', got {text!r}")
    return HPoint(*vals)


def _pad_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1])))
    out[:a.shape[0], :a.shape[1]] += a
    out[:b.shape[0], :b.shape[1]] += b
    return out


def _profile_field(F: Optional[str], G: Optional[str]) -> CharPolynomial:
    CF = parse_poly(F) if F else np.zeros((1, 1))
    CG = parse_poly(G) if G else np.zeros((1, 1))
    if np.any(CF[:, 1:]):
        raise UsageError(f"--F must be a polynomial in s alone, got {F!r}")
    if np.any(CG[1:, :]):
        raise UsageError(f"--G must be a polynomial in t alone, got {G!r}")
    return CharPolynomial(_pad_add(CF, CG), label=f"F={F or '0'}; G={G or '0'}")


def _wave_field(args) -> CharPolynomial:
    if args.u is not None:
        if args.F is not None or args.G is not None:
            raise UsageError("give either --u or --F/--G, not both")
        u = CharPolynomial.parse(args.u)
        if not u.is_dalembert():
            raise UsageError(f"--u {args.u!r} is not a wave solution (has mixed s*t terms)")
        return u
    if args.F is None and args.G is None:
        raise UsageError("a field is required: --F/--G or --u")
    return _profile_field(args.F, args.G)


def _cfg(args) -> DependenceConfig:
    if args.p is None or args.Q is None:
        raise UsageError("--p and --Q are required")
    return DependenceConfig.build(_point(args.Q), float(args.p))


def _spec(args) -> QuadSpec:
    kw = {}
    if args.rel_tol is not None:
        kw["rel_tol"] = float(args.rel_tol)
    if args.abs_tol is not None:
        kw["abs_tol"] = float(args.abs_tol)
    if args.max_depth is not None:
        kw["max_depth"] = int(args.max_depth)
    return QuadSpec(**kw)


def _base_config(args, cfg: DependenceConfig) -> Dict:
    return {"p": cfg.p, "Q": [cfg.Q.x, cfg.Q.y], "q": cfg.q}


# --- output ----------------------------------------------------------------------

def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def _emit(report: Dict, fmt: str, out: Optional[str]) -> None:
    if fmt == "json":
        text = json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"
    else:
        buf = io.StringIO()
        if "checks" in report:
            cols = ["name", "lhs", "rhs", "residual", "tol", "pass"]
            rows = report["checks"]
        else:
            cols = report["columns"]
            rows = report["rows"]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols])
        text = buf.getvalue()
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(command: str, config: Dict, **body) -> Dict:
    rep = {"command": command, "config": config, "meta": {"version": __version__}}
    rep.update(body)
    return rep


def _check_row(name: str, lhs: float, rhs: float, residual: float, tol: float, **extra) -> Dict:
    row = {"name": name, "lhs": float(lhs), "rhs": float(rhs), "residual": float(residual),
           "tol": float(tol), "pass": bool(residual <= tol * (1.0 + abs(rhs)))}
    row.update({k: _num(v) for k, v in extra.items()})
    return row


# --- commands --------------------------------------------------------------------

def cmd_verify(args) -> int:
    cfg = _cfg(args)
    spec = _spec(args)
    tol = DEFAULT_TOL if args.tol is None else float(args.tol)
    rhos = _floats(args.rho) if args.rho is not None else []
    config = _base_config(args, cfg)
    config.update({"rho": rhos, "tol": tol})
    checks = []
    if args.manufactured is not None:
        if args.F is not None or args.G is not None or args.u is not None:
            raise UsageError("--manufactured cannot be combined with --F/--G/--u")
        prob = SourceProblem.from_solution(CharPolynomial.parse(args.manufactured), cfg)
        config["field"] = {"manufactured": args.manufactured}
        area = half_source_integral(prob, spec)
        c = nonhomog_final_identity(prob, spec)
        checks.append(_check_row("nonhomog_final_identity", *c, tol, area_term=area))
        for rho in rhos:
            c = combined_identity_finite(prob, rho, spec)
            checks.append(_check_row(f"combined_identity_finite[rho={rho!r}]", *c, tol))
    else:
        u = _wave_field(args)
        config["field"] = ({"u": args.u} if args.u is not None
                           else {"F": args.F or "0", "G": args.G or "0"})
        c = final_identity(u, cfg)
        checks.append(_check_row("final_identity", *c, tol))
        for rho in rhos:
            c = finite_rho_identity(u, cfg, rho, spec)
            checks.append(_check_row(f"finite_rho_identity[rho={rho!r}]", *c, tol))
    _emit(_report("verify", config, checks=checks), args.format, args.out)
    for c in checks:
        if not c["pass"]:
            print(f"FAIL {c['name']}: residual {c['residual']:.3g}", file=sys.stderr)
    return EXIT_PASS if all(c["pass"] for c in checks) else EXIT_FAIL


KERNEL_COLUMNS = ["phi", "kernel", "r2", "integral_from_0"]


def cmd_kernel_table(args) -> int:
    if args.p is None:
        raise UsageError("--p is required")
    p = float(args.p)
    if args.q is not None:
        q = float(args.q)
    elif args.Q is not None:
        q = DependenceConfig.build(_point(args.Q), p).q
    else:
        raise UsageError("--q or --Q is required")
    if not p > q > 0:
        raise UsageError(f"need p > q > 0, got p = {p!r}, q = {q!r}")
    lo, hi, n = float(args.phi_min), float(args.phi_max), int(args.samples)
    phi2 = math.log(p / q)
    if n < 1 or hi < lo:
        raise UsageError("need samples >= 1 and phi-min <= phi-max")
    if not (abs(lo) < phi2 and abs(hi) < phi2):
        raise UsageError(f"phi range must lie inside (-{phi2:.6g}, {phi2:.6g}) where the kernel is finite")
    phis = np.linspace(lo, hi, n)
    rows = []
    for phi in phis:
        phi = float(phi)
        k = float(kernel(p, q, phi))
        rows.append({"phi": phi, "kernel": k, "r2": (p * p - q * q) / k,
                     "integral_from_0": kernel_integral_closed_form(p, q, phi)})
    config = {"p": p, "q": q, "phi_min": lo, "phi_max": hi, "samples": n}
    _emit(_report("kernel-table", config, columns=KERNEL_COLUMNS, rows=rows), args.format, args.out)
    return EXIT_PASS


CONVERGENCE_COLUMNS = ["rho", "theta_i", "w", "theta_ratio", "mean_I", "mean_Istar", "boundary_sum"]


def cmd_convergence(args) -> int:
    cfg = _cfg(args)
    spec = _spec(args)
    u = _wave_field(args)
    rhos = _floats(args.rho if args.rho is not None else DEFAULT_CONVERGENCE_RHO)
    schedule = LimitSchedule(tuple(rhos), int(args.order))
    schedule.validate_for(cfg)
    m = mean_trace(u, cfg, schedule, False, spec)
    ms = mean_trace(u, cfg, schedule, True, spec)
    b = boundary_sum_trace(u, cfg, schedule, spec)
    rows = []
    for a, c, d in zip(m, ms, b):
        ang = rho_angles(cfg, a.rho)
        rows.append({"rho": a.rho, "theta_i": a.theta_i, "w": a.w,
                     "theta_ratio": ang.theta_istar / ang.theta_i,
                     "mean_I": a.value, "mean_Istar": c.value, "boundary_sum": d.value})
    Qs = HPoint.from_char(cfg.sQstar, cfg.tQstar)
    limits = {
        "mean_I": limit_of_trace(m, schedule.extrapolation_order).value,
        "mean_Istar": limit_of_trace(ms, schedule.extrapolation_order).value,
        "boundary_sum": limit_of_trace(b, schedule.extrapolation_order).value,
        "u_Q": float(u.at(cfg.Q)),
        "u_Qstar": float(u.at(Qs)),
        "u_P1_plus_u_P2": float(u.at(cfg.P1)) + float(u.at(cfg.P2)),
    }
    config = _base_config(args, cfg)
    config.update({"rho": list(schedule.rho_values), "order": schedule.extrapolation_order,
                   "field": {"u": args.u} if args.u is not None
                   else {"F": args.F or "0", "G": args.G or "0"}})
    _emit(_report("convergence", config, columns=CONVERGENCE_COLUMNS, rows=rows, limits=limits),
          args.format, args.out)
    return EXIT_PASS


def cmd_domain_info(args) -> int:
    cfg = _cfg(args)
    Qs = cfg.Qstar
    items = [
        ("p", cfg.p), ("q", cfg.q), ("qstar", cfg.qstar), ("alpha", cfg.alpha),
        ("A_p", cfg.A_p), ("phi2", cfg.phi2),
        ("Q_x", cfg.Q.x), ("Q_y", cfg.Q.y), ("Qstar_x", Qs.x), ("Qstar_y", Qs.y),
        ("P1_x", cfg.P1.x), ("P1_y", cfg.P1.y), ("P2_x", cfg.P2.x), ("P2_y", cfg.P2.y),
    ]
    rhos = _floats(args.rho) if args.rho is not None else []
    for rho in rhos:
        ang = rho_angles(cfg, rho)
        tag = f"[rho={rho!r}]"
        items += [("rhostar" + tag, ang.rhostar), ("phi_i" + tag, ang.phi_i),
                  ("theta_i" + tag, ang.theta_i), ("theta_istar" + tag, ang.theta_istar)]
    rows = [{"quantity": k, "value": float(v)} for k, v in items]
    config = _base_config(args, cfg)
    config["rho"] = rhos
    _emit(_report("domain-info", config, columns=["quantity", "value"], rows=rows),
          args.format, args.out)
    return EXIT_PASS


# --- argument parsing ------------------------------------------------------------

CONFIG_KEYS = ("p", "Q", "q", "rho", "F", "G", "u", "manufactured", "tol", "format", "out",
               "rel_tol", "abs_tol", "max_depth", "order", "phi_min", "phi_max", "samples")

_DEFAULTS = {"format": "json", "order": 2, "phi_min": 0.0, "phi_max": 0.6, "samples": 7}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypwave", description="Boundary-value identities for the wave equation u_xx - u_yy = f.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option values; command-line flags win")
    common.add_argument("--p", help="semi-diameter of the data hyperbola x^2 - y^2 = p^2")
    common.add_argument("--Q", help="interior point as 'x,y' with x > |y|")
    common.add_argument("--rho", help="comma-separated auxiliary semi-diameters")
    common.add_argument("--format", choices=["json", "csv"], help="output format (default json)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--rel-tol", dest="rel_tol", help="quadrature relative tolerance")
    common.add_argument("--abs-tol", dest="abs_tol", help="quadrature absolute tolerance")
    common.add_argument("--max-depth", dest="max_depth", help="quadrature bisection depth limit")

    field = argparse.ArgumentParser(add_help=False)
    field.add_argument("--F", help="profile F(s), polynomial in s")
    field.add_argument("--G", help="profile G(t), polynomial in t")
    field.add_argument("--u", help="wave solution as a polynomial in s, t, x, y")

    p = sub.add_parser("verify", parents=[common, field],
                       help="check the final (and optionally finite-rho) identities",
                       description="Checks pass when residual <= tol * (1 + |rhs|).")
    p.add_argument("--manufactured", help="manufactured solution u; the source is f = u_xx - u_yy")
    p.add_argument("--tol", help=f"pass tolerance (default {DEFAULT_TOL:g})")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("kernel-table", parents=[common],
                       help="sample the kernel on the data curve",
                       description="Columns: " + ", ".join(KERNEL_COLUMNS) + ".")
    p.add_argument("--q", help="distance of the interior point (alternative to --Q)")
    p.add_argument("--phi-min", dest="phi_min", help="first angle (default 0)")
    p.add_argument("--phi-max", dest="phi_max", help="last angle (default 0.6)")
    p.add_argument("--samples", help="number of samples (default 7)")
    p.set_defaults(func=cmd_kernel_table)

    p = sub.add_parser("convergence", parents=[common, field],
                       help="mean values and boundary sums over a rho schedule",
                       description="Columns: " + ", ".join(CONVERGENCE_COLUMNS)
                       + ". JSON output adds extrapolated limits in w = 1/theta_i.")
    p.add_argument("--order", help="extrapolation degree in w (default 2)")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("domain-info", parents=[common],
                       help="symmetric point, dependence points and angles",
                       description="Columns: quantity, value.")
    p.set_defaults(func=cmd_domain_info)
    return parser


def _apply_config(args) -> None:
    path = getattr(args, "config", None)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path!r}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = sorted(set(data) - set(CONFIG_KEYS))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        for k, v in data.items():
            if getattr(args, k, None) is None:
                setattr(args, k, v)
    for k, v in _DEFAULTS.items():
        if hasattr(args, k) and getattr(args, k) is None:
            setattr(args, k, v)
    for k in ("F", "G", "u", "manufactured", "q", "tol"):
        if not hasattr(args, k):
            setattr(args, k, None)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        return args.func(args)
    except NoConvergence as exc:
        print(f"hypwave: quadrature failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (HypwaveError, ValueError) as exc:
        print(f"hypwave: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
