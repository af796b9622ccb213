"""Command-line front end.

Exit codes: 0 every check passed, 1 a check failed, 2 usage or domain error,
3 an integral did not converge.  Floats are written with 17 significant
digits and infinities as the string ``"+inf"`` so that repeated runs are
byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field

from . import constants as C
from .errors import CheckFailed, DomainError, QuadratureError, UsageError
from .extension import HalfSpacePoint, poisson_log_gap
from .fraclap import verify_singular_solution
from .monotonicity import ENERGY_SPEC, c_s, c_s_quadrature, energy_breakdown, energy_derivative_boundary
from .profile import singular_profile
from .quadrature import DEFAULT_SPEC, QuadratureSpec
from .representation import representation_residual
from .stability import (CutoffSpec, classify_singular_stability, critical_henon_exponent,
                        extrapolate_quotients, hardy_constant_oracle, hardy_rayleigh_quotient,
                        stability_region_sweep)

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_QUADRATURE = 0, 1, 2, 3
CSV_FIELDS = ("n", "s", "a", "lhs", "rhs", "theorem_applies")


@dataclass
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool


@dataclass
class RunReport:
    command: str
    params: dict
    checks: list = field(default_factory=list)
    values: dict = field(default_factory=dict)
    elapsed_ms: int = 0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check_at_most(self, name, measured, tol):
        self.checks.append(Check(name, float(measured), float(tol), bool(measured <= tol)))

    def check_at_least(self, name, measured, tol):
        self.checks.append(Check(name, float(measured), float(tol), bool(measured >= tol)))

    def to_dict(self, timing: bool = False) -> dict:
        d = {"command": self.command, "params": self.params, "values": self.values,
             "checks": [{"name": c.name, "measured": c.measured, "tolerance": c.tolerance,
                         "pass": c.passed} for c in self.checks],
             "pass": self.passed}
        if timing:
            d["elapsed_ms"] = self.elapsed_ms
        return d


# ---------------------------------------------------------------------------
# deterministic formatting


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return format(x, ".17g")


def to_json(obj, indent: int = 2, level: int = 0) -> str:
    """JSON with fixed float formatting; non-finite floats become strings."""
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj) if math.isfinite(obj) else json.dumps(fmt_float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + to_json(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):
        return to_json(obj.item(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


def region_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow([_csv_cell(getattr(r, k)) for k in CSV_FIELDS])
    return buf.getvalue()


def region_json(rows) -> str:
    return to_json([{k: getattr(r, k) for k in CSV_FIELDS} for r in rows]) + "\n"


def report_text(rep: RunReport) -> str:
    lines = [f"{rep.command}: " + ", ".join(f"{k}={_csv_cell(v)}" for k, v in rep.params.items())]
    for k, v in rep.values.items():
        if isinstance(v, list):
            lines.append(f"  {k}:")
            for row in v:
                lines.append("    " + ", ".join(f"{a}={_csv_cell(b)}" for a, b in row.items()))
        else:
            lines.append(f"  {k} = {_csv_cell(v)}")
    for c in rep.checks:
        status = "PASS" if c.passed else "FAIL"
        lines.append(f"  [{status}] {c.name}: measured {fmt_float(c.measured)}, tolerance {fmt_float(c.tolerance)}")
    lines.append("PASS" if rep.passed else "FAIL")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# argument parsing


def parse_range(text: str, integer: bool = False) -> list:
    """``start:stop[:step]`` (inclusive stop, default step 1) or a comma list."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(x) for x in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1.0
            if step <= 0 or stop < start:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            vals = [round(start + k * step, 12) for k in range(count)]
        else:
            vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad range or list {text!r}; expected start:stop[:step] or a,b,c") from None
    if not vals:
        raise UsageError(f"empty range {text!r}")
    if integer:
        if any(v != int(v) for v in vals):
            raise UsageError(f"integer values required in {text!r}")
        vals = [int(v) for v in vals]
    return vals


def _float_list(text):
    return parse_range(text)


def _global_flags(parser, suppress: bool):
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    parser.add_argument("--rel-tol", type=float, help="quadrature relative tolerance", **kw)
    parser.add_argument("--abs-tol", type=float, help="quadrature absolute tolerance", **kw)
    parser.add_argument("--max-subdiv", type=int, help="subdivision limit per integral", **kw)
    parser.add_argument("--json", action="store_true", help="machine-readable output", **kw)
    parser.add_argument("--check-mode", action="store_true", help="run expensive cross-oracles", **kw)
    parser.add_argument("--timing", action="store_true", help="include elapsed_ms in JSON", **kw)
    parser.add_argument("--out", help="write the main output to this file", **kw)


def _params_flags(parser, need_a: bool = True):
    parser.add_argument("--n", type=int, required=True)
    parser.add_argument("--s", type=float, required=True)
    if need_a:
        parser.add_argument("--a", type=float, required=True)
    else:
        parser.add_argument("--a", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    parser = argparse.ArgumentParser(prog="nonlocal-gelfand",
                                     description="Verification tools for (-Delta)^s u = |x|^a e^u.")
    _global_flags(parser, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    def leaf(subparsers, name, help_text):
        return subparsers.add_parser(name, parents=[common], help=help_text)

    p = leaf(sub, "constants", "closed-form constants")
    _params_flags(p)
    p.add_argument("--tol", type=float, default=1e-12, help="tolerance of the lambda/A identity")

    verify = sub.add_parser("verify", help="identity checks").add_subparsers(dest="target", required=True)
    p = leaf(verify, "singular", "fractional Laplacian of the singular solution")
    _params_flags(p)
    p.add_argument("--radii", type=_float_list, default=[0.25, 0.5, 1.0, 2.0, 4.0])
    p.add_argument("--tol", type=float, default=1e-6)
    p = leaf(verify, "representation", "Riesz representation of the singular solution")
    _params_flags(p)
    p.add_argument("--radii", type=_float_list, default=[0.5, 1.0, 2.0])
    p.add_argument("--tol", type=float, default=1e-3)
    p = leaf(verify, "extension-log", "Poisson integral of log|y| against log rho")
    _params_flags(p)
    p.add_argument("--rho", type=_float_list, default=[0.25, 0.5, 1.0, 2.0, 4.0])
    p.add_argument("--t", type=_float_list, default=[1e-3, 1e-2, 1e-1, 1.0, 10.0])
    p.add_argument("--tol", type=float, default=1e-6)

    p = leaf(sub, "energy", "monotonicity energy of the singular solution on a lambda grid")
    _params_flags(p)
    p.add_argument("--lambdas", type=_float_list, default=[0.5, 1.0, 2.0, 4.0])
    p.add_argument("--tol", type=float, default=1e-3, help="allowed spread of the total energy")
    p.add_argument("--derivative-tol", type=float, default=1e-6)

    hardy = sub.add_parser("hardy", help="Hardy constant").add_subparsers(dest="target", required=True)
    p = leaf(hardy, "oracle", "Hardy constant by quadrature against the closed form")
    _params_flags(p, need_a=False)
    p.add_argument("--tol", type=float, default=1e-4)
    p = leaf(hardy, "quotient", "Rayleigh quotients of the truncated extremal profile")
    _params_flags(p, need_a=False)
    p.add_argument("--eps-list", type=_float_list, default=[1e-1, 1e-2, 1e-3])
    p.add_argument("--tol", type=float, default=0.05, help="relative tolerance of the extrapolated limit")

    stab = sub.add_parser("stability", help="stability of the singular solution").add_subparsers(
        dest="target", required=True)
    p = leaf(stab, "classify", "evaluate the stability inequality")
    _params_flags(p)
    p = leaf(stab, "critical-a", "Henon exponent where the inequality is an equality")
    _params_flags(p, need_a=False)
    p.add_argument("--tol", type=float, default=1e-10)
    p = leaf(stab, "region", "sweep the inequality over a parameter grid")
    p.add_argument("--n", required=True, help="start:stop[:step] or comma list")
    p.add_argument("--s", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--workers", type=int, default=1)

    p = leaf(sub, "jl-check", "Joseph-Lundgren type condition for a Lane-Emden exponent")
    _params_flags(p)
    p.add_argument("--q", type=float, required=True)
    return parser


def _spec(args, base: QuadratureSpec) -> QuadratureSpec:
    kw = {}
    if getattr(args, "rel_tol", None) is not None:
        kw["rel_tol"] = args.rel_tol
    if getattr(args, "abs_tol", None) is not None:
        kw["abs_tol"] = args.abs_tol
    if getattr(args, "max_subdiv", None) is not None:
        kw["max_subdivisions"] = args.max_subdiv
    return base.replace(**kw) if kw else base


def _params(args):
    return C.validate_params(args.n, args.s, args.a)


def _echo(args, *names):
    return {k: getattr(args, k) for k in names}


# ---------------------------------------------------------------------------
# commands


def cmd_constants(args, rep: RunReport):
    p = _params(args)
    rep.values.update(C.all_constants(p))
    lam, A = rep.values["lambda_ns"], rep.values["A_ns"]
    rep.check_at_most("lambda_vs_A_identity", abs(lam - p.kappa / (2 * p.s) * A) / lam, args.tol)


def cmd_verify_singular(args, rep: RunReport):
    p = _params(args)
    r = verify_singular_solution(p, args.radii, _spec(args, DEFAULT_SPEC), args.tol)
    rep.values["rows"] = [{"r": x, "computed": c, "expected": e, "residual": d}
                          for x, c, e, d in zip(r.radii, r.computed, r.expected, r.residuals)]
    rep.check_at_most("max_relative_residual", r.max_residual, args.tol)


def cmd_verify_representation(args, rep: RunReport):
    p = _params(args)
    r = representation_residual(p, args.radii, _spec(args, DEFAULT_SPEC), args.tol)
    rep.values["rows"] = [{"r": x, "residual": d} for x, d in zip(r.radii, r.residuals)]
    rep.values["vacuous"] = r.vacuous
    rep.check_at_most("residual_spread", r.spread, args.tol)


def cmd_verify_extension_log(args, rep: RunReport):
    p = _params(args)
    spec = _spec(args, DEFAULT_SPEC)
    rows = []
    for rho in args.rho:
        for t in args.t:
            rows.append({"rho": rho, "t": t, "gap": poisson_log_gap(HalfSpacePoint(rho, t), p, spec)})
    rep.values["rows"] = rows
    rep.check_at_least("min_gap", min(r["gap"] for r in rows), -args.tol)


def cmd_energy(args, rep: RunReport):
    p = _params(args)
    spec = _spec(args, ENERGY_SPEC)
    u = singular_profile(p)
    rows = []
    for lam in args.lambdas:
        e = energy_breakdown(u, lam, p, spec)
        rows.append({"lambda": lam, "dirichlet": e.dirichlet, "nonlinear": e.nonlinear,
                     "boundary_log": e.boundary_log, "total": e.total})
    rep.values["rows"] = rows
    totals = [r["total"] for r in rows]
    rep.check_at_most("total_spread", max(totals) - min(totals), args.tol)
    rep.check_at_most("derivative_at_1", energy_derivative_boundary(u, 1.0, p, spec), args.derivative_tol)
    if args.check_mode:
        closed = c_s(p)
        rep.check_at_most("c_s_quadrature", abs(c_s_quadrature(p, spec) - closed) / closed, 1e-6)


def cmd_hardy_oracle(args, rep: RunReport):
    p = _params(args)
    closed = C.constant_Lambda_hardy(p)
    oracle = hardy_constant_oracle(p, _spec(args, DEFAULT_SPEC))
    rep.values.update(Lambda_closed_form=closed, Lambda_quadrature=oracle)
    rep.check_at_most("relative_gap", abs(oracle - closed) / closed, args.tol)


def cmd_hardy_quotient(args, rep: RunReport):
    p = _params(args)
    spec = _spec(args, DEFAULT_SPEC)
    lam = C.constant_Lambda_hardy(p)
    eps = sorted(args.eps_list, reverse=True)
    vals = [hardy_rayleigh_quotient(p, CutoffSpec(e), spec) for e in eps]
    rep.values["Lambda"] = lam
    rep.values["rows"] = [{"eps": e, "quotient": v} for e, v in zip(eps, vals)]
    rep.check_at_least("min_quotient_over_Lambda", min(vals) / lam, 1 - 1e-3)
    # values are listed by decreasing eps, so they must not increase along the list
    rise = max((b - a for a, b in zip(vals, vals[1:])), default=0.0)
    rep.check_at_most("max_rise_as_eps_decreases", rise, 0.0)
    if len(eps) >= 2:
        fit = extrapolate_quotients(eps, vals)
        rep.values["intercept"] = fit.intercept
        rep.check_at_most("intercept_relative_error", abs(fit.intercept - lam) / lam, args.tol)


def cmd_stability_classify(args, rep: RunReport):
    p = _params(args)
    v = classify_singular_stability(p, check=args.check_mode, spec=_spec(args, DEFAULT_SPEC))
    rep.values.update(lhs=v.lhs, rhs=v.rhs, singular_solution_stable=v.singular_solution_stable,
                      theorem_applies=v.theorem_applies)


def cmd_stability_critical(args, rep: RunReport):
    a_star = critical_henon_exponent(args.n, args.s)
    rep.values["a_star"] = a_star
    if a_star is not None:
        p = C.validate_params(args.n, args.s, a_star)
        rep.check_at_most("equality_residual", abs(C.stability_lhs(p) - C.stability_rhs(p)), args.tol)


def cmd_stability_region(args, rep: RunReport):
    n_vals = parse_range(args.n, integer=True)
    s_vals = parse_range(args.s)
    a_vals = parse_range(args.a)
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    rows = stability_region_sweep(n_vals, s_vals, a_vals, workers=args.workers)
    rep.values["rows"] = rows
    rep.values["points"] = len(rows)


def cmd_jl_check(args, rep: RunReport):
    p = _params(args)
    v = C.jl_condition_lane_emden(p, args.q)
    rep.values.update(lhs=v.lhs, rhs=v.rhs, holds=v.holds, theta=v.theta)


COMMANDS = {
    ("constants", None): (cmd_constants, ("n", "s", "a")),
    ("verify", "singular"): (cmd_verify_singular, ("n", "s", "a", "radii")),
    ("verify", "representation"): (cmd_verify_representation, ("n", "s", "a", "radii")),
    ("verify", "extension-log"): (cmd_verify_extension_log, ("n", "s", "a", "rho", "t")),
    ("energy", None): (cmd_energy, ("n", "s", "a", "lambdas")),
    ("hardy", "oracle"): (cmd_hardy_oracle, ("n", "s")),
    ("hardy", "quotient"): (cmd_hardy_quotient, ("n", "s", "eps_list")),
    ("stability", "classify"): (cmd_stability_classify, ("n", "s", "a")),
    ("stability", "critical-a"): (cmd_stability_critical, ("n", "s")),
    ("stability", "region"): (cmd_stability_region, ("n", "s", "a", "workers")),
    ("jl-check", None): (cmd_jl_check, ("n", "s", "a", "q")),
}


def _emit(text: str, out: str | None, stdout):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    for name in ("json", "check_mode", "timing"):
        setattr(args, name, getattr(args, name, False))
    for name in ("rel_tol", "abs_tol", "max_subdiv", "out"):
        setattr(args, name, getattr(args, name, None))
    target = getattr(args, "target", None)
    func, echo = COMMANDS[(args.command, target)]
    name = args.command if target is None else f"{args.command} {target}"
    rep = RunReport(name, _echo(args, *echo))
    start = time.perf_counter()
    try:
        func(args, rep)
    except (DomainError, UsageError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except QuadratureError as exc:
        stderr.write(f"quadrature failure: {exc}\n")
        return EXIT_QUADRATURE
    except CheckFailed as exc:
        stderr.write(f"check failed: {exc}\n")
        return EXIT_FAILED
    except OSError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    rep.elapsed_ms = int(round(1000 * (time.perf_counter() - start)))

    if name == "stability region":
        rows = rep.values["rows"]
        text = region_json(rows) if args.json else region_csv(rows)
        try:
            _emit(text, args.out, stdout)
        except OSError as exc:
            stderr.write(f"error: {exc}\n")
            return EXIT_USAGE
        if args.out:
            stderr.write(f"wrote {len(rows)} rows to {args.out}\n")
        return EXIT_OK
    text = to_json(rep.to_dict(args.timing)) + "\n" if args.json else report_text(rep)
    try:
        _emit(text, args.out, stdout)
    except OSError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    if not rep.passed:
        failed = ", ".join(c.name for c in rep.checks if not c.passed)
        stderr.write(f"failed checks: {failed}\n")
        return EXIT_FAILED
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
