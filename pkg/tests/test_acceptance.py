"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line."""

import io
import time

import numpy as np
import pytest

from nonlocal_gelfand.cli import run
from nonlocal_gelfand.constants import (constant_A, constant_Lambda_hardy, constant_lambda_sing,
                                        stability_inequality, stability_lhs, stability_rhs, validate_params)
from nonlocal_gelfand.extension import HalfSpacePoint, poisson_log_gap
from nonlocal_gelfand.fraclap import DEFAULT_RADII, verify_singular_solution
from nonlocal_gelfand.monotonicity import energy_breakdown, energy_derivative_boundary
from nonlocal_gelfand.profile import bump, singular_profile
from nonlocal_gelfand.quadrature import DEFAULT_SPEC
from nonlocal_gelfand.representation import representation_residual
from nonlocal_gelfand.stability import (CutoffSpec, critical_henon_exponent, extrapolate_quotients,
                                        hardy_constant_oracle, hardy_rayleigh_quotient)
from quadrature_cases import CASES, run_case


def test_criterion_01_gamma_identity(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst, count = 0.0, 0
    while count < 100:
        n = int(rng.integers(1, 50))
        s = float(rng.uniform(0.0, 1.0))
        if not 0 < s < 1 or n <= 2 * s:
            continue
        p = validate_params(n, s, float(rng.uniform(0.0, 10.0)))
        lam = constant_lambda_sing(p)
        worst = max(worst, abs(lam - p.kappa / (2 * s) * constant_A(p)) / lam)
        count += 1
    elapsed = time.perf_counter() - start
    acceptance(1, "lambda = ((2s+a)/2s) A on 100 random Params", worst <= 1e-12 and elapsed < 1.0,
               f"max rel err {worst:.2e} (<= 1e-12), {elapsed:.3f}s (< 1s)")


def test_criterion_02_singular_residual(acceptance):
    start = time.perf_counter()
    worst = 0.0
    for n, s in [(2, 0.5), (3, 0.5), (3, 0.25), (5, 0.75), (1, 0.25), (4, 0.9)]:
        for a in (0.5, 1.0):
            rep = verify_singular_solution(validate_params(n, s, a), DEFAULT_RADII)
            worst = max(worst, rep.max_residual)
    elapsed = time.perf_counter() - start
    acceptance(2, "singular-solution residual, 12 Params x 5 radii", worst <= 1e-6 and elapsed < 120,
               f"max residual {worst:.2e} (<= 1e-6), {elapsed:.1f}s (< 120s)")


def test_criterion_03_hardy_oracle(acceptance):
    start = time.perf_counter()
    pairs = [(n, s) for n in (1, 2, 3, 5, 10) for s in (0.1, 0.25, 0.5, 0.75, 0.9) if n > 2 * s]
    worst = 0.0
    for n, s in pairs:
        p = validate_params(n, s, 0.0)
        closed = constant_Lambda_hardy(p)
        worst = max(worst, abs(hardy_constant_oracle(p, DEFAULT_SPEC) - closed) / closed)
    elapsed = time.perf_counter() - start
    acceptance(3, f"Hardy double integral vs closed form on {len(pairs)} (n,s) pairs",
               worst <= 1e-4 and len(pairs) >= 12 and elapsed < 120,
               f"max rel gap {worst:.2e} (<= 1e-4), {elapsed:.2f}s (< 120s)")


def test_criterion_04_rayleigh_quotient(acceptance):
    start = time.perf_counter()
    eps = [1e-1, 1e-2, 1e-3]
    ok = True
    details = []
    for n, s in [(2, 0.5), (3, 0.25)]:
        p = validate_params(n, s, 0.0)
        lam = constant_Lambda_hardy(p)
        vals = [hardy_rayleigh_quotient(p, CutoffSpec(e)) for e in eps]
        above = min(vals) >= lam * (1 - 1e-3)
        monotone = all(b <= a for a, b in zip(vals, vals[1:]))
        fit = extrapolate_quotients(eps, vals)
        rel = (fit.intercept - lam) / lam
        ok &= above and monotone and abs(rel) <= 0.05
        details.append(f"({n},{s}): min Q/Lambda={min(vals) / lam:.4f}, non-increasing={monotone}, "
                       f"intercept err={rel:+.2%}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 600
    acceptance(4, "Hardy Rayleigh quotient bound, monotonicity, extrapolated limit", ok,
               "; ".join(details) + f"; {elapsed:.1f}s")


def test_criterion_05_poisson_log(acceptance):
    start = time.perf_counter()
    rhos = [0.25, 0.5, 1.0, 2.0, 4.0]
    ts = [1e-3, 1e-2, 1e-1, 1.0, 10.0]
    worst_low, worst_edge = np.inf, 0.0
    for prm in [(2, 0.5, 1.0), (3, 0.5, 0.5), (3, 0.75, 1.0), (2, 0.4, 0.0)]:
        p = validate_params(*prm)
        for rho in rhos:
            for t in ts:
                g = poisson_log_gap(HalfSpacePoint(rho, t), p)
                worst_low = min(worst_low, g)
                if rho == 1.0 and t == 1e-3:
                    worst_edge = max(worst_edge, g)
    elapsed = time.perf_counter() - start
    acceptance(5, "Poisson-log gap on 5x5 grid for 4 Params",
               worst_low >= -1e-6 and worst_edge < 1e-2 and elapsed < 120,
               f"min gap {worst_low:.2e} (>= -1e-6), gap(1, 1e-3) max {worst_edge:.2e} (< 1e-2), "
               f"{elapsed:.1f}s")


@pytest.mark.slow
def test_criterion_06_monotonicity_energy(acceptance):
    start = time.perf_counter()
    spreads, derivs = [], []
    for prm in [(2, 0.5, 1.0), (3, 0.25, 0.5)]:
        p = validate_params(*prm)
        u = singular_profile(p)
        totals = [energy_breakdown(u, lam, p).total for lam in (0.5, 1.0, 2.0, 4.0)]
        spreads.append(max(totals) - min(totals))
        derivs.append(abs(energy_derivative_boundary(u, 1.0, p)))
    p = validate_params(2, 0.5, 1.0)
    v = singular_profile(p).with_perturbation(bump(1.2, 0.5, 0.3))
    e_lam = energy_breakdown(v, 2.0, p).total
    e_one = energy_breakdown(v.rescaled(2.0), 1.0, p).total
    scaling = abs(e_lam - e_one) / abs(e_one)
    elapsed = time.perf_counter() - start
    ok = max(spreads) <= 1e-3 and max(derivs) <= 1e-6 and scaling <= 1e-5 and elapsed < 600
    acceptance(6, "energy constancy, vanishing derivative, scaling identity", ok,
               f"total spread {max(spreads):.2e} (<= 1e-3), |dE| {max(derivs):.2e} (<= 1e-6), "
               f"scaling rel {scaling:.2e} (<= 1e-5), {elapsed:.1f}s (< 600s)")


def test_criterion_07_representation(acceptance):
    start = time.perf_counter()
    worst = 0.0
    for prm in [(2, 0.5, 1.0), (3, 0.25, 0.5), (5, 0.75, 1.0)]:
        worst = max(worst, representation_residual(validate_params(*prm), (0.5, 1.0, 2.0)).spread)
    elapsed = time.perf_counter() - start
    acceptance(7, "representation residual constant over radii {1/2,1,2}",
               worst <= 1e-3 and elapsed < 180, f"max spread {worst:.2e} (<= 1e-3), {elapsed:.2f}s")


def test_criterion_08_stability_region(acceptance):
    import mpmath as mp
    start = time.perf_counter()
    v = stability_inequality(validate_params(2, 0.5, 1.0))
    rhs_ref = float(mp.gamma(0.75) ** 2 / mp.gamma(0.25) ** 2)
    ok = v.theorem_applies and v.lhs == 1.0 and abs(v.rhs - rhs_ref) <= 1e-12 * rhs_ref
    ok &= critical_henon_exponent(2, 0.5) is None
    a_star = critical_henon_exponent(20, 0.5)
    resid = abs(stability_lhs(validate_params(20, 0.5, a_star)) - stability_rhs(validate_params(20, 0.5, a_star)))
    below = stability_inequality(validate_params(20, 0.5, a_star - 1e-9))
    above = stability_inequality(validate_params(20, 0.5, a_star + 1e-9))
    ok &= resid <= 1e-10 and below.singular_solution_stable and above.theorem_applies
    elapsed = time.perf_counter() - start
    ok &= elapsed < 1.0
    acceptance(8, "classifier and critical Henon exponent", ok,
               f"lhs={v.lhs!r}, rhs={v.rhs:.6f}, a*(20,.5)={a_star:.10f}, |lhs-rhs|={resid:.1e}, "
               f"{elapsed:.3f}s")


def test_criterion_09_quadrature_honesty(acceptance):
    start = time.perf_counter()
    worst = 0.0
    ok = True
    for case in CASES:
        res = run_case(case, DEFAULT_SPEC)
        err = abs(res.value - case.exact)
        ok &= res.converged and err <= 10 * res.error_estimate
        worst = max(worst, err / res.error_estimate if res.error_estimate > 0 else np.inf * (err > 0))
    elapsed = time.perf_counter() - start
    ok &= len(CASES) >= 10 and elapsed < 30
    acceptance(9, f"quadrature error honesty on {len(CASES)} closed forms", ok,
               f"max true/estimated error {worst:.2f} (<= 10), {elapsed:.2f}s")


def test_criterion_10_cli_contract(acceptance, tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        code = run(["stability", "region", "--n", "2:6", "--s", "0.5", "--a", "0:3:0.1", "--out", str(path)],
                   stdout=io.StringIO(), stderr=io.StringIO())
        outs.append((code, path.read_bytes()))
    identical = outs[0] == outs[1] and outs[0][0] == 0
    tight = run(["verify", "singular", "--n", "2", "--s", "0.5", "--a", "1", "--tol", "1e-30"],
                stdout=io.StringIO(), stderr=io.StringIO())
    invalid = run(["constants", "--n", "1", "--s", "0.75", "--a", "1"], stdout=io.StringIO(), stderr=io.StringIO())
    acceptance(10, "CLI determinism and exit codes", identical and tight == 1 and invalid == 2,
               f"byte-identical={identical}, unreachable tolerance exit={tight}, invalid input exit={invalid}")
