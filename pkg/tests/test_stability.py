import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonlocal_gelfand.constants import (constant_Lambda_hardy, stability_inequality, stability_lhs,
                                        stability_rhs, validate_params)
from nonlocal_gelfand.errors import DomainError
from nonlocal_gelfand.stability import (CutoffSpec, classify_singular_stability, counterpart_identity_check,
                                        critical_henon_exponent, eta, extrapolate_quotients,
                                        hardy_constant_oracle, hardy_rayleigh, hardy_rayleigh_quotient,
                                        hardy_rayleigh_quotient_expanded, stability_region_sweep)


def test_cutoff_profile():
    cut = CutoffSpec(0.1)
    r = np.array([0.01, 0.049, 0.1, 1.0, 10.0, 20.1, 30.0])
    np.testing.assert_array_equal(cut(r)[[0, 1, 5, 6]], 0.0)
    np.testing.assert_array_equal(cut(r)[[2, 3, 4]], 1.0)
    with pytest.raises(DomainError):
        CutoffSpec(0.3)


def test_eta_smoothness():
    # two continuous derivatives at the knots
    h = 1e-6
    for x in (1.0, 2.0):
        d1 = (eta(x + h) - eta(x - h)) / (2 * h)
        d2 = (eta(x + h) - 2 * eta(x) + eta(x - h)) / h ** 2
        assert abs(d1) < 1e-8 and abs(d2) < 1e-3


def test_log_profile_derivative():
    cut = CutoffSpec(0.05)
    x = np.linspace(math.log(0.02), math.log(50.0), 41)
    h = 1e-6
    fd = (cut.log_profile(x + h) - cut.log_profile(x - h)) / (2 * h)
    np.testing.assert_allclose(cut.log_profile_deriv(x), fd, atol=1e-7)


@pytest.mark.parametrize("prm", [(2, 0.5), (3, 0.25), (1, 0.25), (10, 0.9), (5, 0.1)])
def test_oracle_examples(prm):
    p = validate_params(*prm, 0.0)
    assert hardy_constant_oracle(p) == pytest.approx(constant_Lambda_hardy(p), rel=1e-4)


def test_oracle_value_two_half():
    assert hardy_constant_oracle(validate_params(2, 0.5, 0)) == pytest.approx(0.228473, abs=1e-6)


def test_quotient_above_hardy_constant():
    p = validate_params(2, 0.5, 0.0)
    q = hardy_rayleigh(p, CutoffSpec(1e-2))
    lam = constant_Lambda_hardy(p)
    assert math.isfinite(q.value) and q.value >= lam
    assert q.value == pytest.approx(q.numerator / q.denominator)


@pytest.mark.parametrize("prm", [(3, 0.25), (2, 0.1), (1, 0.4)])
def test_expanded_form_agrees(prm):
    p = validate_params(*prm, 0.0)
    cut = CutoffSpec(0.05)
    assert hardy_rayleigh_quotient_expanded(p, cut) == pytest.approx(hardy_rayleigh_quotient(p, cut), rel=1e-8)


def test_expanded_form_restricted():
    with pytest.raises(DomainError):
        hardy_rayleigh_quotient_expanded(validate_params(2, 0.5, 0), CutoffSpec(0.1))


def test_extrapolation_recovers_exact_model():
    eps = [1e-1, 1e-2, 1e-3]
    vals = [0.3 + 0.7 / math.log(2 / e) for e in eps]
    fit = extrapolate_quotients(eps, vals)
    assert fit.intercept == pytest.approx(0.3, rel=1e-12)
    assert fit.slope == pytest.approx(0.7, rel=1e-12)
    with pytest.raises(DomainError):
        extrapolate_quotients([0.1], [1.0])


@pytest.mark.parametrize("prm", [(2, 0.5, 1.0), (5, 0.75, 2.0), (3, 0.1, 0.01)])
def test_counterpart_identity(prm):
    assert counterpart_identity_check(validate_params(*prm)) <= 1e-12


def test_classify_examples():
    assert classify_singular_stability(validate_params(2, 0.5, 1.0)).theorem_applies
    assert classify_singular_stability(validate_params(20, 0.5, 0.0)).singular_solution_stable


@pytest.mark.parametrize("n", [1, 2, 3, 5, 10, 20])
@pytest.mark.parametrize("s", [0.1, 0.5, 0.9])
def test_classify_oracle_consistency(n, s):
    if n <= 2 * s:
        return
    for a in (0.0, 0.5, 3.0):
        p = validate_params(n, s, a)
        v = stability_inequality(p)
        if abs(v.margin) <= 1e-3:
            continue
        assert classify_singular_stability(p, check=True) == v


def test_critical_exponent():
    assert critical_henon_exponent(2, 0.5) is None
    a_star = critical_henon_exponent(20, 0.5)
    assert a_star > 0
    p = validate_params(20, 0.5, a_star)
    assert abs(stability_lhs(p) - stability_rhs(p)) <= 1e-10
    tol = 1e-9
    assert stability_inequality(validate_params(20, 0.5, a_star - tol)).singular_solution_stable
    assert stability_inequality(validate_params(20, 0.5, a_star + tol)).theorem_applies


@given(st.integers(min_value=3, max_value=60), st.floats(min_value=0.05, max_value=0.95))
@settings(max_examples=60, deadline=None)
def test_critical_exponent_brackets(n, s):
    a_star = critical_henon_exponent(n, s)
    if a_star is None:
        assert stability_lhs(validate_params(n, s, 0.0)) >= stability_rhs(validate_params(n, s, 0.0))
        return
    rhs = stability_rhs(validate_params(n, s, 0.0))
    tol = 1e-9 * max(1.0, a_star)
    assert stability_lhs(validate_params(n, s, max(a_star - tol, 0.0))) < rhs or a_star - tol <= 0
    assert stability_lhs(validate_params(n, s, a_star + tol)) > rhs


def test_sweep_examples():
    rows = stability_region_sweep([2], [0.5], [1.0])
    assert len(rows) == 1 and rows[0].theorem_applies is True
    assert stability_region_sweep([1], [0.6, 0.9], [0.0, 1.0]) == []


def test_sweep_monotone_slices():
    a_vals = [round(0.25 * k, 10) for k in range(41)]
    rows = stability_region_sweep([10, 15, 20, 30], [0.3, 0.7], a_vals)
    for n in (10, 15, 20, 30):
        for s in (0.3, 0.7):
            flags = [r.theorem_applies for r in rows if r.n == n and r.s == s]
            assert flags == sorted(flags)


def test_sweep_order_and_parallel_determinism():
    args = ([2, 3, 12], [0.25, 0.5, 0.75], [0.0, 0.5, 1.0])
    serial = stability_region_sweep(*args)
    parallel = stability_region_sweep(*args, workers=2)
    assert serial == parallel
    keys = [(r.n, r.s, r.a) for r in serial]
    assert keys == sorted(keys)
