"""Hardy constant, Rayleigh quotients of cut-off power functions, and the
stability classification of the singular solution.

The quadratic form of a radial test function ``psi`` is folded with
``rho = r t`` and the ``t <-> 1/t`` symmetry, which for
``psi(r) = r^{-m} eta(r)`` with ``m = (n - 2s)/2`` gives::

    Q = c_{n,s} |S^{n-1}| int_0^1 K(t) t^{n-1} G(t) dt,
    G(t) = int (eta(r) - t^{-m} eta(r t))^2 dr / r.

``G`` is computed in ``x = log r``, where the cut-off is piecewise smooth
between its four knots.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constants import (LOG2, Params, StabilityVerdict, _log_weight_ratio, constant_cns,
                        constant_Lambda_hardy, make_verdict, stability_inequality, stability_rhs,
                        validate_params)
from .errors import CheckFailed, DomainError, QuadratureError
from .fraclap import add_fold_pieces, fold_kernel, fold_nodes
from .quadrature import (DEFAULT_SPEC, GAUSS_W, KRONROD_W, NODES, Pieces, QuadratureSpec,
                         add_interval, integrate_pieces)

_GL8_X, _GL8_W = np.polynomial.legendre.leggauss(8)


def smootherstep(y):
    """``6y^5 - 15y^4 + 10y^3`` clamped to [0, 1]; two continuous derivatives."""
    y = np.clip(y, 0.0, 1.0)
    return y * y * y * (y * (6.0 * y - 15.0) + 10.0)


def smootherstep_deriv(y):
    inside = (y > 0) & (y < 1)
    yc = np.clip(y, 0.0, 1.0)
    return np.where(inside, 30.0 * yc * yc * (yc - 1.0) ** 2, 0.0)


def eta(r):
    """Fixed cut-off: 1 on [0, 1], 0 on [2, inf), smootherstep in between."""
    return 1.0 - smootherstep(np.asarray(r, float) - 1.0)


def eta_deriv(r):
    return -smootherstep_deriv(np.asarray(r, float) - 1.0)


@dataclass(frozen=True)
class CutoffSpec:
    """``eta_eps(r) = (1 - eta(2r/eps)) eta(eps r)``: 1 on [eps, 1/eps], 0 outside [eps/2, 2/eps]."""

    eps: float

    def __post_init__(self):
        if not 0.0 < self.eps <= 0.25:
            raise DomainError("eps in (0, 1/4] violated")

    @property
    def knots(self) -> tuple:
        e = self.eps
        return (0.5 * e, e, 1.0 / e, 2.0 / e)

    def __call__(self, r):
        r = np.asarray(r, float)
        e = self.eps
        return (1.0 - eta(2.0 * r / e)) * eta(e * r)

    def log_profile(self, x):
        """``h(x) = eta_eps(e^x)``."""
        return self(np.exp(x))

    def log_profile_deriv(self, x):
        r = np.exp(x)
        e = self.eps
        d = -eta_deriv(2.0 * r / e) * (2.0 / e) * eta(e * r) + (1.0 - eta(2.0 * r / e)) * eta_deriv(e * r) * e
        return r * d


# ---------------------------------------------------------------------------
# Hardy constant by the folded double integral


def hardy_constant_oracle(p: Params, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``c_{n,s} int_0^1 K(t) t^{2s-1} (1 - t^m)^2 dt`` with ``m = (n - 2s)/2``."""
    n, s = p.n, p.s
    q = n + 2 * s
    m = 0.5 * (n - 2 * s)
    pieces = Pieces()
    add_fold_pieces(pieces, s)

    def f(x, owner):
        _, t, w, lt = fold_nodes(x, owner)
        return fold_kernel(t, w, q, n) * t ** (2 * s - 1) * np.expm1(m * lt) ** 2

    res = integrate_pieces(f, pieces, 1, spec.rel_tol, spec.abs_tol, spec.max_subdivisions)
    if not res.converged[0]:
        raise QuadratureError(f"Hardy oracle did not converge (error estimate {res.error[0, 0]!r})")
    return constant_cns(p) * float(res.value[0, 0])


# ---------------------------------------------------------------------------
# Rayleigh quotient of r^{-m} eta_eps


def _gk_pieces(edges):
    """Kronrod nodes and weights on the consecutive intervals of ``edges`` (M, k)."""
    lo, hi = edges[:, :-1], edges[:, 1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[..., None] + half[..., None] * NODES
    return x, half[..., None] * KRONROD_W, half[..., None] * GAUSS_W


def _log_mass(cut: CutoffSpec) -> float:
    """``int eta_eps^2 dr / r``."""
    edges = np.log(np.array([cut.knots]))
    x, wk, _ = _gk_pieces(edges)
    return float((cut.log_profile(x) ** 2 * wk).sum())


def _increment(cut: CutoffSpec, x, ell):
    """``h(x) - h(x + ell)`` with Gauss-Legendre on ``h'`` for short steps."""
    out = cut.log_profile(x) - cut.log_profile(x + ell)
    near = np.abs(ell) < 1e-2
    if near.any():
        xs, ls = np.broadcast_arrays(x, ell)
        xs, ls = xs[near], ls[near]
        v = 0.5 * (1.0 + _GL8_X)
        nodes = xs[:, None] + ls[:, None] * v[None, :]
        out[near] = -ls * (cut.log_profile_deriv(nodes) @ (0.5 * _GL8_W))
    return out


def _G(cut: CutoffSpec, lt, m: float):
    """``G(t) = int (h(x) - t^{-m} h(x + log t))^2 dx`` for an array of ``log t``."""
    lt = np.asarray(lt, float).ravel()
    k = np.log(np.array(cut.knots))
    edges = np.sort(np.concatenate([np.broadcast_to(k, (lt.size, 4)), k[None, :] - lt[:, None]], axis=1), axis=1)
    x, wk, wg = _gk_pieces(edges)
    ell = lt[:, None, None]
    diff = _increment(cut, x, np.broadcast_to(ell, x.shape)) - np.expm1(-m * ell) * cut.log_profile(x + ell)
    sq = diff * diff
    return (sq * wk).sum(axis=(1, 2)), np.abs(((sq * (wk - wg)).sum(axis=2))).sum(axis=1)


@dataclass(frozen=True)
class RayleighQuotient:
    value: float
    numerator: float
    denominator: float
    error_estimate: float


def hardy_rayleigh(p: Params, cut: CutoffSpec, spec: QuadratureSpec = DEFAULT_SPEC) -> RayleighQuotient:
    """Quadratic form, weighted mass and their quotient for ``r^{-m} eta_eps``."""
    n, s = p.n, p.s
    q = n + 2 * s
    m = 0.5 * (n - 2 * s)
    e = cut.eps
    pieces = Pieces()
    add_fold_pieces(pieces, s, (0.25 * e * e, 0.5 * e * e, e * e))
    inner_err = []

    def f(x, owner):
        _, t, w, lt = fold_nodes(x, owner)
        G, gerr = _G(cut, lt, m)
        G = G.reshape(x.shape)
        inner_err.append(float(np.max(gerr / np.maximum(np.abs(G.ravel()), 1e-300))))
        return fold_kernel(t, w, q, n) * t ** (n - 1) * G

    res = integrate_pieces(f, pieces, 1, spec.rel_tol, spec.abs_tol, spec.max_subdivisions)
    if not res.converged[0]:
        raise QuadratureError(f"Rayleigh quotient did not converge (error estimate {res.error[0, 0]!r})")
    if max(inner_err) > 1e-8:
        raise QuadratureError("Rayleigh quotient inner integral is inaccurate")
    sphere = p.sphere
    mass = _log_mass(cut)
    num = constant_cns(p) * sphere * float(res.value[0, 0])
    den = sphere * mass
    err = constant_cns(p) * float(res.error[0, 0]) / mass
    return RayleighQuotient(num / den, num, den, err)


def hardy_rayleigh_quotient(p: Params, cut: CutoffSpec, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``Q(psi) / D(psi)`` for ``psi = r^{-(n-2s)/2} eta_eps``."""
    return hardy_rayleigh(p, cut, spec).value


def hardy_rayleigh_quotient_expanded(p: Params, cut: CutoffSpec,
                                     spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Same quotient from the expanded (non-squared) form; only for ``s < 1/2``.

    Uses ``Q = c |S| int_0^inf K(t) t^{n-1} (I_0 - t^{-m} F(t)) dt`` with
    ``F(t) = int eta_eps(r) eta_eps(r t) dr / r``, which converges absolutely
    only when ``s < 1/2``.
    """
    n, s = p.n, p.s
    if s >= 0.5:
        raise DomainError("expanded quotient requires s < 1/2")
    q = n + 2 * s
    m = 0.5 * (n - 2 * s)
    e = cut.eps
    mass = _log_mass(cut)
    k = np.log(np.array(cut.knots))

    def deficit(lt):
        # I_0 - F(t) = int h(x) (h(x) - h(x + log t)) dx, formed from the increment
        # so that it keeps relative accuracy as t -> 1
        lt = lt.ravel()
        edges = np.sort(np.concatenate([np.broadcast_to(k, (lt.size, 4)), k[None, :] - lt[:, None]], axis=1), axis=1)
        x, wk, _ = _gk_pieces(edges)
        ell = np.broadcast_to(lt[:, None, None], x.shape)
        return (cut.log_profile(x) * _increment(cut, x, ell) * wk).sum(axis=(1, 2))

    def f(x, owner):
        # pieces 0/1 cover t in (0, 1), pieces 2/3 cover t > 1 through tau = 1/t
        j, t, w, lt = fold_nodes(x, owner)
        recip = (j == 1)[:, None]
        big_lt = np.where(recip, -lt, lt)
        # I_0 - t^{-m} F(t) = (I_0 - F(t)) - expm1(-m log t) F(t)
        D = deficit(big_lt).reshape(x.shape)
        weight = np.where(recip, t ** (2 * s - 1), t ** (n - 1))
        return fold_kernel(t, w, q, n) * weight * (D - np.expm1(-m * big_lt) * (mass - D))

    kinks = (0.25 * e * e, 0.5 * e * e, e * e)
    pieces = Pieces()
    for j in range(2):
        add_interval(pieces, 0.0, 0.5, ((0.0, 2 * s - 1),), kinks, owner=2 * j, group=0)
        add_interval(pieces, 0.0, 0.5, ((0.0, -2 * s),), owner=2 * j + 1, group=0)
    res = integrate_pieces(f, pieces, 1, spec.rel_tol, spec.abs_tol, spec.max_subdivisions)
    if not res.converged[0]:
        raise QuadratureError("expanded Rayleigh quotient did not converge")
    return constant_cns(p) * float(res.value[0, 0]) / mass


@dataclass(frozen=True)
class LogFit:
    """Least-squares fit ``value = intercept + slope / log(2/eps)``."""

    intercept: float
    slope: float
    eps: tuple
    values: tuple


def extrapolate_quotients(eps: Sequence[float], values: Sequence[float]) -> LogFit:
    if len(eps) < 2:
        raise DomainError("extrapolation needs at least two eps values")
    x = 1.0 / np.log(2.0 / np.asarray(eps, float))
    slope, intercept = np.polyfit(x, np.asarray(values, float), 1)
    return LogFit(float(intercept), float(slope), tuple(eps), tuple(values))


# ---------------------------------------------------------------------------
# stability of the singular solution


def counterpart_identity_check(p: Params) -> float:
    """Relative gap between ``lambda |S|`` and ``((2s+a)/(2s)) A |S|``."""
    from .constants import constant_A, constant_lambda_sing
    lhs = constant_lambda_sing(p) * p.sphere
    rhs = p.kappa / (2 * p.s) * constant_A(p) * p.sphere
    return abs(lhs - rhs) / abs(rhs)


def classify_singular_stability(p: Params, check: bool = False,
                                spec: QuadratureSpec = DEFAULT_SPEC) -> StabilityVerdict:
    """Stability verdict; with ``check=True`` also re-derived from the Hardy oracle."""
    verdict = stability_inequality(p)
    if check:
        oracle = hardy_constant_oracle(p, spec)
        closed = constant_Lambda_hardy(p)
        if abs(oracle - closed) > 1e-4 * closed:
            raise CheckFailed(f"Hardy oracle {oracle!r} disagrees with closed form {closed!r}")
        alt = make_verdict(verdict.lhs, oracle / math.exp(2 * p.s * LOG2))
        if abs(verdict.margin) > 1e-3 and alt.theorem_applies != verdict.theorem_applies:
            raise CheckFailed("verdict changes when the oracle Hardy constant is used")
    return verdict


def critical_henon_exponent(n: int, s: float, tol: float = 1e-12) -> float | None:
    """The ``a* > 0`` where the stability inequality becomes an equality, if any.

    ``lhs(a)`` is affine and increasing, so the root is bracketed by
    doubling, narrowed by bisection to width ``tol`` and then polished with
    one exact secant step.
    """
    p0 = validate_params(n, s, 0.0)
    rhs = stability_rhs(p0)
    slope_base = math.exp(_log_weight_ratio(p0))

    def lhs(a):
        return slope_base * (s + 0.5 * a)

    if lhs(0.0) >= rhs:
        return None
    lo, hi = 0.0, 1.0
    while lhs(hi) <= rhs:
        lo, hi = hi, 2.0 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if lhs(mid) <= rhs:
            lo = mid
        else:
            hi = mid
    # affine: the secant through the bracket hits the root exactly
    flo, fhi = lhs(lo) - rhs, lhs(hi) - rhs
    root = lo - flo * (hi - lo) / (fhi - flo) if fhi != flo else 0.5 * (lo + hi)
    return min(max(root, lo), hi)


@dataclass(frozen=True)
class SweepRow:
    n: float
    s: float
    a: float
    lhs: float
    rhs: float
    theorem_applies: object  # bool, or "error:<message>"


def _sweep_point(args) -> SweepRow | None:
    n, s, a = args
    if n <= 2 * s:
        return None
    try:
        p = validate_params(n, s, a)
        v = stability_inequality(p)
        return SweepRow(n, s, a, v.lhs, v.rhs, v.theorem_applies)
    except (DomainError, ValueError, OverflowError) as exc:
        return SweepRow(n, s, a, math.nan, math.nan, f"error:{exc}")


def stability_region_sweep(n_values, s_values, a_values, workers: int = 1) -> list:
    """One row per grid point, in lexicographic ``(n, s, a)`` index order.

    Points with ``n <= 2s`` lie outside the parameter space and are skipped;
    any other per-point failure is recorded in the row.
    """
    grid = [(n, s, a) for n in n_values for s in s_values for a in a_values]
    if workers > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, grid, chunksize=max(1, len(grid) // (4 * workers))))
    else:
        rows = [_sweep_point(g) for g in grid]
    return [r for r in rows if r is not None]
