"""Fractional Laplacian of radial profiles and the singular-solution check.

For radial ``u`` the principal value integral is written in the ratio
``t = rho / r`` and the half ``t > 1`` is folded back onto ``(0, 1)`` with
the homogeneity ``K(1/t) = t^{n+2s} K(t)`` of the angular kernel::

    (-Delta)^s u(r) = c r^{-2s} int_0^1 K(t) [ (u(r) - u(rt)) t^{n-1}
                                             + (u(r) - u(r/t)) t^{2s-1} ] dt

The two differences cancel to first order at ``t = 1``, leaving an
integrable ``|1 - t|^{1-2s}`` diagonal.  The same folded layout serves the
Hardy integrals in :mod:`stability`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constants import Params, constant_cns, constant_lambda_sing
from .errors import QuadratureError, UsageError
from .profile import TAYLOR_SWITCH, RadialProfile, singular_profile
from .quadrature import (DEFAULT_SPEC, IntegralResult, Pieces, QuadratureSpec,
                         add_interval, integrate_adaptive, integrate_pieces, sphere_moments)

DEFAULT_RADII = tuple(2.0 ** k for k in range(-2, 3))


def fold_kernel(t, w, q: float, n: int):
    """``K_q(t)`` given both ``t`` and ``w = 1 - t`` (``w`` carries the precision near 1)."""
    return sphere_moments(w * w, 4.0 * t, 0.5 * q, n)["A"]


def add_fold_pieces(pieces: Pieces, s: float, t_points=(), w_points=(), index: int = 0):
    """Append the two halves of a folded ``(0, 1)`` integral for integral ``index``.

    ``t`` in ``(0, 1/2]`` is integrated directly (endpoint exponent ``2s-1``
    at 0) and ``t`` in ``[1/2, 1)`` through ``w = 1 - t`` (exponent ``1-2s``
    at ``w = 0``), so that both singular endpoints sit at an exact zero.
    Owners ``2 index`` and ``2 index + 1`` tell :func:`fold_nodes` which half
    a node belongs to.
    """
    tp = [x for x in t_points if 0.0 < x < 0.5] + [1.0 - x for x in w_points if 0.5 < x < 1.0]
    wp = [x for x in w_points if 0.0 < x < 0.5] + [1.0 - x for x in t_points if 0.5 < x < 1.0]
    add_interval(pieces, 0.0, 0.5, ((0.0, 2 * s - 1),), tp, owner=2 * index, group=index)
    add_interval(pieces, 0.0, 0.5, ((0.0, 1 - 2 * s),), wp, owner=2 * index + 1, group=index)


def fold_nodes(x, owner):
    """``(index, t, w, log t)`` for nodes of pieces made by :func:`add_fold_pieces`."""
    side = (owner % 2 == 1)[:, None]
    with np.errstate(divide="ignore"):
        t = np.where(side, 1.0 - x, x)
        w = np.where(side, x, 1.0 - x)
        lt = np.where(side, np.log1p(-x), np.log(x))
    return owner // 2, t, w, lt


def fold_points(u: RadialProfile, r: float):
    """Breakpoints ``(t_points, w_points)`` of the folded integrand at radius ``r``."""
    tp, wp = [], []
    for b in u.breakpoints():
        for num, den in ((b, r), (r, b)):
            if num < den:
                tp.append(num / den)
                wp.append((den - num) / den)
    if u.perturbation is not None:
        wp.append(-math.expm1(-TAYLOR_SWITCH))
    return tp, wp


def frac_laplacian_batch(u: RadialProfile, radii, p: Params, spec: QuadratureSpec = DEFAULT_SPEC):
    """``(-Delta)^s u`` at every radius in ``radii``; returns one IntegralResult per radius."""
    radii = np.asarray(radii, float)
    if (radii <= 0).any():
        raise UsageError("radii must be positive")
    n, s = p.n, p.s
    q = n + 2 * s
    pieces = Pieces()
    for j, r in enumerate(radii):
        tp, wp = fold_points(u, r)
        add_fold_pieces(pieces, s, tp, wp, j)

    def integrand(x, owner):
        j, t, w, lt = fold_nodes(x, owner)
        r = radii[j][:, None]
        w_out = t ** (2 * s - 1)
        comb = u.fold_combination(r, lt, t ** (n - 1), w_out, w_out * np.expm1((n - 2 * s) * lt))
        return fold_kernel(t, w, q, n) * comb

    res = integrate_pieces(integrand, pieces, len(radii), spec.rel_tol, spec.abs_tol,
                           spec.max_subdivisions)
    scale = constant_cns(p) * radii ** (-2 * s)
    return [IntegralResult(float(scale[j] * res.value[j, 0]), float(scale[j] * res.error[j, 0]),
                           bool(res.converged[j]), int(res.subdivisions[j]))
            for j in range(len(radii))]


def frac_laplacian_radial(u: RadialProfile, r: float, p: Params,
                          spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``(-Delta)^s u(r)`` for a radial profile; raises QuadratureError on non-convergence."""
    return frac_laplacian_batch(u, [r], p, spec)[0].require("fractional Laplacian")


def log_profile_closed_form(kappa: float, r: float, p: Params) -> float:
    """``(-Delta)^s (-kappa log r) = (kappa / 2s) A r^{-2s}``."""
    from .constants import constant_A
    return kappa / (2 * p.s) * constant_A(p) * r ** (-2 * p.s)


@dataclass(frozen=True)
class SingularResidualReport:
    params: Params
    radii: tuple
    computed: tuple
    expected: tuple
    residuals: tuple
    tol: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol


def verify_singular_solution(p: Params, radii: Sequence[float] = DEFAULT_RADII,
                             spec: QuadratureSpec = DEFAULT_SPEC, tol: float = 1e-6) -> SingularResidualReport:
    """Compare ``(-Delta)^s u`` of the singular solution with ``lambda r^{-2s}``."""
    radii = tuple(float(r) for r in radii)
    if not radii:
        raise UsageError("radii list is empty")
    results = frac_laplacian_batch(singular_profile(p), radii, p, spec)
    lam = constant_lambda_sing(p)
    computed, expected, resid = [], [], []
    for r, res in zip(radii, results):
        val = res.require(f"fractional Laplacian at r={r!r}")
        want = lam * r ** (-2 * p.s)
        computed.append(val)
        expected.append(want)
        resid.append(abs(val - want) / abs(want))
    return SingularResidualReport(p, radii, tuple(computed), tuple(expected), tuple(resid), tol)


@dataclass(frozen=True)
class BallEnergy:
    closed_form: float
    quadrature: float | None = None

    @property
    def relative_gap(self) -> float | None:
        if self.quadrature is None:
            return None
        return abs(self.quadrature - self.closed_form) / abs(self.closed_form)


def ball_energy_singular(p: Params, r: float, check: bool = False,
                         spec: QuadratureSpec = DEFAULT_SPEC) -> BallEnergy:
    """``int_{B_r} |x|^a e^u dx`` for the singular solution.

    With ``check=True`` the radial integral is also evaluated by quadrature
    from the profile itself.
    """
    if not r > 0:
        raise UsageError("r > 0 required")
    n, s, a = p.n, p.s, p.a
    lam = constant_lambda_sing(p)
    closed = lam * p.sphere * r ** (n - 2 * s) / (n - 2 * s)
    if not check:
        return BallEnergy(closed)
    u = singular_profile(p)
    ex = n - 1 - 2 * s
    hints = ((0.0, ex),) if -1 < ex < 0 else ()
    res = integrate_adaptive(lambda x: x ** (n - 1 + a) * np.exp(u(x)), 0.0, r,
                             spec.replace(singularity_hints=hints))
    return BallEnergy(closed, p.sphere * res.require("ball energy"))
