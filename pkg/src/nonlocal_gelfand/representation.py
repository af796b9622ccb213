"""Riesz representation of radial solutions.

For a radial density ``f`` the renormalized Riesz potential

    v(r) = c int_{R^n} ( |x - y|^{2s-n} - (1 + |y|)^{2s-n} ) f(|y|) dy

is reduced to one radial integral in ``t = |y| / r``:

    v(r) = c r^{2s} int_0^inf f(rt) t^{n-1} [ K(t) - |S| (t + 1/r)^{2s-n} ] dt

with ``K = K_{n-2s}`` the angular kernel.  The part ``t > 1`` is folded to
``tau = 1/t`` where, by homogeneity, the bracket becomes
``K(tau) - |S| (1 + tau/r)^{2s-n}``.  Both terms tend to ``|S|`` as
``tau -> 0``; their difference is formed from ``expm1``/``log1p`` pieces so
the slowly decaying tail keeps full relative accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .constants import Params, constant_lambda_sing, constant_riesz
from .errors import DomainError, UsageError
from .fraclap import fold_kernel
from .gamma import sphere_area
from .profile import singular_profile
from .quadrature import DEFAULT_SPEC, IntegralResult, Pieces, QuadratureSpec, add_interval, integrate_pieces

_GL_X, _GL_W = np.polynomial.legendre.leggauss(48)
_PSI = 0.5 * math.pi * (_GL_X + 1.0)


@dataclass(frozen=True)
class RadialDensity:
    """Radial density ``f(rho) >= 0`` with power behavior ``rho^-beta0`` at 0 and ``rho^-beta_inf`` at infinity.

    ``beta_inf = inf`` declares compact support.  ``points`` are radii where
    ``f`` is not smooth.
    """

    f: Callable
    beta0: float = 0.0
    beta_inf: float = math.inf
    points: tuple = ()

    def __call__(self, rho):
        return np.asarray(self.f(rho), float)

    def check(self, p: Params):
        if not self.beta0 < p.n:
            raise DomainError(f"density exponent at 0 must be < n = {p.n}, got {self.beta0}")
        # The kernel difference decays like rho^{2s-n-1}, one power faster
        # than either term alone, so beta_inf = 2s is still admissible.
        if not self.beta_inf > 2 * p.s - 1:
            raise DomainError(f"density exponent at infinity must be > 2s - 1 = {2 * p.s - 1}, "
                              f"got {self.beta_inf}")


def zero_density() -> RadialDensity:
    return RadialDensity(lambda r: np.zeros_like(np.asarray(r, float)))


def singular_density(p: Params) -> RadialDensity:
    """``|y|^a e^u`` for the singular solution, i.e. ``lambda rho^{-2s}``."""
    lam = constant_lambda_sing(p)
    s = p.s
    return RadialDensity(lambda r: lam * np.asarray(r, float) ** (-2 * s), 2 * s, 2 * s)


def sphere_excess(tau, q: float, n: int):
    """``K_q(tau) - |S^{n-1}|`` for ``0 <= tau <= 1/2``, free of cancellation."""
    tau = np.asarray(tau, float)
    if n == 1:
        return np.expm1(-q * np.log1p(-tau)) + np.expm1(-q * np.log1p(tau))
    cos = np.cos(_PSI)
    w = 0.5 * math.pi * _GL_W
    if n > 2:
        w = w * np.sin(_PSI) ** (n - 2)
    t = tau[..., None]
    vals = np.expm1(-0.5 * q * np.log1p(t * (t - 2.0 * cos)))
    return sphere_area(n - 2) * (vals * w).sum(axis=-1)


def riesz_potential_batch(f: RadialDensity, radii, p: Params,
                          spec: QuadratureSpec = DEFAULT_SPEC) -> list:
    """Renormalized Riesz potential of ``f`` at each radius (list of IntegralResult)."""
    f.check(p)
    radii = np.asarray(radii, float)
    if (radii <= 0).any():
        raise UsageError("radii must be positive")
    n, s = p.n, p.s
    q = n - 2 * s
    area = p.sphere
    diag = 2 * s - 1
    pieces = Pieces()
    for j, r in enumerate(radii):
        inner = [b / r for b in f.points if 0 < b < r]
        outer = [r / b for b in f.points if b > r]
        t_in = [x for x in inner if x < 0.5]
        w_in = [1 - x for x in inner if x > 0.5]
        t_out = [x for x in outer if x < 0.5]
        w_out = [1 - x for x in outer if x > 0.5]
        add_interval(pieces, 0.0, 0.5, ((0.0, n - 1 - f.beta0),), t_in, owner=4 * j, group=j)
        add_interval(pieces, 0.0, 0.5, ((0.0, diag),), w_in, owner=4 * j + 1, group=j)
        add_interval(pieces, 0.0, 0.5, ((0.0, f.beta_inf - 2 * s),), t_out, owner=4 * j + 2, group=j)
        add_interval(pieces, 0.0, 0.5, ((0.0, diag),), w_out, owner=4 * j + 3, group=j)

    def integrand(x, owner):
        j = owner // 4
        kind = owner % 4
        r = radii[j][:, None]
        out = np.empty_like(x)
        near = kind % 2 == 1
        t = np.where(near[:, None], 1.0 - x, x)
        w = np.where(near[:, None], x, 1.0 - x)
        rows = kind <= 1
        if rows.any():
            tt, ww, rr = t[rows], w[rows], r[rows]
            bracket = fold_kernel(tt, ww, q, n) - area * (tt + 1.0 / rr) ** (-q)
            out[rows] = f(rr * tt) * tt ** (n - 1) * bracket
        rows = kind == 3
        if rows.any():
            tt, ww, rr = t[rows], w[rows], r[rows]
            bracket = fold_kernel(tt, ww, q, n) - area * (1.0 + tt / rr) ** (-q)
            out[rows] = f(rr / tt) * tt ** (-1 - 2 * s) * bracket
        rows = kind == 2
        if rows.any():
            tt, rr = t[rows], r[rows]
            bracket = sphere_excess(tt, q, n) - area * np.expm1(-q * np.log1p(tt / rr))
            with np.errstate(over="ignore", invalid="ignore"):
                val = f(rr / tt) * tt ** (-1 - 2 * s) * bracket
            out[rows] = np.where(tt > 0, val, 0.0)
        return out

    res = integrate_pieces(integrand, pieces, len(radii), spec.rel_tol, spec.abs_tol,
                           spec.max_subdivisions)
    scale = constant_riesz(p) * radii ** (2 * s)
    return [IntegralResult(float(scale[j] * res.value[j, 0]), float(scale[j] * res.error[j, 0]),
                           bool(res.converged[j]), int(res.subdivisions[j]))
            for j in range(len(radii))]


def riesz_potential_radial(f: RadialDensity, x_radius: float, p: Params,
                           spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Riesz potential of ``f`` at ``|x| = x_radius``; raises QuadratureError on non-convergence."""
    return riesz_potential_batch(f, [x_radius], p, spec)[0].require("Riesz potential")


@dataclass(frozen=True)
class RepresentationReport:
    params: Params
    radii: tuple
    residuals: tuple
    tol: float = 1e-3

    @property
    def spread(self) -> float:
        return max(self.residuals) - min(self.residuals)

    @property
    def vacuous(self) -> bool:
        """A single radius says nothing about constancy."""
        return len(self.radii) < 2

    @property
    def constant(self) -> float:
        return float(np.mean(self.residuals))

    @property
    def passed(self) -> bool:
        return self.spread <= self.tol


def representation_residual(p: Params, radii: Sequence[float] = (0.5, 1.0, 2.0),
                            spec: QuadratureSpec = DEFAULT_SPEC, tol: float = 1e-3) -> RepresentationReport:
    """``u(r) - v(r)`` for the singular solution; constant if the representation holds."""
    radii = tuple(float(r) for r in radii)
    if not radii:
        raise UsageError("radii list is empty")
    u = singular_profile(p)
    results = riesz_potential_batch(singular_density(p), radii, p, spec)
    resid = tuple(float(u(r)) - res.require(f"Riesz potential at r={r!r}")
                  for r, res in zip(radii, results))
    return RepresentationReport(p, radii, resid, tol)
