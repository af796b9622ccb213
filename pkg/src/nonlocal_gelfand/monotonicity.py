"""Scaled half-ball energy of the extension and its boundary derivative.

Everything is centred at the origin and, for radial profiles, written in
polar coordinates ``(r, psi)`` of the half space with ``rho = r cos(psi)``
and ``t = r sin(psi)``; the angle is measured from the flat boundary so that
the singular weight ``sin^{1-2s}(psi) cos^{n-1}(psi)`` of hemisphere
integrals sits at ``psi = 0``, where ``sin`` keeps full relative precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import Params, constant_kappa
from .errors import DomainError, QuadratureError
from .extension import extension_fields
from .gamma import log_beta
from .profile import RadialProfile
from .quadrature import QuadratureSpec, integrate_2d_adaptive, integrate_adaptive

ENERGY_SPEC = QuadratureSpec(rel_tol=1e-6, abs_tol=1e-10)
HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class EnergyBreakdown:
    dirichlet: float
    nonlinear: float
    boundary_log: float
    total: float

    @classmethod
    def from_parts(cls, dirichlet: float, nonlinear: float, boundary_log: float) -> "EnergyBreakdown":
        return cls(dirichlet, nonlinear, boundary_log, dirichlet - nonlinear + boundary_log)


def c_s(p: Params) -> float:
    """``int_{upper unit hemisphere} t^{1-2s} d sigma = |S^{n-1}| B(n/2, 1-s) / 2``."""
    return 0.5 * p.sphere * math.exp(log_beta(0.5 * p.n, 1.0 - p.s))


def c_s_quadrature(p: Params, spec: QuadratureSpec = ENERGY_SPEC) -> float:
    """The same constant by 1D angular quadrature."""
    n, s = p.n, p.s
    hint = ((0.0, 1 - 2 * s),) if s > 0.5 else ()
    res = integrate_adaptive(lambda ps: np.sin(ps) ** (1 - 2 * s) * np.cos(ps) ** (n - 1),
                             0.0, HALF_PI, spec.replace(singularity_hints=hint))
    return p.sphere * res.require("hemisphere weight")


def _field_spec(spec: QuadratureSpec) -> QuadratureSpec:
    return spec.replace(rel_tol=max(spec.rel_tol / 10.0, 1e-12), abs_tol=spec.abs_tol / 10.0,
                        singularity_hints=())


def _fields(u, rho, t, p, spec, grad, term):
    f = extension_fields(u, rho, t, p, _field_spec(spec), grad=grad)
    if not f.converged.all():
        raise QuadratureError(f"{term}: extension quadrature did not converge")
    return f


def _hemisphere(g, p: Params, spec: QuadratureSpec, exponent: float, term: str) -> float:
    """``|S^{n-1}| int_0^{pi/2} sin^{1-2s} cos^{n-1} g(psi) d psi``."""
    n, s = p.n, p.s
    hint = ((0.0, exponent),) if -1 < exponent < 0 else ()

    def f(ps):
        return np.sin(ps) ** (1 - 2 * s) * np.cos(ps) ** (n - 1) * g(ps)

    res = integrate_adaptive(f, 0.0, HALF_PI, spec.replace(singularity_hints=hint))
    return p.sphere * res.require(term)


def _check_lambda(lam: float):
    if not (lam > 0 and math.isfinite(lam)):
        raise DomainError("lambda > 0 required")


def _dirichlet(u: RadialProfile, lam: float, p: Params, spec: QuadratureSpec) -> float:
    n, s = p.n, p.s

    def f(r, ps):
        shape = r.shape
        sin, cos = np.sin(ps), np.cos(ps)
        fl = _fields(u, (r * cos).ravel(), (r * sin).ravel(), p, spec, True, "dirichlet")
        g2 = (fl.d_rho ** 2 + fl.d_t ** 2).reshape(shape)
        return r ** (n + 1 - 2 * s) * cos ** (n - 1) * sin ** (1 - 2 * s) * g2

    x_ex = n - 1 - 2 * s
    x_hints = ((0.0, x_ex),) if -1 < x_ex < 0 else ()
    y_ex = min(1 - 2 * s, 2 * s - 1)
    y_hints = ((0.0, y_ex),) if -1 < y_ex < 0 else ()
    x_points = [lam / 10.0] + [b for b in u.breakpoints() if 0 < b < lam]
    res = integrate_2d_adaptive(f, (0.0, lam, 0.0, HALF_PI), spec, x_hints=x_hints,
                                y_hints=y_hints, x_points=x_points)
    if not res.converged:
        raise QuadratureError(f"dirichlet term did not converge (error estimate {res.error_estimate!r})")
    return lam ** (2 * s - n) * 0.5 * p.sphere * res.value


def _nonlinear(u: RadialProfile, lam: float, p: Params, spec: QuadratureSpec) -> float:
    n, s, a = p.n, p.s, p.a
    ex = n - 1 + a - u.kappa
    hint = ((0.0, ex),) if -1 < ex < 0 else ()
    pts = [b for b in u.breakpoints() if 0 < b < lam]
    res = integrate_adaptive(lambda x: x ** (n - 1 + a) * np.exp(u(x)), 0.0, lam,
                             spec.replace(singularity_hints=hint), points=pts)
    return lam ** (2 * s - n) * constant_kappa(s) * p.sphere * res.require("nonlinear term")


def _boundary_log(u: RadialProfile, lam: float, p: Params, spec: QuadratureSpec) -> float:
    kap = p.kappa

    def g(ps):
        fl = _fields(u, lam * np.cos(ps), lam * np.sin(ps), p, spec, False, "boundary_log")
        return fl.value.reshape(np.shape(ps)) + kap * math.log(lam)

    return kap * _hemisphere(g, p, spec, 1 - 2 * p.s, "boundary_log term")


def energy_breakdown(u: RadialProfile, lam: float, p: Params,
                     spec: QuadratureSpec = ENERGY_SPEC) -> EnergyBreakdown:
    """The three terms of the scaled energy on the half ball of radius ``lam``."""
    _check_lambda(lam)
    return EnergyBreakdown.from_parts(_dirichlet(u, lam, p, spec), _nonlinear(u, lam, p, spec),
                                      _boundary_log(u, lam, p, spec))


def energy_derivative_boundary(u: RadialProfile, lam: float, p: Params,
                               spec: QuadratureSpec = ENERGY_SPEC) -> float:
    """``lam^{2s-n} int t^{1-2s} (d ubar/dr + (2s+a)/r)^2`` over the upper hemisphere of radius ``lam``."""
    _check_lambda(lam)
    kap = p.kappa

    def g(ps):
        sin, cos = np.sin(ps), np.cos(ps)
        fl = _fields(u, lam * cos, lam * sin, p, spec, True, "energy derivative")
        dr = cos * fl.d_rho.reshape(np.shape(ps)) + sin * fl.d_t.reshape(np.shape(ps))
        return (dr + kap / lam) ** 2

    return lam * _hemisphere(g, p, spec, 1 - 2 * p.s, "energy derivative")


def boundary_log_average(u: RadialProfile, lam: float, p: Params,
                         spec: QuadratureSpec = ENERGY_SPEC) -> float:
    """Weighted hemisphere average of ``ubar`` at radius ``lam``."""
    _check_lambda(lam)

    def g(ps):
        fl = _fields(u, lam * np.cos(ps), lam * np.sin(ps), p, spec, False, "boundary average")
        return fl.value.reshape(np.shape(ps))

    return _hemisphere(g, p, spec, 1 - 2 * p.s, "boundary average") / c_s(p)
