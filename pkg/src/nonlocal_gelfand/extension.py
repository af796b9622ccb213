"""Poisson extension of radial profiles to the upper half space.

A point of the half space is ``X = (x, t)`` with ``rho = |x|``.  Writing
``R = |X|``, ``gamma = rho / R`` and ``c = t / R``, and folding the radial
integral at ``R`` (``sigma -> 1/sigma`` maps the kernel onto itself because
``gamma^2 + c^2 = 1``), the extension becomes::

    ubar(X) = u_ref + d c^{2s} int_0^1 A(tau) [ (u(R tau) - u_ref) tau^{n-1}
                                             + (u(R/tau) - u_ref) tau^{2s-1} ] dtau

with ``A`` the sphere average of ``D^{-(n+2s)/2}``,
``D = (tau - gamma)^2 + c^2 + 4 gamma tau sin^2(psi/2)``.  Subtracting the
reference value ``u_ref = u(rho)`` is legitimate because the kernel has unit
mass, and keeps the log singularity of ``u`` out of the leading term.
Derivatives differentiate the kernel under the integral and reuse the same
fold with the moments ``B`` (exponent shifted by one) and ``C`` (cosine
weighted).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import Params, constant_poisson
from .errors import CheckFailed, DomainError, QuadratureError
from .profile import RadialProfile
from .quadrature import DEFAULT_SPEC, Pieces, QuadratureSpec, add_interval, integrate_pieces, sphere_moments


@dataclass(frozen=True)
class HalfSpacePoint:
    rho: float
    t: float

    def __post_init__(self):
        if not (self.rho >= 0 and self.t >= 0 and math.isfinite(self.rho) and math.isfinite(self.t)):
            raise DomainError(f"half-space point needs finite rho >= 0 and t >= 0, got ({self.rho}, {self.t})")

    @property
    def norm(self) -> float:
        return math.hypot(self.rho, self.t)

    def scaled(self, lam: float) -> "HalfSpacePoint":
        return HalfSpacePoint(lam * self.rho, lam * self.t)


@dataclass(frozen=True)
class ExtensionFields:
    """Extension values and partial derivatives at a batch of points."""

    value: np.ndarray
    d_rho: np.ndarray
    d_t: np.ndarray
    error: np.ndarray
    converged: np.ndarray

    def require(self, what: str = "extension"):
        if not self.converged.all():
            bad = int(np.argmin(self.converged))
            raise QuadratureError(
                f"{what} did not converge at point {bad}: error estimate {self.error[bad]!r}")
        return self


def poisson_constant(p: Params, check: bool = False, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``d_{n,s}``; with ``check=True`` the kernel mass is confirmed at sample points."""
    d = constant_poisson(p)
    if check:
        for X in (HalfSpacePoint(0.0, 1.0), HalfSpacePoint(1.0, 0.5), HalfSpacePoint(2.0, 0.1)):
            mass = poisson_mass(X, p, spec)
            if abs(mass - 1.0) > 1e-6:
                raise CheckFailed(f"Poisson kernel mass {mass!r} at {X} differs from 1 by more than 1e-6")
    return d


def poisson_mass(X: HalfSpacePoint, p: Params, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``int P(X, y) dy`` by the folded radial quadrature (should be 1)."""
    if X.t <= 0:
        raise DomainError("t > 0 required")
    n, s = p.n, p.s
    R = X.norm
    g, c = X.rho / R, X.t / R
    pieces = Pieces()
    add_interval(pieces, 0.0, 1.0, _hints(s), _peak_points(g, c))

    def f(tau, _owner):
        A = sphere_moments((tau - g) ** 2 + c * c, 4.0 * g * tau, 0.5 * (n + 2 * s), n)["A"]
        return A * (tau ** (n - 1) + tau ** (2 * s - 1))

    res = integrate_pieces(f, pieces, 1, spec.rel_tol, spec.abs_tol, spec.max_subdivisions)
    if not res.converged[0]:
        raise QuadratureError("Poisson kernel mass did not converge")
    return float(constant_poisson(p) * c ** (2 * s) * res.value[0, 0])


def _hints(s: float):
    return ((0.0, 2 * s - 1),) if s < 0.5 else ()


def _peak_points(g: float, c: float):
    pts = {g, g - c, g + c, g - 10 * c}
    return sorted(x for x in pts if 0.0 < x < 1.0)


def _profile_points(u: RadialProfile, R: float):
    pts = []
    for b in u.breakpoints():
        for x in (b / R, R / b):
            if 0.0 < x < 1.0:
                pts.append(x)
    return pts


def extension_fields(u: RadialProfile, rho, t, p: Params, spec: QuadratureSpec = DEFAULT_SPEC,
                     grad: bool = True) -> ExtensionFields:
    """Extension value (and gradient when ``grad``) at every point ``(rho[i], t[i])``.

    Points with ``t = 0`` return the trace ``u(rho)`` and NaN derivatives.
    """
    rho, t = np.broadcast_arrays(np.asarray(rho, float).ravel(), np.asarray(t, float).ravel())
    if (rho < 0).any() or (t < 0).any():
        raise DomainError("rho >= 0 and t >= 0 required")
    if u.singular and ((rho == 0) & (t == 0)).any():
        raise DomainError("singular profile cannot be evaluated at the origin")
    m = rho.size
    value = np.empty(m)
    d_rho = np.full(m, np.nan)
    d_t = np.full(m, np.nan)
    error = np.zeros(m)
    converged = np.ones(m, bool)
    trace = t == 0
    if trace.any():
        value[trace] = u(rho[trace])
    idx = np.flatnonzero(~trace)
    if idx.size == 0:
        return ExtensionFields(value, d_rho, d_t, error, converged)

    n, s = p.n, p.s
    q = n + 2 * s
    rr, tt = rho[idx], t[idx]
    R = np.hypot(rr, tt)
    g = rr / R
    c = tt / R
    on_axis = rr == 0
    ref = np.where(on_axis, R, rr)
    # log(R / ref) without cancellation when t << rho
    with np.errstate(divide="ignore"):
        LR = np.where(on_axis, 0.0, 0.5 * np.log1p((tt / np.where(on_axis, 1.0, rr)) ** 2))
    uref = np.asarray(u(ref), float)

    pieces = Pieces()
    hints = _hints(s)
    for j in range(idx.size):
        pts = _peak_points(g[j], c[j]) + _profile_points(u, R[j])
        add_interval(pieces, 0.0, 1.0, hints, pts, owner=j, group=j)

    which = ("A", "B", "C") if grad else ("A",)

    def integrand(tau, owner):
        gj = g[owner][:, None]
        cj = c[owner][:, None]
        Rj = R[owner][:, None]
        refj = ref[owner][:, None]
        lt = np.log(tau)
        LRj = LR[owner][:, None]
        du1 = u.diff(Rj * tau, refj, log_ratio=lt + LRj)
        du2 = u.diff(Rj / tau, refj, log_ratio=LRj - lt)
        mom = sphere_moments((tau - gj) ** 2 + cj * cj, 4.0 * gj * tau, 0.5 * q, n, which)
        tn1 = tau ** (n - 1)
        t2s = tau ** (2 * s)
        IA = mom["A"] * (du1 * tn1 + du2 * t2s / tau)
        if not grad:
            return IA
        IB = mom["B"] * (du1 * tn1 + du2 * t2s * tau)
        IC = mom["C"] * (du1 * tn1 * tau + du2 * t2s)
        IBr = gj * mom["B"] * (du1 * tn1 + du2 * t2s * tau)
        return np.stack([IA, IB, IBr - IC], axis=-1)

    d = constant_poisson(p)
    c2s = c ** (2 * s)
    rel, ab = spec.rel_tol, spec.abs_tol

    def tolerance(V):
        # The B and C moments reach the gradient through the factors
        # c^{2s+1} and c^{2s}, so their targets are set relative to the
        # gradient size rather than to their own (cancelling) values.
        T = np.maximum(rel * np.abs(V), ab)
        if grad:
            gt = 2 * s * c ** (2 * s - 1) * V[:, 0] - q * c ** (2 * s + 1) * V[:, 1]
            gnorm = np.hypot(gt, q * c2s * V[:, 2])
            T[:, 1] = np.maximum(T[:, 1], rel * gnorm / (q * c ** (2 * s + 1)))
            T[:, 2] = np.maximum(T[:, 2], rel * gnorm / (q * c2s))
        return T

    res = integrate_pieces(integrand, pieces, idx.size, spec.rel_tol, spec.abs_tol,
                           spec.max_subdivisions, tolerance=tolerance)
    IA = res.value[:, 0]
    value[idx] = uref + d * c2s * IA
    error[idx] = d * c2s * res.error[:, 0]
    converged[idx] = res.converged
    if grad:
        IB, IBC = res.value[:, 1], res.value[:, 2]
        d_t[idx] = d / R * (2 * s * c ** (2 * s - 1) * IA - q * c ** (2 * s + 1) * IB)
        d_rho[idx] = -q * d * c2s / R * IBC
        error[idx] = np.maximum(error[idx], d / R * (2 * s * c ** (2 * s - 1) * res.error[:, 0]
                                                      + q * c ** (2 * s + 1) * res.error[:, 1]
                                                      + q * c2s * res.error[:, 2]))
    return ExtensionFields(value, d_rho, d_t, error, converged)


def extend_radial(u: RadialProfile, X: HalfSpacePoint, p: Params,
                  spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Poisson extension ``ubar(X)``; at ``t = 0`` the trace ``u(rho)``."""
    f = extension_fields(u, [X.rho], [X.t], p, spec, grad=False).require("extension value")
    return float(f.value[0])


def grad_extension(u: RadialProfile, X: HalfSpacePoint, p: Params,
                   spec: QuadratureSpec = DEFAULT_SPEC) -> tuple:
    """``(d ubar / d rho, d ubar / d t)`` at ``X`` by differentiating the kernel."""
    if X.t <= 0:
        raise DomainError("t > 0 required for the gradient")
    f = extension_fields(u, [X.rho], [X.t], p, spec, grad=True).require("extension gradient")
    return float(f.d_rho[0]), float(f.d_t[0])


def grad_extension_fd(u: RadialProfile, X: HalfSpacePoint, p: Params,
                      spec: QuadratureSpec = DEFAULT_SPEC, rel_step: float = 1e-4) -> tuple:
    """Central finite differences of :func:`extend_radial` (cross-check only)."""
    h = rel_step * X.norm
    if X.t <= h:
        raise DomainError("finite differences need t > step")
    rho = [X.rho + h, max(X.rho - h, 0.0), X.rho, X.rho]
    t = [X.t, X.t, X.t + h, X.t - h]
    f = extension_fields(u, rho, t, p, spec, grad=False).require("extension value")
    v = f.value
    return (v[0] - v[1]) / (rho[0] - rho[1]), (v[2] - v[3]) / (2 * h)


def poisson_log_gap(X: HalfSpacePoint, p: Params, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``int P(X, y) log|y| dy - log rho``; nonnegative by the Poisson-log inequality."""
    if not (X.rho > 0 and X.t > 0):
        raise DomainError("poisson_log_gap needs rho > 0 and t > 0")
    u = RadialProfile(kappa=-1.0)
    f = extension_fields(u, [X.rho], [X.t], p, spec, grad=False).require("Poisson log integral")
    return float(f.value[0] - math.log(X.rho))
