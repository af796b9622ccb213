"""Radial profiles ``u(r) = -kappa log r + offset + perturbation(r)``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .constants import Params, constant_lambda_sing
from .errors import DomainError

_GL8_X, _GL8_W = np.polynomial.legendre.leggauss(8)

# |log t| below which folded perturbation increments switch to Taylor form.
TAYLOR_SWITCH = 1e-4


@dataclass(frozen=True)
class Perturbation:
    """Smooth radial function with compact support in ``(0, inf)``.

    ``func`` and ``deriv`` must accept numpy arrays; ``deriv2`` is optional
    and falls back to a central difference of ``deriv``.  Differences at
    nearby radii are formed by integrating ``deriv`` so that the near-diagonal
    increments of the fractional operators do not cancel catastrophically.
    """

    func: Callable
    deriv: Callable
    support: tuple
    deriv2: Callable | None = None

    def __post_init__(self):
        lo, hi = self.support
        if not (0.0 < lo < hi < math.inf):
            raise DomainError(f"perturbation support must be a finite interval in (0, inf), got {self.support}")

    def __call__(self, r):
        r = np.asarray(r, float)
        lo, hi = self.support
        inside = (r > lo) & (r < hi)
        out = np.zeros_like(r)
        if inside.any():
            out[inside] = self.func(r[inside])
        return out

    def derivative(self, r):
        r = np.asarray(r, float)
        lo, hi = self.support
        inside = (r > lo) & (r < hi)
        out = np.zeros_like(r)
        if inside.any():
            out[inside] = self.deriv(r[inside])
        return out

    def second_derivative(self, r):
        r = np.asarray(r, float)
        lo, hi = self.support
        inside = (r > lo) & (r < hi)
        out = np.zeros_like(r)
        if inside.any():
            ri = r[inside]
            if self.deriv2 is not None:
                out[inside] = self.deriv2(ri)
            else:
                h = 1e-5 * (hi - lo)
                out[inside] = (self.derivative(ri + h) - self.derivative(ri - h)) / (2 * h)
        return out

    def diff(self, x, y):
        """``p(x) - p(y)``, via Gauss-Legendre on ``p'`` when ``x`` and ``y`` are close."""
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        out = self(x) - self(y)
        lo, hi = self.support
        near = np.abs(x - y) < 1e-3 * (hi - lo)
        if near.any():
            xa, ya = x[near], y[near]
            mid = 0.5 * (xa + ya)
            half = 0.5 * (xa - ya)
            nodes = mid[:, None] + half[:, None] * _GL8_X[None, :]
            out[near] = half * (self.derivative(nodes) @ _GL8_W)
        return out

    def rescaled(self, lam: float) -> "Perturbation":
        f, df = self.func, self.deriv
        lo, hi = self.support
        d2 = None if self.deriv2 is None else (lambda r, g=self.deriv2: lam * lam * g(lam * r))
        return Perturbation(lambda r: f(lam * r), lambda r: lam * df(lam * r), (lo / lam, hi / lam), d2)

    def fold_combination(self, r, x, w_in, w_out, w_diff=None):
        """``w_in (p(r) - p(r e^x)) + w_out (p(r) - p(r e^-x))``.

        The two increments cancel to first order as ``x -> 0``; below
        ``|x| = TAYLOR_SWITCH`` the sum is taken from its second-order Taylor expansion.
        """
        if w_diff is None:
            w_diff = np.asarray(w_in) - np.asarray(w_out)
        r, x, w_in, w_out, w_diff = np.broadcast_arrays(
            *(np.asarray(v, float) for v in (r, x, w_in, w_out, w_diff)))
        out = w_in * self.diff(r, r * np.exp(x)) + w_out * self.diff(r, r * np.exp(-x))
        near = np.abs(x) < TAYLOR_SWITCH
        if near.any():
            rn, xn = r[near], x[near]
            d1 = rn * self.derivative(rn)
            d2 = d1 + rn * rn * self.second_derivative(rn)
            out[near] = -d1 * xn * w_diff[near] - 0.5 * d2 * xn * xn * (w_in[near] + w_out[near])
        return out


def bump(center: float, width: float, amplitude: float = 1.0) -> Perturbation:
    """C-infinity bump ``amplitude * exp(1 - 1/(1 - z^2))``, ``z = (r - center)/width``."""
    if not 0.0 < width < center:
        raise DomainError("bump needs 0 < width < center")

    def f(r):
        z = (r - center) / width
        with np.errstate(divide="ignore"):  # exp(-inf) = 0 at the support edge
            return amplitude * np.exp(1.0 - 1.0 / (1.0 - z * z))

    def df(r):
        z = (r - center) / width
        g = 1.0 - z * z
        return amplitude * np.exp(1.0 - 1.0 / g) * (-2.0 * z / (g * g)) / width

    def d2f(r):
        z = (r - center) / width
        g = 1.0 - z * z
        phi = -2.0 * z / (g * g * width)
        dphi = -2.0 / width ** 2 * (1.0 / g ** 2 + 4.0 * z * z / g ** 3)
        return f(r) * (phi * phi + dphi)

    return Perturbation(f, df, (center - width, center + width), d2f)


@dataclass(frozen=True)
class RadialProfile:
    kappa: float = 0.0
    offset: float = 0.0
    perturbation: Perturbation | None = field(default=None, compare=False)

    @property
    def singular(self) -> bool:
        return self.kappa != 0.0

    def __call__(self, r):
        r = np.asarray(r, float)
        with np.errstate(divide="ignore"):
            out = -self.kappa * np.log(r) + self.offset if self.kappa else np.full_like(r, self.offset)
        if self.perturbation is not None:
            out = out + self.perturbation(r)
        return out if out.ndim else float(out)

    def derivative(self, r):
        r = np.asarray(r, float)
        out = -self.kappa / r if self.kappa else np.zeros_like(r)
        if self.perturbation is not None:
            out = out + self.perturbation.derivative(r)
        return out

    def diff(self, x, y, log_ratio=None):
        """``u(x) - u(y)``; pass ``log_ratio = log(x/y)`` when it is known more precisely."""
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        out = 0.0
        if self.kappa:
            lr = np.log(x / y) if log_ratio is None else log_ratio
            out = -self.kappa * lr
        if self.perturbation is not None:
            out = out + self.perturbation.diff(x, y)
        return np.broadcast_to(out, np.broadcast_shapes(x.shape, y.shape)).astype(float)

    def fold_combination(self, r, log_t, w_in, w_out, w_diff=None):
        """``w_in (u(r) - u(rt)) + w_out (u(r) - u(r/t))`` without cancellation.

        ``w_diff`` is ``w_in - w_out`` evaluated accurately by the caller.
        """
        log_t = np.asarray(log_t, float)
        out = 0.0
        if self.kappa:
            wd = (w_in - w_out) if w_diff is None else w_diff
            out = self.kappa * log_t * wd
        if self.perturbation is not None:
            out = out + self.perturbation.fold_combination(r, log_t, w_in, w_out, w_diff)
        return np.broadcast_to(out, np.broadcast_shapes(np.shape(r), log_t.shape, np.shape(w_in))).astype(float)

    def breakpoints(self) -> tuple:
        return () if self.perturbation is None else tuple(self.perturbation.support)

    def rescaled(self, lam: float) -> "RadialProfile":
        """Profile of ``u(lam r) + kappa log lam``."""
        pert = None if self.perturbation is None else self.perturbation.rescaled(lam)
        return RadialProfile(self.kappa, self.offset, pert)

    def without_perturbation(self) -> "RadialProfile":
        return RadialProfile(self.kappa, self.offset)

    def perturbation_only(self) -> "RadialProfile":
        return RadialProfile(0.0, 0.0, self.perturbation)

    def with_perturbation(self, pert: Perturbation) -> "RadialProfile":
        return RadialProfile(self.kappa, self.offset, pert)


def singular_profile(p: Params) -> RadialProfile:
    """``-(2s+a) log r + log lambda_{n,s}``, the explicit singular solution."""
    return RadialProfile(p.kappa, math.log(constant_lambda_sing(p)))


def constant_profile(c: float) -> RadialProfile:
    return RadialProfile(0.0, float(c))
