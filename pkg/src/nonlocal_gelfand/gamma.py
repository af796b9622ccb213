"""Gamma-function helpers on top of :func:`math.lgamma`.

Every closed-form constant in the package is a ratio of Gamma values, so it
is assembled in log space and exponentiated once.
"""

import math

import numpy as np

_LOG_PI = math.log(math.pi)


def log_gamma(x: float) -> float:
    """Return ``log|Gamma(x)|``.

    Raises ``ValueError`` at the poles (non-positive integers).
    """
    x = float(x)
    if math.isnan(x):
        return math.nan
    if x <= 0.0 and x == math.floor(x):
        raise ValueError(f"Gamma has a pole at {x}")
    return math.lgamma(x)


def gamma_sign(x: float) -> float:
    """Sign of Gamma(x) (+1 for x > 0, alternating on the negative axis)."""
    if x > 0:
        return 1.0
    if x == math.floor(x):
        raise ValueError(f"Gamma has a pole at {x}")
    return -1.0 if math.floor(x) % 2 else 1.0


def gamma(x: float) -> float:
    return gamma_sign(x) * math.exp(log_gamma(x))


def log_gamma_array(x):
    """Vectorized ``log|Gamma|`` for numpy input."""
    x = np.asarray(x, dtype=float)
    out = np.vectorize(log_gamma, otypes=[float])(x)
    return out if out.ndim else float(out)


def log_beta(a: float, b: float) -> float:
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b)


def sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere S^dim in R^(dim+1).

    ``sphere_area(0) == 2`` (two points), ``sphere_area(1) == 2*pi``.
    """
    if dim < 0:
        raise ValueError("sphere dimension must be >= 0")
    h = 0.5 * (dim + 1)
    return 2.0 * math.exp(h * _LOG_PI - log_gamma(h))
