"""Parameter validation and the closed-form Gamma constants.

Everything is assembled in log space from :func:`log_gamma` and exponentiated
once at the end, so nothing overflows for large dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .gamma import log_gamma, sphere_area

LOG2 = math.log(2.0)
LOGPI = math.log(math.pi)


@dataclass(frozen=True)
class Params:
    """Dimension ``n``, fractional order ``s`` and Henon exponent ``a``."""

    n: int
    s: float
    a: float

    @property
    def kappa(self) -> float:
        """Coefficient ``2s + a`` of ``-log|x|`` in the singular solution."""
        return 2.0 * self.s + self.a

    @property
    def sphere(self) -> float:
        """``|S^{n-1}|``."""
        return sphere_area(self.n - 1)

    def with_a(self, a: float) -> "Params":
        return validate_params(self.n, self.s, a)


@dataclass(frozen=True)
class StabilityVerdict:
    lhs: float
    rhs: float
    singular_solution_stable: bool
    theorem_applies: bool

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs


def validate_params(n, s, a) -> Params:
    """Return a :class:`Params` or raise :class:`DomainError` naming the broken constraint."""
    try:
        n_int = int(n)
    except (TypeError, ValueError):
        raise DomainError(f"n must be an integer, got {n!r}") from None
    if n_int != n:
        raise DomainError(f"n must be an integer, got {n!r}")
    s = float(s)
    a = float(a)
    if not all(map(math.isfinite, (s, a))):
        raise DomainError("s and a must be finite")
    if n_int < 1:
        raise DomainError("n >= 1 violated")
    if not 0.0 < s < 1.0:
        raise DomainError("s in (0,1) violated")
    if a < 0.0:
        raise DomainError("a >= 0 violated")
    if not n_int > 2.0 * s:
        raise DomainError("n > 2s violated")
    return Params(n_int, s, a)


def log_constant_cns(p: Params) -> float:
    n, s = p.n, p.s
    return 2 * s * LOG2 + log_gamma((n + 2 * s) / 2) - 0.5 * n * LOGPI - log_gamma(-s)


def constant_cns(p: Params) -> float:
    """Normalizing constant of the fractional Laplacian,
    ``2^{2s} Gamma((n+2s)/2) / (pi^{n/2} |Gamma(-s)|)``."""
    return math.exp(log_constant_cns(p))


def constant_kappa(s: float) -> float:
    """Neumann constant of the extension, ``Gamma(1-s) / (2^{2s-1} Gamma(s))``."""
    if not 0.0 < s < 1.0:
        raise DomainError("s in (0,1) violated")
    return math.exp(log_gamma(1 - s) - (2 * s - 1) * LOG2 - log_gamma(s))


def constant_poisson(p: Params) -> float:
    """Poisson kernel normalizer ``d_{n,s} = Gamma((n+2s)/2) / (pi^{n/2} Gamma(s))``."""
    n, s = p.n, p.s
    return math.exp(log_gamma((n + 2 * s) / 2) - 0.5 * n * LOGPI - log_gamma(s))


def constant_riesz(p: Params) -> float:
    """Riesz potential constant ``Gamma((n-2s)/2) / (4^s pi^{n/2} Gamma(s))``.

    Normalized so that ``c (-Delta)^s |x|^{2s-n} = delta``.
    """
    n, s = p.n, p.s
    return math.exp(log_gamma((n - 2 * s) / 2) - 2 * s * LOG2 - 0.5 * n * LOGPI - log_gamma(s))


def constant_A(p: Params) -> float:
    """``(-Delta)^s log(1/|x|^{2s}) = A |x|^{-2s}`` with
    ``A = 2^{2s} Gamma(n/2) Gamma(1+s) / Gamma((n-2s)/2)``."""
    n, s = p.n, p.s
    return math.exp(2 * s * LOG2 + log_gamma(n / 2) + log_gamma(1 + s) - log_gamma((n - 2 * s) / 2))


def _log_weight_ratio(p: Params) -> float:
    # log of Gamma(n/2) Gamma(s) / Gamma((n-2s)/2)
    n, s = p.n, p.s
    return log_gamma(n / 2) + log_gamma(s) - log_gamma((n - 2 * s) / 2)


def _log_hardy_ratio(p: Params) -> float:
    # log of Gamma^2((n+2s)/4) / Gamma^2((n-2s)/4)
    n, s = p.n, p.s
    return 2.0 * (log_gamma((n + 2 * s) / 4) - log_gamma((n - 2 * s) / 4))


def constant_lambda_sing(p: Params) -> float:
    """Coefficient of the singular solution ``-(2s+a) log|x| + log lambda``."""
    return math.exp(2 * p.s * LOG2 + _log_weight_ratio(p)) * (p.s + 0.5 * p.a)


def constant_Lambda_hardy(p: Params) -> float:
    """Sharp constant of the fractional Hardy inequality."""
    return math.exp(2 * p.s * LOG2 + _log_hardy_ratio(p))


def stability_lhs(p: Params) -> float:
    return math.exp(_log_weight_ratio(p)) * (p.s + 0.5 * p.a)


def stability_rhs(p: Params) -> float:
    return math.exp(_log_hardy_ratio(p))


def make_verdict(lhs: float, rhs: float) -> StabilityVerdict:
    # ties go to "stable": the stability criterion is a non-strict inequality
    stable = lhs <= rhs or math.isclose(lhs, rhs, rel_tol=4 * 2.0**-52, abs_tol=0.0)
    return StabilityVerdict(lhs, rhs, stable, not stable)


def stability_inequality(p: Params) -> StabilityVerdict:
    """Compare the singular solution's weight against the Hardy constant.

    Both sides carry a common factor ``2^{2s}`` that is dropped.
    """
    return make_verdict(stability_lhs(p), stability_rhs(p))


def sobolev_critical_exponent(n, s, a) -> float:
    """``(n+2s+2a)/(n-2s)`` for ``n > 2s`` and ``+inf`` otherwise."""
    n, s, a = float(n), float(s), float(a)
    if n < 1 or not 0.0 < s < 1.0 or a < 0.0:
        raise DomainError("need n >= 1, s in (0,1), a >= 0")
    if n <= 2 * s:
        return math.inf
    return (n + 2 * s + 2 * a) / (n - 2 * s)


@dataclass(frozen=True)
class JLVerdict:
    lhs: float
    rhs: float
    holds: bool
    theta: float


def jl_condition_lane_emden(p: Params, q: float) -> JLVerdict:
    """Evaluate the Joseph-Lundgren type condition for the Henon-Lane-Emden exponent ``q``."""
    q = float(q)
    if not q > 1.0:
        raise DomainError("q > 1 violated")
    n, s = p.n, p.s
    theta = (s + 0.5 * p.a) / (q - 1.0)
    args = (n / 2 - theta, s + theta, theta, (n - 2 * s) / 2 - theta)
    if min(args) <= 0.0:
        raise DomainError(
            f"Gamma argument non-positive: need 0 < theta={theta:.6g} < (n-2s)/2={(n - 2 * s) / 2:.6g}"
        )
    log_lhs = (
        math.log(q)
        + log_gamma(args[0])
        + log_gamma(args[1])
        - log_gamma(args[2])
        - log_gamma(args[3])
    )
    lhs = math.exp(log_lhs)
    rhs = stability_rhs(p)
    return JLVerdict(lhs, rhs, lhs > rhs, theta)


def all_constants(p: Params) -> dict:
    """Every closed-form constant for ``p``, keyed by a stable name."""
    return {
        "c_ns": constant_cns(p),
        "kappa_s": constant_kappa(p.s),
        "d_ns": constant_poisson(p),
        "c_riesz": constant_riesz(p),
        "A_ns": constant_A(p),
        "lambda_ns": constant_lambda_sing(p),
        "Lambda_ns": constant_Lambda_hardy(p),
        "p_S": sobolev_critical_exponent(p.n, p.s, p.a),
    }
