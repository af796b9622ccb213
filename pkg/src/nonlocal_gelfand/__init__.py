"""Numerical verification toolkit for the nonlocal Henon-Gelfand-Liouville equation.

``(-Delta)^s u = |x|^a e^u`` in ``R^n``: closed-form constants, the explicit
singular solution, fractional Laplacians, Caffarelli-Silvestre extensions,
the monotonicity energy, Hardy constants and the stability dichotomy.
"""

from .constants import (JLVerdict, Params, StabilityVerdict, all_constants, constant_A,
                        constant_cns, constant_kappa, constant_Lambda_hardy, constant_lambda_sing,
                        constant_poisson, constant_riesz, jl_condition_lane_emden,
                        sobolev_critical_exponent, stability_inequality, validate_params)
from .errors import CheckFailed, DomainError, QuadratureError, UsageError
from .extension import (HalfSpacePoint, extend_radial, grad_extension, poisson_constant,
                        poisson_log_gap)
from .fraclap import (ball_energy_singular, frac_laplacian_batch, frac_laplacian_radial,
                      verify_singular_solution)
from .monotonicity import (EnergyBreakdown, boundary_log_average, energy_breakdown,
                           energy_derivative_boundary)
from .profile import Perturbation, RadialProfile, bump, constant_profile, singular_profile
from .quadrature import (DEFAULT_SPEC, IntegralResult, QuadratureSpec, angular_kernel,
                         integrate_2d_adaptive, integrate_adaptive)
from .representation import (RadialDensity, representation_residual, riesz_potential_radial,
                             singular_density)
from .stability import (CutoffSpec, classify_singular_stability, critical_henon_exponent,
                        extrapolate_quotients, hardy_constant_oracle, hardy_rayleigh_quotient,
                        stability_region_sweep)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
