"""Closed-form integrals used to audit the quadrature error estimates."""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from nonlocal_gelfand.gamma import log_beta
from nonlocal_gelfand.quadrature import QuadratureSpec


@dataclass(frozen=True)
class Case:
    name: str
    f: Callable
    lo: float
    hi: float
    exact: float
    hints: tuple = ()
    points: tuple = ()
    two_d: bool = False
    extra: dict = field(default_factory=dict)


CASES = [
    Case("x^2", lambda x: x * x, 0.0, 1.0, 1.0 / 3.0),
    Case("sin", np.sin, 0.0, math.pi, 2.0),
    Case("x^-1/2", lambda x: x ** -0.5, 0.0, 1.0, 2.0, ((0.0, -0.5),)),
    Case("x^-0.9", lambda x: x ** -0.9, 0.0, 1.0, 10.0, ((0.0, -0.9),)),
    Case("x^0.2", lambda x: x ** 0.2, 0.0, 1.0, 1.0 / 1.2),
    Case("beta(0.7,0.4)", lambda x: x ** -0.3 * (1 - x) ** -0.6, 0.0, 1.0,
         math.exp(log_beta(0.7, 0.4)), ((0.0, -0.3), (1.0, -0.6))),
    Case("|1-t|^-0.5 diagonal", lambda x: np.abs(1 - x) ** -0.5, 0.0, 2.0, 4.0, ((1.0, -0.5),)),
    # a singular point away from 0 is passed through w = 1 - t, as the library does
    Case("w^-0.8 reflected endpoint", lambda w: w ** -0.8, 0.0, 1.0, 5.0, ((0.0, -0.8),)),
    Case("|x|^-0.8 interior", lambda x: np.abs(x) ** -0.8, -1.0, 1.0, 10.0, ((0.0, -0.8),)),
    Case("|1-t|^0.6 kink", lambda x: np.abs(1 - x) ** 0.6, 0.0, 2.0, 2.0 / 1.6, ((1.0, 0.6),)),
    Case("log x", np.log, 0.0, 1.0, -1.0),
    Case("1/(1+x^2)", lambda x: 1.0 / (1.0 + x * x), 0.0, math.inf, 0.5 * math.pi),
    Case("e^-x", lambda x: np.exp(-x), 0.0, math.inf, 1.0),
    Case("(1+x)^-1.5 slow tail", lambda x: (1 + x) ** -1.5, 0.0, math.inf, 2.0, ((math.inf, -1.5),)),
    Case("x^-1/2 e^-x", lambda x: x ** -0.5 * np.exp(-x), 0.0, math.inf, math.sqrt(math.pi),
         ((0.0, -0.5),)),
    Case("|x-y|^-0.5 square", lambda x, y: np.abs(x - y) ** -0.5, 0.0, 1.0, 8.0 / 3.0,
         two_d=True, extra={"diagonal_exponent": -0.5}),
    Case("xy square", lambda x, y: x * y, 0.0, 1.0, 0.25, two_d=True),
]


def run_case(case: Case, spec: QuadratureSpec):
    from nonlocal_gelfand.quadrature import integrate_2d_adaptive, integrate_adaptive
    if case.two_d:
        diag = "diagonal_exponent" in case.extra
        return integrate_2d_adaptive(case.f, (case.lo, case.hi, case.lo, case.hi), spec,
                                     diagonal=diag, **case.extra)
    return integrate_adaptive(case.f, case.lo, case.hi, spec.replace(singularity_hints=case.hints),
                              case.points)
