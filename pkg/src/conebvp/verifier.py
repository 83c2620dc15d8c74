"""Independent residual checks for a candidate solution on a grid.

Only (p, a, f, lambda, u) are consulted: the ODE residual by central second
differences on interior nodes, u'(0) by the one-sided three-point formula,
and the integral condition by grid Simpson plus an exact quadratic over the
partial cell that ends at eta.

The three-point formula is off by (h^2/3) u'''(0). Along a solution
u''' = -lambda (a f(u))', so that term is removed with the same one-sided
difference of the forcing, leaving an O(h^3) estimate of u'(0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Final

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import simpson
from scipy.interpolate import lagrange

from .exprlang import EvalError, Expression, evaluate_array
from .kernel import BvpParams, gamma

if TYPE_CHECKING:
    from .solver import GridFunction

ODE_BASE_TOL: Final[float] = 1e-4
BC_NEUMANN_TOL: Final[float] = 1e-6
BC_INTEGRAL_TOL: Final[float] = 1e-8
CONE_TOL: Final[float] = 1e-9
REFERENCE_STEP: Final[float] = 1.0 / 200.0
NODE_SLACK: Final[float] = 1e-12


@dataclass(frozen=True)
class VerificationTolerances:
    ode: float
    bc_neumann: float = BC_NEUMANN_TOL
    bc_integral: float = BC_INTEGRAL_TOL
    cone: float = CONE_TOL


@dataclass(frozen=True)
class VerificationReport:
    ode_residual_sup: float
    bc_neumann: float
    bc_integral: float
    cone_margin: float
    passed: bool
    tolerances: VerificationTolerances


def _forcing(
    a: Expression, f: Expression, t: NDArray[np.float64], values: NDArray[np.float64]
) -> NDArray[np.float64]:
    return evaluate_array(a, t) * evaluate_array(f, values)


def default_tolerances(
    lam: float, a: Expression, f: Expression, u: GridFunction
) -> VerificationTolerances:
    """ODE tolerance 1e-4 (1 + lam ||a f(u)||), widened as h^2 past n = 200."""

    h = 1.0 / u.n
    try:
        forcing = float(np.max(np.abs(_forcing(a, f, u.t, np.asarray(u.values)))))
    except EvalError:
        forcing = math.inf
    if not math.isfinite(forcing):
        forcing = 0.0
    scale = max(1.0, (h / REFERENCE_STEP) ** 2)
    return VerificationTolerances(ode=ODE_BASE_TOL * (1.0 + lam * forcing) * scale)


def integral_to_eta(u: GridFunction, eta: float) -> float:
    """int_0^eta u by Simpson on whole cells and a local quadratic on the rest."""

    t = u.t
    values = np.asarray(u.values)
    last = int(np.searchsorted(t, eta + NODE_SLACK, side="right")) - 1
    whole = float(simpson(values[: last + 1], x=t[: last + 1])) if last >= 1 else 0.0
    remainder = eta - t[last]
    if remainder <= NODE_SLACK:
        return whole
    centre = min(max(last, 1), u.n - 1)
    window = slice(centre - 1, centre + 2)
    quadratic = lagrange(t[window] - t[last], values[window])
    antiderivative = quadratic.integ()
    return whole + float(antiderivative(remainder) - antiderivative(0.0))


def _one_sided(values: NDArray[np.float64], h: float) -> float:
    return float((-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h))


def _neumann_residual(
    a: Expression,
    f: Expression,
    lam: float,
    t: NDArray[np.float64],
    values: NDArray[np.float64],
    h: float,
) -> float:
    slope = _one_sided(values, h)
    try:
        forcing = _forcing(a, f, t[:3], values[:3])
    except EvalError:
        return abs(slope)
    correction = h * h / 3.0 * lam * _one_sided(forcing, h)
    if not math.isfinite(correction):
        return abs(slope)
    return abs(slope - correction)


def _cone_margin(values: NDArray[np.float64], t: NDArray[np.float64], p: BvpParams) -> float:
    norm = float(np.max(np.abs(values)))
    head = values[t <= p.eta + NODE_SLACK]
    return min(float(np.min(head)) - gamma(p) * norm, float(np.min(values)))


def verify(
    p: BvpParams,
    a: Expression,
    f: Expression,
    lam: float,
    u: GridFunction,
    tols: VerificationTolerances | None = None,
) -> VerificationReport:
    tolerances = tols or default_tolerances(lam, a, f, u)
    t = u.t
    values = np.asarray(u.values)
    h = 1.0 / u.n

    second = (values[:-2] - 2.0 * values[1:-1] + values[2:]) / (h * h)
    try:
        forcing = _forcing(a, f, t[1:-1], values[1:-1])
        ode = float(np.max(np.abs(second + lam * forcing)))
    except EvalError:
        ode = math.inf
    if math.isnan(ode):
        ode = math.inf

    neumann = _neumann_residual(a, f, lam, t, values, h)
    integral = abs(values[-1] - p.alpha * integral_to_eta(u, p.eta))
    margin = _cone_margin(values, t, p)

    passed = (
        ode <= tolerances.ode
        and neumann <= tolerances.bc_neumann
        and integral <= tolerances.bc_integral
        and margin >= -tolerances.cone
    )
    return VerificationReport(
        ode_residual_sup=ode,
        bc_neumann=float(neumann),
        bc_integral=float(integral),
        cone_margin=margin,
        passed=passed,
        tolerances=tolerances,
    )


__all__ = [
    "VerificationReport",
    "VerificationTolerances",
    "default_tolerances",
    "integral_to_eta",
    "verify",
]
