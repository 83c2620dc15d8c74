"""Green's function of u'' + y = 0 with u'(0) = 0 and u(1) = alpha * int_0^eta u.

The kernel is piecewise in (t, s) with seams on the lines s = t and s = eta. Every
branch is evaluated with closed conditions in a fixed order and the first match
wins; adjacent branches agree on their shared seam, so the choice made on a seam
never changes the value.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from numpy.typing import ArrayLike, NDArray


class ParameterRangeError(ValueError):
    """Raised when alpha or eta fall outside 0 < eta < 1, 0 < alpha < 1/eta."""


class Branch(IntEnum):
    """The four pieces of the kernel, in selection order."""

    BELOW_BOTH = 0
    """s <= min(eta, t)"""
    BETWEEN_T_AND_ETA = 1
    """t <= s <= eta"""
    BETWEEN_ETA_AND_T = 2
    """eta <= s <= t"""
    ABOVE_BOTH = 3
    """max(eta, t) <= s"""


@dataclass(frozen=True)
class BvpParams:
    """Validated boundary-condition parameters."""

    alpha: float
    eta: float


def validate_params(alpha: float, eta: float) -> BvpParams:
    """Return validated parameters or raise with the violated bound named."""

    alpha = float(alpha)
    eta = float(eta)
    if not 0.0 < eta < 1.0:
        raise ParameterRangeError(f"eta must satisfy 0 < eta < 1, got eta={eta!r}")
    upper = 1.0 / eta
    if not 0.0 < alpha < upper:
        raise ParameterRangeError(
            f"alpha must satisfy 0 < alpha < 1/eta = {upper!r}, got alpha={alpha!r}"
        )
    # 1/eta rounds; the quantity that actually divides must stay positive.
    if 1.0 - alpha * eta <= 0.0:
        raise ParameterRangeError(
            f"1 - alpha*eta must be positive, got alpha={alpha!r} eta={eta!r}"
        )
    return BvpParams(alpha=alpha, eta=eta)


def one_minus_alpha_eta(p: BvpParams) -> float:
    return 1.0 - p.alpha * p.eta


def gamma(p: BvpParams) -> float:
    """Cone constant 1 - eta; independent of alpha."""

    return 1.0 - p.eta


def g_envelope(p: BvpParams, s: float) -> float:
    """Upper envelope g(s) = (1 - s) / (1 - alpha*eta)."""

    return (1.0 - s) / one_minus_alpha_eta(p)


def select_branch(p: BvpParams, t: float, s: float) -> Branch:
    if s <= min(p.eta, t):
        return Branch.BELOW_BOTH
    if t <= s <= p.eta:
        return Branch.BETWEEN_T_AND_ETA
    if p.eta <= s <= t:
        return Branch.BETWEEN_ETA_AND_T
    return Branch.ABOVE_BOTH


def green_branch(p: BvpParams, branch: Branch, t: float, s: float) -> float:
    """Evaluate one branch formula regardless of whether (t, s) lies in it."""

    k = one_minus_alpha_eta(p)
    match branch:
        case Branch.BELOW_BOTH:
            numerator = (
                2.0 * (1.0 - s) - p.alpha * (p.eta - s) ** 2 - 2.0 * k * (t - s)
            )
        case Branch.BETWEEN_T_AND_ETA:
            numerator = 2.0 * (1.0 - s) - p.alpha * (p.eta - s) ** 2
        case Branch.BETWEEN_ETA_AND_T:
            numerator = 2.0 * (1.0 - s) - 2.0 * k * (t - s)
        case Branch.ABOVE_BOTH:
            numerator = 2.0 * (1.0 - s)
    return numerator / (2.0 * k)


def green(p: BvpParams, t: float, s: float) -> float:
    """Evaluate G(t, s) for t, s in [0, 1]."""

    return green_branch(p, select_branch(p, t, s), t, s)


def green_matrix(p: BvpParams, t: ArrayLike, s: ArrayLike) -> NDArray[np.float64]:
    """Evaluate G on the outer grid t x s, shape (len(t), len(s))."""

    tt = np.asarray(t, dtype=np.float64)[:, None]
    ss = np.asarray(s, dtype=np.float64)[None, :]
    k = one_minus_alpha_eta(p)
    base = 2.0 * (1.0 - ss)
    eta_term = p.alpha * (p.eta - ss) ** 2
    t_term = 2.0 * k * (tt - ss)
    conditions = [
        ss <= np.minimum(p.eta, tt),
        (tt <= ss) & (ss <= p.eta),
        (p.eta <= ss) & (ss <= tt),
    ]
    choices = [
        base - eta_term - t_term,
        np.broadcast_to(base - eta_term, t_term.shape),
        base - t_term,
    ]
    numerator = np.select(conditions, choices, default=np.broadcast_to(base, t_term.shape))
    return numerator / (2.0 * k)


def kernel_seams(p: BvpParams, t: float) -> list[float]:
    """Sorted, de-duplicated seam locations of s -> G(t, s) strictly inside (0, 1)."""

    return sorted({x for x in (t, p.eta) if 0.0 < x < 1.0})


__all__ = [
    "Branch",
    "BvpParams",
    "ParameterRangeError",
    "g_envelope",
    "gamma",
    "green",
    "green_branch",
    "green_matrix",
    "kernel_seams",
    "one_minus_alpha_eta",
    "select_branch",
    "validate_params",
]
