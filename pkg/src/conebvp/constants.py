"""Weighted kernel constants and the eigenvalue interval they imply."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import StrEnum
from typing import Final, cast

import numpy as np
import structlog
from structlog.stdlib import BoundLogger

from .exprlang import Expression, evaluate, evaluate_array
from .kernel import BvpParams, gamma, one_minus_alpha_eta
from .quadrature import QuadratureSettings, integrate

logger: BoundLogger = cast(BoundLogger, structlog.get_logger(__name__))

SUPPORT_SAMPLES: Final[int] = 1000
SUPPORT_FLOOR: Final[float] = 1e-12
MIN_SEPARATION: Final[float] = 1e-15


class AsymptoticKind(StrEnum):
    ZERO = "zero"
    FINITE = "finite"
    INFINITE = "infinite"


@dataclass(frozen=True)
class AsymptoticValue:
    """Limit of f(u)/u: zero, a positive finite value, or infinite."""

    kind: AsymptoticKind
    value: float | None = None

    def __post_init__(self) -> None:
        if self.kind is AsymptoticKind.FINITE:
            if self.value is None or not (0.0 < self.value < math.inf):
                raise ValueError(
                    f"finite asymptotic value must be positive and finite, got {self.value!r}"
                )
        elif self.value is not None:
            raise ValueError(f"{self.kind.value} asymptotic value carries no number")

    @classmethod
    def zero(cls) -> AsymptoticValue:
        return cls(AsymptoticKind.ZERO)

    @classmethod
    def finite(cls, value: float) -> AsymptoticValue:
        return cls(AsymptoticKind.FINITE, float(value))

    @classmethod
    def infinite(cls) -> AsymptoticValue:
        return cls(AsymptoticKind.INFINITE)

    def describe(self) -> str:
        if self.kind is AsymptoticKind.FINITE:
            return repr(self.value)
        return self.kind.value


class IntervalSource(StrEnum):
    """Which cone argument produced the interval.

    ``expansion``: the f0 side is small and the f_inf side is large.
    ``compression``: the reverse.
    """

    EXPANSION = "expansion"
    COMPRESSION = "compression"


@dataclass(frozen=True)
class LambdaConstants:
    lambda1: float
    lambda2: float


@dataclass(frozen=True)
class LambdaInterval:
    """Open interval of lambda values with a guaranteed positive solution.

    ``hi is None`` on a conclusive interval means unbounded above. An
    inconclusive interval carries no endpoints and no source.
    """

    lo: float | None
    hi: float | None
    source: IntervalSource | None
    conclusive: bool

    @classmethod
    def inconclusive(cls) -> LambdaInterval:
        return cls(lo=None, hi=None, source=None, conclusive=False)

    @property
    def unbounded(self) -> bool:
        return self.conclusive and self.hi is None

    def contains(self, lam: float) -> bool:
        if not self.conclusive or self.lo is None:
            return False
        return self.lo < lam and (self.hi is None or lam < self.hi)


def compute_lambda1(
    p: BvpParams, a: Expression, q: QuadratureSettings | None = None
) -> float:
    """(1/(1 - alpha*eta)) * int_0^1 (1 - s) a(s) ds."""

    integral = integrate(lambda s: (1.0 - s) * evaluate(a, s), 0.0, 1.0, q)
    return integral / one_minus_alpha_eta(p)


def compute_lambda2(
    p: BvpParams, a: Expression, q: QuadratureSettings | None = None
) -> float:
    """(gamma/(2(1 - alpha*eta))) * int_0^eta (2(1 - eta) + alpha(eta^2 - s^2)) a(s) ds."""

    eta = p.eta
    integral = integrate(
        lambda s: (2.0 * (1.0 - eta) + p.alpha * (eta * eta - s * s)) * evaluate(a, s),
        0.0,
        eta,
        q,
    )
    return gamma(p) / (2.0 * one_minus_alpha_eta(p)) * integral


def compute_constants(
    p: BvpParams, a: Expression, q: QuadratureSettings | None = None
) -> LambdaConstants:
    constants = LambdaConstants(
        lambda1=compute_lambda1(p, a, q), lambda2=compute_lambda2(p, a, q)
    )
    if constants.lambda2 > constants.lambda1:
        logger.warning(
            "Lambda2 exceeds Lambda1; the weight is probably negative somewhere",
            lambda1=constants.lambda1,
            lambda2=constants.lambda2,
        )
    logger.debug(
        "Computed kernel constants",
        lambda1=constants.lambda1,
        lambda2=constants.lambda2,
    )
    return constants


def _scaled(weight: float, limit: AsymptoticValue) -> float | None:
    """weight * limit with 0 * inf undefined (None)."""

    match limit.kind:
        case AsymptoticKind.ZERO:
            return 0.0
        case AsymptoticKind.FINITE:
            assert limit.value is not None
            return weight * limit.value
        case AsymptoticKind.INFINITE:
            return math.inf if weight > 0.0 else None


def _reciprocal(product: float) -> float | None:
    if product == 0.0:
        return None
    if math.isinf(product):
        return 0.0
    return 1.0 / product


def _interval(
    lo_product: float, hi_product: float, source: IntervalSource
) -> LambdaInterval:
    lo = _reciprocal(lo_product)
    hi = _reciprocal(hi_product)
    if lo is None:
        return LambdaInterval.inconclusive()
    if hi is not None and hi - lo < MIN_SEPARATION:
        return LambdaInterval.inconclusive()
    return LambdaInterval(lo=lo, hi=hi, source=source, conclusive=True)


def eigenvalue_interval(
    c: LambdaConstants, f0: AsymptoticValue, finf: AsymptoticValue
) -> LambdaInterval:
    """Open lambda interval from the expansion or compression condition.

    Expansion: Lambda1*f0 < Lambda2*f_inf gives (1/(Lambda2*f_inf), 1/(Lambda1*f0)).
    Compression: Lambda1*f_inf < Lambda2*f0 gives (1/(Lambda2*f0), 1/(Lambda1*f_inf)).
    1/0 is unbounded and 1/inf is 0.
    """

    if c.lambda2 <= 0.0:
        return LambdaInterval.inconclusive()

    l1_f0 = _scaled(c.lambda1, f0)
    l1_finf = _scaled(c.lambda1, finf)
    l2_f0 = _scaled(c.lambda2, f0)
    l2_finf = _scaled(c.lambda2, finf)

    expansion = l1_f0 is not None and l2_finf is not None and l1_f0 < l2_finf
    compression = l1_finf is not None and l2_f0 is not None and l1_finf < l2_f0
    assert not (expansion and compression) or c.lambda2 > c.lambda1, (
        "expansion and compression conditions both hold"
    )

    if expansion:
        assert l1_f0 is not None and l2_finf is not None
        return _interval(l2_finf, l1_f0, IntervalSource.EXPANSION)
    if compression:
        assert l1_finf is not None and l2_f0 is not None
        return _interval(l2_f0, l1_finf, IntervalSource.COMPRESSION)
    return LambdaInterval.inconclusive()


def weight_support_warning(p: BvpParams, a: Expression) -> str | None:
    """Warn when a appears to vanish on [0, eta]."""

    samples = evaluate_array(a, np.linspace(0.0, p.eta, SUPPORT_SAMPLES))
    peak = float(np.max(samples))
    if peak < SUPPORT_FLOOR:
        return (
            f"a(t) is below {SUPPORT_FLOOR!r} on all {SUPPORT_SAMPLES} samples of "
            f"[0, eta]; the weight must be positive somewhere on [0, eta]"
        )
    return None


__all__ = [
    "AsymptoticKind",
    "AsymptoticValue",
    "IntervalSource",
    "LambdaConstants",
    "LambdaInterval",
    "compute_constants",
    "compute_lambda1",
    "compute_lambda2",
    "eigenvalue_interval",
    "weight_support_warning",
]
