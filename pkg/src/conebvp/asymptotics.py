"""Numerical estimates of f0 = lim_{u->0+} f(u)/u and f_inf = lim_{u->inf} f(u)/u."""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Final, cast

import structlog
from structlog.stdlib import BoundLogger

from .constants import AsymptoticValue
from .exprlang import EvalError, Expression, evaluate

logger: BoundLogger = cast(BoundLogger, structlog.get_logger(__name__))

F0_POINTS: Final[tuple[float, ...]] = tuple(10.0**-k for k in range(1, 9))
FINF_POINTS: Final[tuple[float, ...]] = tuple(10.0**k for k in range(1, 9))
SMALL_RATIO: Final[float] = 1e-6
LARGE_RATIO: Final[float] = 1e6
MIN_DECADE_RATE: Final[float] = 0.05
TAIL: Final[int] = 3


@dataclass(frozen=True)
class AsymptoticEstimate:
    value: AsymptoticValue
    samples: tuple[tuple[float, float], ...]
    """(u, f(u)/u) pairs in order of approach to the limit."""
    confident: bool
    discarded: tuple[float, ...] = ()
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class ResolvedAsymptotic:
    """An asymptotic value plus where it came from."""

    value: AsymptoticValue
    declared: bool
    confident: bool
    estimate: AsymptoticEstimate | None = None


def estimate_f0(f: Expression) -> AsymptoticEstimate:
    return _estimate(f, F0_POINTS)


def estimate_finf(f: Expression) -> AsymptoticEstimate:
    return _estimate(f, FINF_POINTS)


def _estimate(f: Expression, points: Sequence[float]) -> AsymptoticEstimate:
    samples: list[tuple[float, float]] = []
    discarded: list[float] = []
    notes: list[str] = []
    for u in points:
        try:
            ratio = evaluate(f, u) / u
        except EvalError as exc:
            if exc.kind != "indeterminate":
                raise
            discarded.append(u)
            notes.append(f"discarded u={u!r}: {exc}")
            continue
        if not math.isfinite(ratio):
            discarded.append(u)
            notes.append(f"discarded u={u!r}: f(u)/u is not finite")
            continue
        samples.append((u, ratio))

    if not samples:
        notes.append("every sample overflowed; treating the ratio as unbounded")
        return AsymptoticEstimate(
            value=AsymptoticValue.infinite(),
            samples=(),
            confident=False,
            discarded=tuple(discarded),
            notes=tuple(notes),
        )

    value, confident = classify(samples)
    if len(samples) < TAIL:
        notes.append(f"only {len(samples)} finite samples; using the last ratio")
    return AsymptoticEstimate(
        value=value,
        samples=tuple(samples),
        confident=confident,
        discarded=tuple(discarded),
        notes=tuple(notes),
    )


def _decade_rates(tail: Sequence[tuple[float, float]]) -> list[float] | None:
    """log10 change of the ratio per decade of u travelled toward the limit."""

    if any(ratio <= 0.0 for _, ratio in tail):
        return None
    rates: list[float] = []
    for (u_prev, r_prev), (u_next, r_next) in zip(tail, tail[1:]):
        decades = abs(math.log10(u_next) - math.log10(u_prev))
        rates.append(math.log10(r_next / r_prev) / decades)
    return rates


def aitken(x1: float, x2: float, x3: float) -> float | None:
    """Aitken delta-squared limit of three successive values, None if degenerate."""

    d1 = x2 - x1
    d2 = x3 - x2
    denominator = d2 - d1
    if denominator == 0.0:
        return None
    correction = d2 * d2 / denominator
    if not math.isfinite(correction) or abs(correction) > 10.0 * (abs(d1) + abs(d2)):
        return None
    return x3 - correction


def classify(samples: Sequence[tuple[float, float]]) -> tuple[AsymptoticValue, bool]:
    """Classify the ratio trend from samples ordered toward the limit."""

    last = samples[-1][1]
    if len(samples) < TAIL:
        return _finite_or_zero(last), False

    tail = samples[-TAIL:]
    r1, r2, r3 = (ratio for _, ratio in tail)
    decreasing = r1 > r2 > r3
    increasing = r1 < r2 < r3
    monotone = (r1 >= r2 >= r3) or (r1 <= r2 <= r3)
    rates = _decade_rates(tail)

    if decreasing and (
        r3 < SMALL_RATIO
        or (rates is not None and all(rate <= -MIN_DECADE_RATE for rate in rates))
    ):
        return AsymptoticValue.zero(), True
    if increasing and (
        r3 > LARGE_RATIO
        or (rates is not None and all(rate >= MIN_DECADE_RATE for rate in rates))
    ):
        return AsymptoticValue.infinite(), True

    extrapolated = aitken(r1, r2, r3)
    limit = last if extrapolated is None else extrapolated
    return _finite_or_zero(limit), monotone


def _finite_or_zero(limit: float) -> AsymptoticValue:
    if limit <= 0.0:
        return AsymptoticValue.zero()
    return AsymptoticValue.finite(limit)


def resolve_asymptotics(
    f: Expression,
    declared_f0: AsymptoticValue | None = None,
    declared_finf: AsymptoticValue | None = None,
) -> tuple[ResolvedAsymptotic, ResolvedAsymptotic]:
    """Use declared limits verbatim; estimate the rest."""

    return (
        _resolve("f0", f, declared_f0, estimate_f0),
        _resolve("finf", f, declared_finf, estimate_finf),
    )


def _resolve(
    name: str,
    f: Expression,
    declared: AsymptoticValue | None,
    estimator: Callable[[Expression], AsymptoticEstimate],
) -> ResolvedAsymptotic:
    if declared is not None:
        logger.debug("Using declared asymptotic value", limit=name, value=declared.describe())
        return ResolvedAsymptotic(value=declared, declared=True, confident=True)
    estimate = estimator(f)
    for note in estimate.notes:
        logger.debug("Asymptotic sampling note", limit=name, note=note)
    if not estimate.confident:
        logger.warning(
            "Low-confidence asymptotic estimate; consider declaring it in the config",
            limit=name,
            value=estimate.value.describe(),
        )
    return ResolvedAsymptotic(
        value=estimate.value,
        declared=False,
        confident=estimate.confident,
        estimate=estimate,
    )


__all__ = [
    "AsymptoticEstimate",
    "ResolvedAsymptotic",
    "aitken",
    "classify",
    "estimate_f0",
    "estimate_finf",
    "resolve_asymptotics",
]
