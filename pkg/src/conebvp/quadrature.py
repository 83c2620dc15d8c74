"""Adaptive and fixed Simpson rules for integrands with known seam locations."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Final

import numpy as np
from numpy.typing import ArrayLike, NDArray

DEFAULT_ABS_TOL: Final[float] = 1e-10
DEFAULT_MAX_DEPTH: Final[int] = 40
DEFAULT_PANELS: Final[int] = 2


class DepthExceededError(ArithmeticError):
    """Adaptive bisection reached max_depth without meeting the tolerance."""

    def __init__(self, estimate: float, bound: float, max_depth: int) -> None:
        super().__init__(
            f"quadrature hit max_depth={max_depth} with estimate {estimate!r} "
            f"and error bound {bound!r}"
        )
        self.estimate: float = estimate
        self.bound: float = bound
        self.max_depth: int = max_depth


@dataclass(frozen=True)
class QuadratureSettings:
    abs_tol: float = DEFAULT_ABS_TOL
    max_depth: int = DEFAULT_MAX_DEPTH
    panels: int = DEFAULT_PANELS
    """Simpson panels per smooth piece for :func:`panel_rule`."""

    def __post_init__(self) -> None:
        if not self.abs_tol > 0.0:
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol!r}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be at least 1, got {self.max_depth!r}")
        if self.panels < 1:
            raise ValueError(f"panels must be at least 1, got {self.panels!r}")


def _simpson(fa: float, fm: float, fb: float, half_width: float) -> float:
    return half_width / 3.0 * (fa + 4.0 * fm + fb)


def integrate(
    h: Callable[[float], float],
    a: float,
    b: float,
    q: QuadratureSettings | None = None,
) -> float:
    """Adaptive Simpson with a Richardson correction on each accepted panel.

    Reversed limits integrate as the negated integral. Raises
    :class:`DepthExceededError` carrying the best estimate when some panel
    still misses its share of the tolerance at ``max_depth``.
    """

    settings = q or QuadratureSettings()
    if a == b:
        return 0.0
    if a > b:
        return -integrate(h, b, a, settings)

    exceeded = False

    def adaptive(
        lo: float,
        hi: float,
        f_lo: float,
        f_mid: float,
        f_hi: float,
        whole: float,
        depth: int,
        tol: float,
    ) -> tuple[float, float]:
        nonlocal exceeded
        mid = (lo + hi) / 2.0
        quarter = (hi - lo) / 4.0
        f_left = h(lo + quarter)
        f_right = h(hi - quarter)
        left = _simpson(f_lo, f_left, f_mid, quarter)
        right = _simpson(f_mid, f_right, f_hi, quarter)
        error = (left + right - whole) / 15.0
        if abs(error) <= tol:
            return left + right + error, abs(error)
        if depth >= settings.max_depth:
            exceeded = True
            return left + right + error, abs(error)
        left_value, left_error = adaptive(
            lo, mid, f_lo, f_left, f_mid, left, depth + 1, tol / 2.0
        )
        right_value, right_error = adaptive(
            mid, hi, f_mid, f_right, f_hi, right, depth + 1, tol / 2.0
        )
        return left_value + right_value, left_error + right_error

    f_a = h(a)
    f_b = h(b)
    f_m = h((a + b) / 2.0)
    whole = _simpson(f_a, f_m, f_b, (b - a) / 2.0)
    value, bound = adaptive(a, b, f_a, f_m, f_b, whole, 1, settings.abs_tol)
    if exceeded:
        raise DepthExceededError(value, bound, settings.max_depth)
    return value


def integrate_split(
    h: Callable[[float], float],
    a: float,
    b: float,
    seams: Sequence[float],
    q: QuadratureSettings | None = None,
) -> float:
    """Sum :func:`integrate` over the smooth pieces cut out by ``seams``."""

    if any(not a <= seam <= b for seam in seams):
        raise ValueError(f"seams must lie in [{a!r}, {b!r}], got {list(seams)!r}")
    if list(seams) != sorted(seams):
        raise ValueError(f"seams must be sorted, got {list(seams)!r}")
    edges = [a, *seams, b]
    return sum(
        (integrate(h, lo, hi, q) for lo, hi in zip(edges, edges[1:]) if hi > lo),
        start=0.0,
    )


def panel_rule(
    breakpoints: ArrayLike, panels: int = DEFAULT_PANELS
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Composite Simpson nodes and weights over the pieces between breakpoints.

    Each piece gets ``panels`` Simpson panels; nodes shared by neighbouring
    pieces are merged and their weights summed. All weights are positive.
    """

    edges = np.unique(np.asarray(breakpoints, dtype=np.float64))
    if edges.size < 2:
        raise ValueError("panel_rule needs at least two distinct breakpoints")
    pattern = np.ones(2 * panels + 1)
    pattern[1:-1:2] = 4.0
    pattern[2:-1:2] = 2.0
    piece_nodes = [np.linspace(lo, hi, 2 * panels + 1) for lo, hi in zip(edges[:-1], edges[1:])]
    piece_weights = [
        pattern * (hi - lo) / (6.0 * panels) for lo, hi in zip(edges[:-1], edges[1:])
    ]
    nodes, inverse = np.unique(np.concatenate(piece_nodes), return_inverse=True)
    weights = np.bincount(inverse, weights=np.concatenate(piece_weights))
    return nodes, weights


__all__ = [
    "DEFAULT_ABS_TOL",
    "DEFAULT_MAX_DEPTH",
    "DEFAULT_PANELS",
    "DepthExceededError",
    "QuadratureSettings",
    "integrate",
    "integrate_split",
    "panel_rule",
]
