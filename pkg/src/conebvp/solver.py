"""Discretized fixed-point operator A_lambda on the cone and the solution search.

Grid functions live on t_i = i/n. The operator integrates G(t_i, s) a(s) f(u(s))
with composite Simpson over the pieces cut out by the grid nodes and eta, so
every piece is free of kernel seams and of interpolation kinks; the
resulting weights are positive and a rule depends only on (p, a, n, panels),
which makes it cacheable. Panels double until the image agrees with the next
doubling to the quadrature tolerance; the search re-checks that at every
converged candidate.

The search first runs damped Picard iteration from constant starts. When the
positive fixed point repels plain iteration (f small near zero and large
near infinity) a shell search follows: on each sphere ||w|| = rho of the cone
a normalized iteration finds the profile w_rho, and Brent's method locates
the radius where ||A w_rho|| = rho.
"""

from __future__ import annotations

import functools
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Final, Literal, cast

import numpy as np
import structlog
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq
from structlog.stdlib import BoundLogger

from .exprlang import EvalError, Expression, evaluate_array
from .kernel import BvpParams, green_matrix
from .quadrature import DepthExceededError, QuadratureSettings, panel_rule
from .verifier import VerificationReport, verify

logger: BoundLogger = cast(BoundLogger, structlog.get_logger(__name__))

DEFAULT_GRID_N: Final[int] = 200
MIN_GRID_N: Final[int] = 16
ETA_NODE_SLACK: Final[float] = 1e-12
FIXED_POINT_FACTOR: Final[float] = 10.0
MAX_RULE_NODES: Final[int] = 1 << 15
# Image agreement below this many ulps of its norm counts as converged.
ROUNDOFF_FACTOR: Final[float] = 1e3
EPSILON: Final[float] = float(np.finfo(np.float64).eps)

SolveMethod = Literal["picard", "shell"]


def _default_shell_radii() -> tuple[float, ...]:
    return tuple(float(r) for r in np.geomspace(1e-3, 1e3, 13))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values u(t_i) on the uniform grid t_i = i/n, i = 0..n."""

    n: int
    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        if self.n < MIN_GRID_N or self.n % 2:
            raise ValueError(f"grid n must be even and at least {MIN_GRID_N}, got {self.n}")
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (self.n + 1,):
            raise ValueError(
                f"expected {self.n + 1} grid values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @functools.cached_property
    def t(self) -> NDArray[np.float64]:
        return np.linspace(0.0, 1.0, self.n + 1)

    @property
    def norm(self) -> float:
        """Sup norm over the grid nodes."""

        return float(np.max(np.abs(self.values)))

    @classmethod
    def from_callable(
        cls, n: int, fn: Callable[[NDArray[np.float64]], ArrayLike]
    ) -> GridFunction:
        t = np.linspace(0.0, 1.0, n + 1)
        return cls(n, np.broadcast_to(np.asarray(fn(t), dtype=np.float64), t.shape))


def grid_function(n: int, values: ArrayLike) -> GridFunction:
    return GridFunction(n, np.asarray(values, dtype=np.float64))


class SolveStatus(StrEnum):
    SOLVED = "solved"
    TRIVIAL = "trivial"
    DIVERGED = "diverged"
    MAX_ITERS = "max_iters"
    UNVERIFIED = "unverified"
    """Converged to a nontrivial candidate that the verifier rejects."""


# Higher ranks win when no attempt solves.
STATUS_RANK: Final[dict[SolveStatus, int]] = {
    SolveStatus.SOLVED: 4,
    SolveStatus.UNVERIFIED: 3,
    SolveStatus.TRIVIAL: 2,
    SolveStatus.MAX_ITERS: 1,
    SolveStatus.DIVERGED: 0,
}


@dataclass(frozen=True)
class SolveSettings:
    damping: float = 0.5
    max_iters: int = 10000
    conv_tol: float = 1e-10
    trivial_threshold: float = 1e-6
    init_scales: tuple[float, ...] = (0.1, 1.0, 10.0)
    divergence_threshold: float = 1e12
    shell_search: bool = True
    shell_radii: tuple[float, ...] = field(default_factory=_default_shell_radii)

    def __post_init__(self) -> None:
        if not 0.0 < self.damping <= 1.0:
            raise ValueError(f"damping must lie in (0, 1], got {self.damping!r}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be positive, got {self.max_iters!r}")
        if not 0.0 < self.conv_tol < 1.0:
            raise ValueError(f"conv_tol must lie in (0, 1), got {self.conv_tol!r}")
        if not self.trivial_threshold > 0.0:
            raise ValueError(
                f"trivial_threshold must be positive, got {self.trivial_threshold!r}"
            )
        if not self.init_scales or any(not scale > 0.0 for scale in self.init_scales):
            raise ValueError(f"init_scales must be positive, got {self.init_scales!r}")
        if not self.divergence_threshold > 0.0:
            raise ValueError(
                f"divergence_threshold must be positive, got {self.divergence_threshold!r}"
            )
        radii = self.shell_radii
        if len(radii) < 2 or any(not r > 0.0 for r in radii) or list(radii) != sorted(radii):
            raise ValueError(
                f"shell_radii must be at least two increasing positive radii, got {radii!r}"
            )


@dataclass(frozen=True)
class SolveOutcome:
    status: SolveStatus
    solution: GridFunction | None
    iterations: int
    history: tuple[float, ...]
    method: SolveMethod = "picard"
    clamped: int = 0
    scale: float | None = None
    verification: VerificationReport | None = None

    def __post_init__(self) -> None:
        if (self.solution is not None) != (self.status is SolveStatus.SOLVED):
            raise ValueError("solution must be present exactly when status is solved")


@dataclass(frozen=True)
class OperatorRule:
    """Quadrature nodes s_k and the matrix M[i, k] = G(t_i, s_k) w_k a(s_k)."""

    t: NDArray[np.float64]
    nodes: NDArray[np.float64]
    matrix: NDArray[np.float64]
    panels: int


@functools.cache
def _panel_operator_rule(p: BvpParams, a: Expression, n: int, panels: int) -> OperatorRule:
    t = np.linspace(0.0, 1.0, n + 1)
    nodes, weights = panel_rule(np.append(t, p.eta), panels)
    weighted = weights * evaluate_array(a, nodes)
    matrix = green_matrix(p, t, nodes) * weighted[None, :]
    for array in (t, nodes, matrix):
        array.setflags(write=False)
    logger.debug("Built operator rule", n=n, panels=panels, nodes=int(nodes.size))
    return OperatorRule(t=t, nodes=nodes, matrix=matrix, panels=panels)


def operator_rule(
    p: BvpParams, a: Expression, n: int, q: QuadratureSettings
) -> OperatorRule:
    """The cached rule with ``q.panels`` Simpson panels per piece."""

    return _panel_operator_rule(p, a, n, q.panels)


def _refine(
    p: BvpParams,
    a: Expression,
    f: Expression,
    lam: float,
    values: NDArray[np.float64],
    panels: int,
    abs_tol: float,
) -> tuple[OperatorRule, NDArray[np.float64]]:
    """Coarsest rule from ``panels`` up whose image at ``values`` is within
    ``abs_tol`` of the image with twice the panels.

    The configured rule is always compared once. After that,
    :class:`DepthExceededError` is raised once the next doubling would pass
    MAX_RULE_NODES nodes.
    """

    n = values.size - 1
    rule = _panel_operator_rule(p, a, n, panels)
    image = _image(rule, f, lam, values)
    doublings = 0
    while True:
        norm = float(np.max(np.abs(image)))
        if doublings and 4 * rule.panels * (n + 1) > MAX_RULE_NODES:
            raise DepthExceededError(norm, math.inf, doublings)
        finer = _panel_operator_rule(p, a, n, 2 * rule.panels)
        finer_image = _image(finer, f, lam, values)
        gap = float(np.max(np.abs(finer_image - image)))
        if gap <= max(abs_tol, ROUNDOFF_FACTOR * EPSILON * norm):
            return rule, image
        rule, image = finer, finer_image
        doublings += 1


def _image(
    rule: OperatorRule, f: Expression, lam: float, values: NDArray[np.float64]
) -> NDArray[np.float64]:
    interpolated = np.interp(rule.nodes, rule.t, values)
    with np.errstate(over="ignore", invalid="ignore"):
        image = lam * (rule.matrix @ evaluate_array(f, interpolated))
    if not np.all(np.isfinite(image)):
        bad = int(np.flatnonzero(~np.isfinite(image))[0])
        raise EvalError(
            "operator image is not finite",
            node=f.ast,
            value=float(values[bad]),
            kind="indeterminate",
        )
    return image


def apply_operator(
    p: BvpParams,
    a: Expression,
    f: Expression,
    lam: float,
    u: GridFunction,
    q: QuadratureSettings | None = None,
) -> GridFunction:
    """v(t_i) = lam * int_0^1 G(t_i, s) a(s) f(u~(s)) ds, u~ piecewise linear.

    Panels per piece start at ``q.panels`` and double until the image stops
    moving by more than ``q.abs_tol``.
    """

    settings = q or QuadratureSettings()
    _, image = _refine(p, a, f, lam, np.asarray(u.values), settings.panels, settings.abs_tol)
    return GridFunction(u.n, image)


def cone_membership(
    u: GridFunction, gamma: float, eta: float | None = None
) -> tuple[bool, float]:
    """Membership in {u >= 0, min_[0,eta] u >= gamma ||u||} and its margin.

    ``eta`` defaults to ``1 - gamma``. The margin is nonnegative iff u is a member.
    """

    cutoff = (1.0 - gamma if eta is None else eta) + ETA_NODE_SLACK
    values = np.asarray(u.values)
    head = values[u.t <= cutoff]
    margin = min(float(np.min(head)) - gamma * u.norm, float(np.min(values)))
    return margin >= 0.0, margin


@dataclass
class _Attempt:
    status: SolveStatus
    values: NDArray[np.float64] | None
    iterations: int
    history: list[float]
    clamped: int


def _picard_attempt(
    rule: OperatorRule,
    f: Expression,
    lam: float,
    start: NDArray[np.float64],
    s: SolveSettings,
) -> _Attempt:
    u = np.array(start, dtype=np.float64)
    history = [float(np.max(np.abs(u)))]
    clamped = 0
    for iteration in range(1, s.max_iters + 1):
        try:
            image = _image(rule, f, lam, u)
        except EvalError as exc:
            if exc.kind != "indeterminate":
                raise
            return _Attempt(SolveStatus.DIVERGED, None, iteration, history, clamped)
        if not np.any(image):
            history.append(0.0)
            return _Attempt(
                SolveStatus.TRIVIAL, np.zeros_like(u), iteration, history, clamped
            )
        step = (1.0 - s.damping) * u + s.damping * image
        negative = step < 0.0
        clamped += int(np.count_nonzero(negative))
        step[negative] = 0.0
        change = float(np.max(np.abs(step - u)))
        norm = float(np.max(np.abs(step)))
        history.append(norm)
        u = step
        if norm > s.divergence_threshold:
            return _Attempt(SolveStatus.DIVERGED, None, iteration, history, clamped)
        if change <= s.conv_tol * max(norm, s.trivial_threshold):
            if norm <= s.trivial_threshold:
                return _Attempt(SolveStatus.TRIVIAL, u, iteration, history, clamped)
            return _Attempt(SolveStatus.SOLVED, u, iteration, history, clamped)
    return _Attempt(SolveStatus.MAX_ITERS, None, s.max_iters, history, clamped)


def _refined_attempt(
    p: BvpParams,
    a: Expression,
    f: Expression,
    lam: float,
    scale: float,
    s: SolveSettings,
    q: QuadratureSettings,
    n: int,
) -> tuple[_Attempt, OperatorRule]:
    """Picard from a constant start, resumed on a finer rule while the
    converged iterate's image still moves under panel doubling."""

    rule = operator_rule(p, a, n, q)
    attempt = _picard_attempt(rule, f, lam, np.full(n + 1, scale), s)
    while attempt.status is SolveStatus.SOLVED and attempt.values is not None:
        refined, _ = _refine(p, a, f, lam, attempt.values, rule.panels, q.abs_tol)
        if refined.panels == rule.panels:
            break
        logger.debug("Refined operator rule", panels=refined.panels)
        rule = refined
        resumed = _picard_attempt(rule, f, lam, attempt.values, s)
        attempt = _Attempt(
            resumed.status,
            resumed.values,
            attempt.iterations + resumed.iterations,
            attempt.history + resumed.history[1:],
            attempt.clamped + resumed.clamped,
        )
    return attempt, rule


def _is_fixed_point(
    rule: OperatorRule,
    f: Expression,
    lam: float,
    values: NDArray[np.float64],
    s: SolveSettings,
) -> bool:
    try:
        image = _image(rule, f, lam, values)
    except EvalError as exc:
        if exc.kind != "indeterminate":
            raise
        return False
    residual = float(np.max(np.abs(image - values)))
    return residual <= FIXED_POINT_FACTOR * s.conv_tol * float(np.max(np.abs(values)))


def _finish(
    p: BvpParams,
    a: Expression,
    f: Expression,
    lam: float,
    rule: OperatorRule,
    s: SolveSettings,
    n: int,
    values: NDArray[np.float64],
) -> tuple[SolveStatus, GridFunction, VerificationReport]:
    candidate = GridFunction(n, values)
    report = verify(p, a, f, lam, candidate)
    logger.debug(
        "Verified candidate",
        passed=report.passed,
        ode_residual=report.ode_residual_sup,
        cone_margin=report.cone_margin,
    )
    if report.passed and _is_fixed_point(rule, f, lam, values, s):
        return SolveStatus.SOLVED, candidate, report
    return SolveStatus.UNVERIFIED, candidate, report


def _shell_profile(
    rule: OperatorRule,
    f: Expression,
    lam: float,
    radius: float,
    start: NDArray[np.float64],
    s: SolveSettings,
) -> tuple[NDArray[np.float64], float, int] | None:
    """Profile on ||w|| = radius fixed by the normalized iteration.

    Returns (profile, ||A profile||, iterations), or None on overflow, a zero
    image or no convergence.
    """

    shape = start / np.max(np.abs(start))
    tolerance = 0.1 * s.conv_tol
    for iteration in range(1, s.max_iters + 1):
        try:
            image = _image(rule, f, lam, radius * shape)
        except EvalError as exc:
            if exc.kind != "indeterminate":
                raise
            return None
        image_norm = float(np.max(np.abs(image)))
        if image_norm == 0.0:
            return None
        mixed = np.maximum((1.0 - s.damping) * shape + s.damping * image / image_norm, 0.0)
        mixed /= np.max(mixed)
        change = float(np.max(np.abs(mixed - shape)))
        shape = mixed
        if change <= tolerance:
            profile = radius * shape
            return profile, float(np.max(np.abs(_image(rule, f, lam, profile)))), iteration
    return None


def _shell_root(
    rule: OperatorRule,
    f: Expression,
    lam: float,
    s: SolveSettings,
    history: list[float],
) -> tuple[float, NDArray[np.float64], int] | None:
    """Radius where ||A w_rho|| = rho, its profile and the iterations spent.

    Appends ||A w_rho|| for every radius tried to ``history``.
    """

    start = np.ones_like(rule.t)
    iterations = 0

    def gap(radius: float) -> float | None:
        nonlocal start, iterations
        result = _shell_profile(rule, f, lam, radius, start, s)
        if result is None:
            return None
        profile, image_norm, used = result
        start = profile
        iterations += used
        history.append(image_norm)
        return image_norm - radius

    bracket: tuple[float, float] | None = None
    previous: tuple[float, float] | None = None
    for radius in s.shell_radii:
        value = gap(radius)
        if value is None:
            break
        if value == 0.0:
            bracket = (radius, radius)
            break
        if previous is not None and (previous[1] < 0.0) != (value < 0.0):
            bracket = (previous[0], radius)
            break
        previous = (radius, value)

    if bracket is None:
        logger.debug("Shell search found no sign change", radii=len(history))
        return None

    lo, hi = bracket
    logger.debug("Shell search bracketed a fixed point", lo=lo, hi=hi)
    if lo == hi:
        root = lo
    else:

        def objective(radius: float) -> float:
            value = gap(radius)
            if value is None:
                raise ArithmeticError(f"shell profile failed at radius {radius!r}")
            return value

        try:
            root = float(brentq(objective, lo, hi, xtol=1e-14, rtol=1e-13, maxiter=200))
        except (ArithmeticError, RuntimeError) as exc:
            logger.debug("Shell root finding failed", error=str(exc))
            return None

    result = _shell_profile(rule, f, lam, root, start, s)
    if result is None:
        return None
    profile, _, used = result
    return root, profile, iterations + used


def _shell_search(
    p: BvpParams,
    a: Expression,
    f: Expression,
    lam: float,
    s: SolveSettings,
    q: QuadratureSettings,
    n: int,
) -> SolveOutcome | None:
    rule = operator_rule(p, a, n, q)
    iterations = 0
    history: list[float] = []
    while True:
        found = _shell_root(rule, f, lam, s, history)
        if found is None:
            return None
        root, profile, used = found
        iterations += used
        refined, _ = _refine(p, a, f, lam, profile, rule.panels, q.abs_tol)
        if refined.panels == rule.panels:
            break
        logger.debug("Refined operator rule", panels=refined.panels)
        rule = refined

    status, candidate, report = _finish(p, a, f, lam, rule, s, n, profile)
    logger.info(
        "Shell search finished",
        status=status.value,
        radius=root,
        iterations=iterations,
    )
    return SolveOutcome(
        status=status,
        solution=candidate if status is SolveStatus.SOLVED else None,
        iterations=iterations,
        history=tuple(history),
        method="shell",
        scale=root,
        verification=report,
    )


def picard_solve(
    p: BvpParams,
    a: Expression,
    f: Expression,
    lam: float,
    s: SolveSettings | None = None,
    q: QuadratureSettings | None = None,
    n: int = DEFAULT_GRID_N,
) -> SolveOutcome:
    """Search for a positive fixed point of A_lambda.

    Every initial scale runs damped, clamped Picard iteration; the first
    verified nontrivial candidate is returned. Failing that, the shell search
    runs when enabled. Otherwise the best failed attempt is returned.

    ``history`` holds the sup norm of every Picard iterate, or for the shell
    search the norm ||A w_rho|| at every radius tried.
    """

    if not lam > 0.0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    if n < MIN_GRID_N or n % 2:
        raise ValueError(f"grid n must be even and at least {MIN_GRID_N}, got {n}")
    settings = s or SolveSettings()
    quadrature = q or QuadratureSettings()

    best: SolveOutcome | None = None
    for scale in settings.init_scales:
        attempt, rule = _refined_attempt(p, a, f, lam, scale, settings, quadrature, n)
        status = attempt.status
        solution: GridFunction | None = None
        report: VerificationReport | None = None
        if status is SolveStatus.SOLVED and attempt.values is not None:
            status, candidate, report = _finish(
                p, a, f, lam, rule, settings, n, attempt.values
            )
            solution = candidate if status is SolveStatus.SOLVED else None
        logger.info(
            "Picard attempt finished",
            scale=scale,
            status=status.value,
            iterations=attempt.iterations,
            clamped=attempt.clamped,
            panels=rule.panels,
        )
        outcome = SolveOutcome(
            status=status,
            solution=solution,
            iterations=attempt.iterations,
            history=tuple(attempt.history),
            method="picard",
            clamped=attempt.clamped,
            scale=scale,
            verification=report,
        )
        if status is SolveStatus.SOLVED:
            return outcome
        if best is None or STATUS_RANK[status] > STATUS_RANK[best.status]:
            best = outcome

    if settings.shell_search:
        shell = _shell_search(p, a, f, lam, settings, quadrature, n)
        if shell is not None and (
            shell.status is SolveStatus.SOLVED
            or best is None
            or STATUS_RANK[shell.status] > STATUS_RANK[best.status]
        ):
            return shell

    assert best is not None
    return best


__all__ = [
    "DEFAULT_GRID_N",
    "GridFunction",
    "OperatorRule",
    "SolveOutcome",
    "SolveSettings",
    "SolveStatus",
    "apply_operator",
    "cone_membership",
    "grid_function",
    "operator_rule",
    "picard_solve",
]
