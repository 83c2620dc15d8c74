"""Problem config loading: one JSON document per boundary value problem.

The document names alpha, eta, the weight ``a`` (in t) and the nonlinearity
``f`` (in u), optionally declares f0/f_inf, and may override the lambda,
grid and numeric settings. Unknown keys are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Annotated, Final, Literal, cast

import numpy as np
import structlog
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from structlog.stdlib import BoundLogger

from .constants import AsymptoticValue
from .exprlang import EvalError, Expression, evaluate, parse
from .kernel import BvpParams, validate_params
from .quadrature import QuadratureSettings
from .solver import DEFAULT_GRID_N, MIN_GRID_N, SolveSettings

logger: BoundLogger = cast(BoundLogger, structlog.get_logger(__name__))

SAMPLE_COUNT: Final[int] = 1000
F_SAMPLE_SPAN: Final[tuple[float, float]] = (1e-8, 1e8)

DeclaredLimit = Annotated[float, Field(ge=0.0)] | Literal["zero", "infinite"]


class ConfigError(RuntimeError):
    """Raised when a problem config is missing, malformed or inconsistent."""


class QuadratureConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    abs_tol: float | None = None
    max_depth: int | None = None
    panels: int | None = None


class SolveConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    damping: float | None = None
    max_iters: int | None = None
    conv_tol: float | None = None
    trivial_threshold: float | None = None
    init_scales: tuple[float, ...] | None = None
    divergence_threshold: float | None = None
    shell_search: bool | None = None
    shell_radii: tuple[float, ...] | None = None


class ProblemConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    alpha: float
    eta: float
    a: str
    f: str
    f0: DeclaredLimit | None = None
    finf: DeclaredLimit | None = None
    lam: float | None = Field(default=None, alias="lambda", gt=0.0)
    grid_n: int = DEFAULT_GRID_N
    quad_abs_tol: float | None = None
    quadrature: QuadratureConfig = Field(default_factory=QuadratureConfig)
    solve: SolveConfig = Field(default_factory=SolveConfig)

    @field_validator("grid_n")
    @classmethod
    def _even_grid(cls, value: int) -> int:
        if value < MIN_GRID_N or value % 2:
            raise ValueError(f"grid_n must be even and at least {MIN_GRID_N}")
        return value


@dataclass(frozen=True)
class Problem:
    """A loaded, validated problem ready for the numeric modules."""

    name: str
    params: BvpParams
    a: Expression
    f: Expression
    declared_f0: AsymptoticValue | None = None
    declared_finf: AsymptoticValue | None = None
    lam: float | None = None
    grid_n: int = DEFAULT_GRID_N
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)
    solve: SolveSettings = field(default_factory=SolveSettings)
    warnings: tuple[str, ...] = ()


def declared_limit(raw: float | str | None) -> AsymptoticValue | None:
    """Map a config limit to a value; a numeric 0 means zero."""

    match raw:
        case None:
            return None
        case "zero":
            return AsymptoticValue.zero()
        case "infinite":
            return AsymptoticValue.infinite()
        case float() | int():
            value = float(raw)
            if value == 0.0:
                return AsymptoticValue.zero()
            if math.isinf(value):
                return AsymptoticValue.infinite()
            return AsymptoticValue.finite(value)
        case _:
            raise ConfigError(f"unsupported asymptotic declaration {raw!r}")


def load_problem(path: Path) -> Problem:
    """Read, validate and build the problem stored at ``path``."""

    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"Unable to read problem config {path}: {exc}") from exc
    try:
        config = ProblemConfig.model_validate_json(text)
    except ValidationError as exc:
        raise ConfigError(f"Invalid problem config {path}:\n{exc}") from exc
    return build_problem(config, name=path.stem)


def build_problem(config: ProblemConfig, name: str = "problem") -> Problem:
    """Validate parameters, parse expressions and sample for sign warnings.

    Raises ParameterRangeError and ExpressionError subclasses unchanged so the
    caller can report them precisely.
    """

    params = validate_params(config.alpha, config.eta)
    a = parse(config.a, "t")
    f = parse(config.f, "u")
    try:
        quadrature = _quadrature_settings(config)
        solve = _solve_settings(config.solve)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    warnings = sample_warnings(a, f)
    for warning in warnings:
        logger.warning(warning)
    logger.info(
        "Loaded problem",
        alpha=params.alpha,
        eta=params.eta,
        a=config.a,
        f=config.f,
        grid_n=config.grid_n,
    )
    return Problem(
        name=name,
        params=params,
        a=a,
        f=f,
        declared_f0=declared_limit(config.f0),
        declared_finf=declared_limit(config.finf),
        lam=config.lam,
        grid_n=config.grid_n,
        quadrature=quadrature,
        solve=solve,
        warnings=tuple(warnings),
    )


def _quadrature_settings(config: ProblemConfig) -> QuadratureSettings:
    defaults = QuadratureSettings()
    section = config.quadrature
    abs_tol = section.abs_tol if section.abs_tol is not None else config.quad_abs_tol
    return QuadratureSettings(
        abs_tol=defaults.abs_tol if abs_tol is None else abs_tol,
        max_depth=defaults.max_depth if section.max_depth is None else section.max_depth,
        panels=defaults.panels if section.panels is None else section.panels,
    )


def _solve_settings(section: SolveConfig) -> SolveSettings:
    overrides = section.model_dump(exclude_none=True)
    return SolveSettings(**overrides)


def _sign_faults(e: Expression, points: NDArray[np.float64], label: str) -> list[str]:
    messages: list[str] = []
    for x in points:
        try:
            value = evaluate(e, float(x))
        except EvalError as exc:
            if exc.kind == "indeterminate":
                continue
            messages.append(f"{label} could not be evaluated at {e.varname}={float(x)!r}: {exc}")
            break
        if value < 0.0:
            messages.append(f"{label} is negative at {e.varname}={float(x)!r} ({value!r})")
            break
    return messages


def sample_warnings(a: Expression, f: Expression) -> list[str]:
    """Sign checks on 1000 samples each: a on [0, 1], f on {0} and a log span."""

    a_points = np.linspace(0.0, 1.0, SAMPLE_COUNT)
    f_points = np.concatenate(([0.0], np.geomspace(*F_SAMPLE_SPAN, SAMPLE_COUNT - 1)))
    warnings = [
        f"{message}; the weight must map [0, 1] into [0, inf)"
        for message in _sign_faults(a, a_points, "a(t)")
    ]
    warnings.extend(
        f"{message}; the nonlinearity must map [0, inf) into [0, inf)"
        for message in _sign_faults(f, f_points, "f(u)")
    )
    return warnings


__all__ = [
    "ConfigError",
    "Problem",
    "ProblemConfig",
    "QuadratureConfig",
    "SolveConfig",
    "build_problem",
    "declared_limit",
    "load_problem",
    "sample_warnings",
]
