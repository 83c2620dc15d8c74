from __future__ import annotations

from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Final, NoReturn, cast

import numpy as np
import structlog
from numpy.typing import NDArray
from structlog.stdlib import BoundLogger

from .errors import BvpRunError, KernelViolationError, UnsolvedError
from .exprlang import EvalError, ExpressionError
from .kernel import ParameterRangeError
from .logs import PROBLEM_KEY
from .problem import ConfigError, Problem
from .quadrature import DepthExceededError
from .report import ReportError
from .solver import MIN_GRID_N

logger: BoundLogger = cast(BoundLogger, structlog.get_logger(__name__))

HANDLED_ERRORS: Final[tuple[type[Exception], ...]] = (
    BvpRunError,
    ConfigError,
    DepthExceededError,
    ExpressionError,
    ParameterRangeError,
    ReportError,
)


def exit_code_for(err: Exception) -> int:
    """Map a failure to the process exit code (CLI-owned)."""

    match err:
        case EvalError() | DepthExceededError():
            return 3
        case ConfigError() | ParameterRangeError() | ExpressionError():
            return 2
        case UnsolvedError():
            return 4
        case KernelViolationError():
            return 5
        case _:
            return 1


def fail(err: Exception) -> NoReturn:
    """Log the failure and exit with its mapped code."""

    logger.error(str(err), error=type(err).__name__)
    raise SystemExit(exit_code_for(err)) from err


@contextmanager
def problem_context(name: str) -> Iterator[None]:
    """Bind the problem name onto every log line emitted inside the block."""

    _ = structlog.contextvars.bind_contextvars(**{PROBLEM_KEY: name})
    try:
        yield
    finally:
        structlog.contextvars.unbind_contextvars(PROBLEM_KEY)


def resolve_config_path(raw: Path | str | None) -> Path:
    if raw is None or not str(raw).strip():
        raise ConfigError("--config PATH is required")
    return Path(raw).expanduser()


def resolved_lambda(cli_value: float | None, problem: Problem) -> float:
    """Resolve lambda from the CLI override, then the config."""

    lam = cli_value if cli_value is not None else problem.lam
    if lam is None:
        raise ConfigError("lambda is required: pass --lambda VALUE or set \"lambda\" in the config")
    if not lam > 0.0:
        raise ConfigError(f"lambda must be positive, got {lam!r}")
    return float(lam)


def resolved_grid_n(cli_value: int | None, problem: Problem) -> int:
    """Resolve the grid size from the CLI override, then the config."""

    if cli_value is None:
        return problem.grid_n
    if cli_value < MIN_GRID_N or cli_value % 2:
        raise ConfigError(
            f"--grid-n must be even and at least {MIN_GRID_N}, got {cli_value!r}"
        )
    return cli_value


def parse_lambda_grid(grid: str | None) -> NDArray[np.float64]:
    """Parse ``lo:hi:steps`` into evenly spaced lambda values."""

    if grid is None:
        raise ConfigError("--lambda-grid lo:hi:steps is required")
    parts = grid.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--lambda-grid must look like lo:hi:steps, got {grid!r}")
    try:
        lo = float(parts[0])
        hi = float(parts[1])
        steps = int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"--lambda-grid must look like lo:hi:steps, got {grid!r}") from exc
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo <= 0.0 or hi < lo:
        raise ConfigError(f"--lambda-grid needs 0 < lo <= hi, got {grid!r}")
    if steps < 1:
        raise ConfigError(f"--lambda-grid needs at least one step, got {grid!r}")
    if steps == 1:
        return np.array([lo])
    return np.linspace(lo, hi, steps)


__all__ = [
    "HANDLED_ERRORS",
    "exit_code_for",
    "fail",
    "parse_lambda_grid",
    "problem_context",
    "resolve_config_path",
    "resolved_grid_n",
    "resolved_lambda",
]
