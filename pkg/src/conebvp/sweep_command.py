from __future__ import annotations

import asyncio
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import cast, override

import structlog
from clypi import Command, arg
from structlog.stdlib import BoundLogger

from .cli_runtime import (
    HANDLED_ERRORS,
    fail,
    parse_lambda_grid,
    problem_context,
    resolve_config_path,
    resolved_grid_n,
)
from .constants import LambdaInterval
from .exprlang import EvalError
from .interval_command import analyze_problem
from .logs import configure_logging
from .problem import ConfigError, Problem, load_problem
from .quadrature import DepthExceededError
from .report import SweepRow, sweep_csv, write_text
from .report_render import render_sweep_summary
from .solver import picard_solve

logger: BoundLogger = cast(BoundLogger, structlog.get_logger(__name__))

DEFAULT_JOBS = 4
EVAL_ERROR_STATUS = "eval_error"


def sweep_row(problem: Problem, lam: float, n: int, interval: LambdaInterval) -> SweepRow:
    """Solve at one lambda; evaluation failures become the row's status."""

    predicted = interval.contains(lam)
    try:
        outcome = picard_solve(
            problem.params, problem.a, problem.f, lam, problem.solve, problem.quadrature, n
        )
    except (EvalError, DepthExceededError) as exc:
        logger.warning("Sweep row failed", lam=lam, error=str(exc))
        return SweepRow(lam, EVAL_ERROR_STATUS, None, None, predicted)
    report = outcome.verification
    return SweepRow(
        lam=lam,
        status=outcome.status.value,
        norm=None if outcome.solution is None else outcome.solution.norm,
        ode_residual=None if report is None else report.ode_residual_sup,
        in_predicted_interval=predicted,
    )


async def run_sweep(
    problem: Problem,
    lambdas: Sequence[float],
    n: int,
    interval: LambdaInterval,
    jobs: int = DEFAULT_JOBS,
) -> list[SweepRow]:
    """Solve every lambda on worker threads; rows come back in lambda order."""

    limiter = asyncio.Semaphore(jobs)

    async def one(lam: float) -> SweepRow:
        async with limiter:
            row = await asyncio.to_thread(sweep_row, problem, lam, n, interval)
            logger.debug("Sweep row finished", lam=lam, status=row.status)
            return row

    return list(await asyncio.gather(*(one(float(lam)) for lam in lambdas)))


class Sweep(Command):
    """Solve over a lambda grid and tabulate status against the predicted interval."""

    config: Path | str | None = arg(None, help="Path to the problem config (JSON)")
    lambda_grid: str | None = arg(None, help="Lambda grid as lo:hi:steps")
    output: Path | str | None = arg(None, help="Write the CSV here instead of stdout")
    grid_n: int | None = arg(None, help="Grid intervals n (even, >= 16); overrides the config")
    jobs: int = arg(DEFAULT_JOBS, help="Rows solved concurrently (default: 4)")
    debug: bool = arg(False, short="d", help="Enable debug logging")
    log_json: bool = arg(False, help="Emit logs on stderr as JSON lines")
    summary: bool = arg(False, help="Print a summary table on stderr")

    @override
    async def run(self) -> None:
        configure_logging(debug=self.debug, json_logs=self.log_json)
        try:
            lambdas = parse_lambda_grid(self.lambda_grid)
            if self.jobs < 1:
                raise ConfigError(f"--jobs must be at least 1, got {self.jobs!r}")
            path = resolve_config_path(self.config)
            with problem_context(path.stem):
                problem = load_problem(path)
                n = resolved_grid_n(self.grid_n, problem)
                interval = analyze_problem(problem).interval
                logger.info("Starting sweep", rows=len(lambdas), jobs=self.jobs)
                rows = await run_sweep(problem, lambdas.tolist(), n, interval, self.jobs)
                text = sweep_csv(rows)
                if self.output is not None:
                    write_text(Path(self.output).expanduser(), text)
        except HANDLED_ERRORS as exc:
            fail(exc)

        if self.output is None:
            _ = sys.stdout.write(text)
        if self.summary:
            render_sweep_summary(rows)


__all__ = ["Sweep", "run_sweep", "sweep_row"]
