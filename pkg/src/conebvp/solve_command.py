from __future__ import annotations

import asyncio
import sys
from pathlib import Path
from typing import cast, override

import structlog
from clypi import Command, arg
from structlog.stdlib import BoundLogger

from .cli_runtime import (
    HANDLED_ERRORS,
    fail,
    problem_context,
    resolve_config_path,
    resolved_grid_n,
    resolved_lambda,
)
from .errors import UnsolvedError
from .exprlang import EvalError
from .interval_command import analyze_problem
from .logs import configure_logging
from .problem import load_problem
from .quadrature import DepthExceededError
from .report import solution_csv, solve_report, write_json, write_text
from .report_render import render_solve_summary
from .solver import SolveStatus, picard_solve

logger: BoundLogger = cast(BoundLogger, structlog.get_logger(__name__))

DEFAULT_SOLUTION_PATH = "solution.csv"


class Solve(Command):
    """Search for a verified positive solution at one lambda and write it as CSV."""

    config: Path | str | None = arg(None, help="Path to the problem config (JSON)")
    lam: float | None = arg(
        None, help="Lambda override; usually given as --lambda VALUE"
    )
    output: Path | str = arg(
        DEFAULT_SOLUTION_PATH, help="Where to write the t,u solution CSV (default: solution.csv)"
    )
    grid_n: int | None = arg(None, help="Grid intervals n (even, >= 16); overrides the config")
    debug: bool = arg(False, short="d", help="Enable debug logging")
    log_json: bool = arg(False, help="Emit logs on stderr as JSON lines")
    summary: bool = arg(False, help="Print a summary table on stderr")

    @override
    async def run(self) -> None:
        configure_logging(debug=self.debug, json_logs=self.log_json)
        output = Path(self.output).expanduser()
        try:
            path = resolve_config_path(self.config)
            with problem_context(path.stem):
                problem = load_problem(path)
                lam = resolved_lambda(self.lam, problem)
                n = resolved_grid_n(self.grid_n, problem)
                warnings = list(problem.warnings)
                try:
                    in_interval = analyze_problem(problem).interval.contains(lam)
                except (EvalError, DepthExceededError) as exc:
                    warnings.append(f"lambda interval unavailable: {exc}")
                    in_interval = False
                outcome = await asyncio.to_thread(
                    picard_solve,
                    problem.params,
                    problem.a,
                    problem.f,
                    lam,
                    problem.solve,
                    problem.quadrature,
                    n,
                )
                written: Path | None = None
                if outcome.solution is not None:
                    write_text(output, solution_csv(outcome.solution))
                    written = output
                    logger.info("Wrote solution", path=str(output), norm=outcome.solution.norm)
        except HANDLED_ERRORS as exc:
            fail(exc)

        write_json(
            solve_report(
                problem=problem.name,
                lam=lam,
                outcome=outcome,
                in_predicted_interval=in_interval,
                output=written,
                warnings=warnings,
            ),
            sys.stdout,
        )
        if self.summary:
            render_solve_summary(lam, outcome)
        if outcome.status is not SolveStatus.SOLVED:
            fail(UnsolvedError(outcome.status.value))


__all__ = ["DEFAULT_SOLUTION_PATH", "Solve"]
