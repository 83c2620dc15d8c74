from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import cast, override

import structlog
from clypi import Command, arg
from structlog.stdlib import BoundLogger

from .asymptotics import ResolvedAsymptotic, resolve_asymptotics
from .cli_runtime import HANDLED_ERRORS, fail, problem_context, resolve_config_path
from .constants import (
    LambdaConstants,
    LambdaInterval,
    compute_constants,
    eigenvalue_interval,
    weight_support_warning,
)
from .kernel import gamma
from .logs import configure_logging
from .problem import Problem, load_problem
from .report import interval_report, write_json
from .report_render import format_interval, format_number, render_key_values

logger: BoundLogger = cast(BoundLogger, structlog.get_logger(__name__))


@dataclass(frozen=True)
class IntervalAnalysis:
    constants: LambdaConstants
    f0: ResolvedAsymptotic
    finf: ResolvedAsymptotic
    interval: LambdaInterval
    warnings: tuple[str, ...]


def analyze_problem(problem: Problem) -> IntervalAnalysis:
    """Constants, asymptotics and the guaranteed lambda interval for a problem."""

    constants = compute_constants(problem.params, problem.a, problem.quadrature)
    f0, finf = resolve_asymptotics(problem.f, problem.declared_f0, problem.declared_finf)
    interval = eigenvalue_interval(constants, f0.value, finf.value)

    warnings = list(problem.warnings)
    support = weight_support_warning(problem.params, problem.a)
    if support is not None:
        logger.warning(support)
        warnings.append(support)
    for name, resolved in (("f0", f0), ("finf", finf)):
        if not resolved.confident:
            warnings.append(
                f"{name} estimate {resolved.value.describe()} has low confidence; "
                + f"declare {name} in the config to override it"
            )
    if not interval.conclusive:
        logger.warning("No lambda interval follows from the asymptotic limits")
    logger.info(
        "Computed lambda interval",
        interval=format_interval(interval),
        source=None if interval.source is None else interval.source.value,
    )
    return IntervalAnalysis(
        constants=constants,
        f0=f0,
        finf=finf,
        interval=interval,
        warnings=tuple(warnings),
    )


class Interval(Command):
    """Print Lambda1, Lambda2, f0, f_inf and the lambda interval guaranteeing a positive solution."""

    config: Path | str | None = arg(None, help="Path to the problem config (JSON)")
    debug: bool = arg(False, short="d", help="Enable debug logging")
    log_json: bool = arg(False, help="Emit logs on stderr as JSON lines")
    summary: bool = arg(False, help="Print a summary table on stderr")

    @override
    async def run(self) -> None:
        configure_logging(debug=self.debug, json_logs=self.log_json)
        try:
            path = resolve_config_path(self.config)
            with problem_context(path.stem):
                problem = load_problem(path)
                analysis = analyze_problem(problem)
        except HANDLED_ERRORS as exc:
            fail(exc)

        write_json(
            interval_report(
                problem=problem.name,
                constants=analysis.constants,
                gamma=gamma(problem.params),
                f0=analysis.f0,
                finf=analysis.finf,
                interval=analysis.interval,
                warnings=analysis.warnings,
            ),
            sys.stdout,
        )
        if self.summary:
            render_key_values(
                "Lambda interval",
                [
                    ("Lambda1", format_number(analysis.constants.lambda1)),
                    ("Lambda2", format_number(analysis.constants.lambda2)),
                    ("gamma", format_number(gamma(problem.params))),
                    ("f0", analysis.f0.value.describe()),
                    ("f_inf", analysis.finf.value.describe()),
                    ("interval", format_interval(analysis.interval)),
                ],
            )


__all__ = ["Interval", "IntervalAnalysis", "analyze_problem"]
