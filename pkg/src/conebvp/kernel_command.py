from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Final, cast, override

import numpy as np
import structlog
from clypi import Command, arg
from structlog.stdlib import BoundLogger

from .cli_runtime import HANDLED_ERRORS, fail, problem_context, resolve_config_path
from .errors import KernelViolationError
from .kernel import (
    Branch,
    BvpParams,
    gamma,
    green,
    green_branch,
    green_matrix,
    one_minus_alpha_eta,
)
from .logs import configure_logging
from .problem import ConfigError, load_problem
from .report import write_json
from .report_render import format_number, render_key_values

logger: BoundLogger = cast(BoundLogger, structlog.get_logger(__name__))

DEFAULT_SAMPLES: Final[int] = 200
KERNEL_TOLERANCE: Final[float] = 1e-9
RANDOM_SEED: Final[int] = 20240101


@dataclass(frozen=True)
class KernelCheckReport:
    """Worst violation of each kernel property; zero means it held everywhere."""

    samples: int
    nonnegativity: float
    envelope: float
    cone_lower: float
    seam_gap: float

    def checks(self) -> dict[str, float]:
        return {
            "nonnegativity": self.nonnegativity,
            "envelope": self.envelope,
            "cone_lower": self.cone_lower,
            "seam_gap": self.seam_gap,
        }

    def worst(self) -> tuple[str, float]:
        return max(self.checks().items(), key=lambda item: item[1])


def _seam_gap(p: BvpParams, t: float) -> float:
    """Disagreement of the two branches meeting at s = t and at s = eta."""

    if t <= p.eta:
        at_t = (Branch.BELOW_BOTH, Branch.BETWEEN_T_AND_ETA)
        at_eta = (Branch.BETWEEN_T_AND_ETA, Branch.ABOVE_BOTH)
    else:
        at_t = (Branch.BETWEEN_ETA_AND_T, Branch.ABOVE_BOTH)
        at_eta = (Branch.BELOW_BOTH, Branch.BETWEEN_ETA_AND_T)
    gaps = [
        abs(green_branch(p, first, t, s) - green_branch(p, second, t, s))
        for (first, second), s in ((at_t, t), (at_eta, p.eta))
    ]
    return max(gaps)


def kernel_check(
    p: BvpParams, samples: int = DEFAULT_SAMPLES, seed: int = RANDOM_SEED
) -> KernelCheckReport:
    """Sample an N x N grid plus N random pairs and measure each property."""

    if samples < 2:
        raise ConfigError(f"--samples must be at least 2, got {samples!r}")
    axis = np.linspace(0.0, 1.0, samples)
    pairs = np.random.default_rng(seed).random((samples, 2))

    grid_values = green_matrix(p, axis, axis)
    random_values = np.array([green(p, float(t), float(s)) for t, s in pairs])
    values = np.concatenate([grid_values.ravel(), random_values])
    t_all = np.concatenate([np.repeat(axis, samples), pairs[:, 0]])
    s_all = np.concatenate([np.tile(axis, samples), pairs[:, 1]])

    envelope = (1.0 - s_all) / one_minus_alpha_eta(p)
    head = t_all <= p.eta
    cone_floor = gamma(p) * envelope[head]

    report = KernelCheckReport(
        samples=samples,
        nonnegativity=float(max(0.0, -np.min(values))),
        envelope=float(max(0.0, np.max(values - envelope))),
        cone_lower=float(max(0.0, np.max(cone_floor - values[head]))) if head.any() else 0.0,
        seam_gap=max(_seam_gap(p, float(t)) for t in np.concatenate([axis, pairs[:, 0]])),
    )
    return report


class Kernel(Command):
    """Sample the Green's function and report its worst inequality violations."""

    config: Path | str | None = arg(None, help="Path to the problem config (JSON)")
    samples: int = arg(DEFAULT_SAMPLES, help="Grid size N (N x N grid plus N random pairs)")
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
                report = kernel_check(problem.params, self.samples)
        except HANDLED_ERRORS as exc:
            fail(exc)

        check, worst = report.worst()
        passed = worst <= KERNEL_TOLERANCE
        logger.info("Kernel check finished", check=check, worst=worst, passed=passed)
        write_json(
            {
                "problem": problem.name,
                "alpha": problem.params.alpha,
                "eta": problem.params.eta,
                "samples": report.samples,
                "checks": dict(report.checks()),
                "tolerance": KERNEL_TOLERANCE,
                "passed": passed,
            },
            sys.stdout,
        )
        if self.summary:
            render_key_values(
                "Kernel check",
                [(name, format_number(value)) for name, value in report.checks().items()],
            )
        if not passed:
            fail(KernelViolationError(check, worst))


__all__ = ["Kernel", "KernelCheckReport", "kernel_check"]
