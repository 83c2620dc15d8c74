"""Rich tables for ``--summary``, printed on stderr next to the JSON on stdout."""

from __future__ import annotations

import sys
from collections.abc import Sequence

from rich import box
from rich.align import Align
from rich.console import Console
from rich.table import Table
from rich.text import Text

from .constants import LambdaInterval
from .report import SweepRow
from .solver import SolveOutcome, SolveStatus

SUMMARY_TABLE_WIDTH = 72
SUMMARY_HEADER_STYLE = "bold cyan"
SUMMARY_BORDER_STYLE = "dim"
SUMMARY_LABEL_STYLE = "dim"
SUMMARY_VALUE_STYLE = "bold white"
SUMMARY_GOOD_STYLE = "bold green"
SUMMARY_BAD_STYLE = "bold red"


def stderr_console() -> Console:
    return Console(file=sys.stderr)


def format_number(value: float | None) -> str:
    if value is None:
        return "n/a"
    return f"{value:.10g}"


def format_interval(interval: LambdaInterval) -> str:
    if not interval.conclusive:
        return "inconclusive"
    hi = "inf" if interval.hi is None else format_number(interval.hi)
    return f"({format_number(interval.lo)}, {hi})"


def render_key_values(
    title: str,
    rows: Sequence[tuple[str, str]],
    *,
    console: Console | None = None,
) -> None:
    active_console = console or stderr_console()
    table = Table(
        box=box.ROUNDED,
        width=SUMMARY_TABLE_WIDTH,
        header_style=SUMMARY_HEADER_STYLE,
        border_style=SUMMARY_BORDER_STYLE,
        title=title,
        title_style="bold",
    )
    table.add_column("Quantity", style=SUMMARY_LABEL_STYLE)
    table.add_column("Value", justify="right")
    for label, value in rows:
        table.add_row(label, Text(value, style=SUMMARY_VALUE_STYLE))
    active_console.print(Align.center(table))


def render_solve_summary(
    lam: float,
    outcome: SolveOutcome,
    *,
    console: Console | None = None,
) -> None:
    active_console = console or stderr_console()
    rows = [
        ("lambda", format_number(lam)),
        ("method", outcome.method),
        ("iterations", f"{outcome.iterations:,}"),
        ("clamped values", f"{outcome.clamped:,}"),
        ("norm", format_number(None if outcome.solution is None else outcome.solution.norm)),
    ]
    report = outcome.verification
    if report is not None:
        rows.extend(
            [
                ("ode residual", format_number(report.ode_residual_sup)),
                ("u'(0)", format_number(report.bc_neumann)),
                ("integral condition", format_number(report.bc_integral)),
                ("cone margin", format_number(report.cone_margin)),
            ]
        )
    render_key_values("Solve", rows, console=active_console)
    style = SUMMARY_GOOD_STYLE if outcome.status is SolveStatus.SOLVED else SUMMARY_BAD_STYLE
    active_console.print(Text(f"Status: {outcome.status.value}", style=style))


def render_sweep_summary(
    rows: Sequence[SweepRow],
    *,
    console: Console | None = None,
) -> None:
    active_console = console or stderr_console()
    table = Table(
        box=box.ROUNDED,
        width=SUMMARY_TABLE_WIDTH,
        header_style=SUMMARY_HEADER_STYLE,
        border_style=SUMMARY_BORDER_STYLE,
        title="Sweep",
        title_style="bold",
    )
    table.add_column("lambda", justify="right")
    table.add_column("status")
    table.add_column("norm", justify="right")
    table.add_column("predicted", justify="center")
    for row in rows:
        style = SUMMARY_GOOD_STYLE if row.status == SolveStatus.SOLVED.value else SUMMARY_LABEL_STYLE
        table.add_row(
            format_number(row.lam),
            Text(row.status, style=style),
            format_number(row.norm),
            "yes" if row.in_predicted_interval else "no",
        )
    active_console.print(Align.center(table))


__all__ = [
    "format_interval",
    "format_number",
    "render_key_values",
    "render_solve_summary",
    "render_sweep_summary",
]
