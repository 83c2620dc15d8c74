"""Machine-readable output: JSON reports on stdout and CSV data files.

Data output is deterministic: floats use the shortest round-trip form, keys
keep a fixed order, and nothing time-dependent is written.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Final

from .asymptotics import ResolvedAsymptotic
from .constants import LambdaConstants, LambdaInterval
from .solver import GridFunction, SolveOutcome
from .verifier import VerificationReport

SOLUTION_HEADER: Final[tuple[str, ...]] = ("t", "u")
SWEEP_HEADER: Final[tuple[str, ...]] = (
    "lambda",
    "status",
    "norm",
    "ode_residual",
    "in_predicted_interval",
)

JsonValue = (
    None | bool | int | float | str | Sequence["JsonValue"] | Mapping[str, "JsonValue"]
)


class ReportError(RuntimeError):
    """Raised when an output file cannot be written."""


@dataclass(frozen=True)
class SweepRow:
    lam: float
    status: str
    norm: float | None
    ode_residual: float | None
    in_predicted_interval: bool


def finite_or_none(value: float | None) -> float | None:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def csv_float(value: float | None) -> str:
    finite = finite_or_none(value)
    return "" if finite is None else repr(finite)


def csv_bool(value: bool) -> str:
    return "true" if value else "false"


def asymptotic_payload(resolved: ResolvedAsymptotic) -> dict[str, JsonValue]:
    return {
        "kind": resolved.value.kind.value,
        "value": resolved.value.value,
        "declared": resolved.declared,
        "confident": resolved.confident,
    }


def interval_payload(interval: LambdaInterval) -> dict[str, JsonValue]:
    return {
        "lo": interval.lo,
        "hi": interval.hi,
        "hi_unbounded": interval.unbounded,
        "source": None if interval.source is None else interval.source.value,
        "conclusive": interval.conclusive,
    }


def verification_payload(report: VerificationReport | None) -> dict[str, JsonValue] | None:
    if report is None:
        return None
    tolerances = report.tolerances
    return {
        "ode_residual_sup": finite_or_none(report.ode_residual_sup),
        "bc_neumann": finite_or_none(report.bc_neumann),
        "bc_integral": finite_or_none(report.bc_integral),
        "cone_margin": finite_or_none(report.cone_margin),
        "passed": report.passed,
        "tolerances": {
            "ode": tolerances.ode,
            "bc_neumann": tolerances.bc_neumann,
            "bc_integral": tolerances.bc_integral,
            "cone": tolerances.cone,
        },
    }


def interval_report(
    *,
    problem: str,
    constants: LambdaConstants,
    gamma: float,
    f0: ResolvedAsymptotic,
    finf: ResolvedAsymptotic,
    interval: LambdaInterval,
    warnings: Iterable[str],
) -> dict[str, JsonValue]:
    return {
        "problem": problem,
        "lambda1": constants.lambda1,
        "lambda2": constants.lambda2,
        "gamma": gamma,
        "f0": asymptotic_payload(f0),
        "finf": asymptotic_payload(finf),
        "interval": interval_payload(interval),
        "warnings": list(warnings),
    }


def solve_report(
    *,
    problem: str,
    lam: float,
    outcome: SolveOutcome,
    in_predicted_interval: bool,
    output: Path | None,
    warnings: Iterable[str],
) -> dict[str, JsonValue]:
    return {
        "problem": problem,
        "lambda": lam,
        "status": outcome.status.value,
        "method": outcome.method,
        "iterations": outcome.iterations,
        "scale": outcome.scale,
        "clamped": outcome.clamped,
        "norm": None if outcome.solution is None else outcome.solution.norm,
        "in_predicted_interval": in_predicted_interval,
        "verification": verification_payload(outcome.verification),
        "output": None if output is None else str(output),
        "warnings": list(warnings),
    }


def dump_json(payload: Mapping[str, JsonValue]) -> str:
    """Indented JSON; NaN and infinities are rejected."""

    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def write_json(payload: Mapping[str, JsonValue], stream: IO[str]) -> None:
    _ = stream.write(dump_json(payload))


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def solution_csv(u: GridFunction) -> str:
    return _csv_text(
        SOLUTION_HEADER,
        ((repr(float(t)), repr(float(v))) for t, v in zip(u.t, u.values)),
    )


def sweep_csv(rows: Iterable[SweepRow]) -> str:
    return _csv_text(
        SWEEP_HEADER,
        (
            (
                repr(float(row.lam)),
                row.status,
                csv_float(row.norm),
                csv_float(row.ode_residual),
                csv_bool(row.in_predicted_interval),
            )
            for row in rows
        ),
    )


def write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as handle:
            _ = handle.write(text)
    except OSError as exc:
        raise ReportError(f"Unable to write {path}: {exc}") from exc


__all__ = [
    "ReportError",
    "SOLUTION_HEADER",
    "SWEEP_HEADER",
    "SweepRow",
    "dump_json",
    "interval_report",
    "solution_csv",
    "solve_report",
    "sweep_csv",
    "write_json",
    "write_text",
]
