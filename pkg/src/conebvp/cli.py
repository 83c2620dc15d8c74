from __future__ import annotations

import math
import sys
from collections.abc import Sequence
from importlib import metadata
from typing import override

from clypi import Command, arg
from clypi._cli import arg_parser

from .cli_runtime import exit_code_for
from .interval_command import Interval
from .kernel_command import Kernel
from .solve_command import Solve
from .sweep_command import Sweep

LAMBDA_OPTION = "--lambda"
LAMBDA_VALUE_HINT = "Use --lambda VALUE with a positive number."
USAGE_HINT = "conebvp: choose a subcommand: interval, solve, sweep or kernel (see --help)"


class Conebvp(Command):
    """Positive solutions of u'' + lambda a(t) f(u) = 0 with an integral boundary condition."""

    subcommand: Interval | Solve | Sweep | Kernel | None = None
    version: bool = arg(False, short="v", help="Print version and exit")

    @override
    async def run(self) -> None:
        if self.version:
            self._print_version()
            return
        print(USAGE_HINT, file=sys.stderr)
        raise SystemExit(2)

    def _print_version(self) -> None:
        try:
            pkg_version = metadata.version("conebvp")
        except metadata.PackageNotFoundError:
            pkg_version = "unknown"
        print(pkg_version)


def _lambda_value(raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        print(f"{LAMBDA_OPTION} got {raw!r}. {LAMBDA_VALUE_HINT}", file=sys.stderr)
        raise SystemExit(2) from None
    if not math.isfinite(value) or value <= 0.0:
        print(f"{LAMBDA_OPTION} got {raw!r}. {LAMBDA_VALUE_HINT}", file=sys.stderr)
        raise SystemExit(2)
    return value


def _extract_lambda_args(raw_args: Sequence[str]) -> tuple[list[str], float | None]:
    """Pull `--lambda VALUE` out of argv; `lambda` cannot be a field name."""

    normalized_args = arg_parser.normalize_args(raw_args)
    filtered_args: list[str] = []
    lam: float | None = None
    index = 0
    while index < len(normalized_args):
        argument = normalized_args[index]
        if argument == "--":
            filtered_args.extend(normalized_args[index:])
            break
        if argument.startswith(f"{LAMBDA_OPTION}="):
            lam = _lambda_value(argument.split("=", 1)[1])
            index += 1
            continue
        if argument != LAMBDA_OPTION:
            filtered_args.append(argument)
            index += 1
            continue

        next_index = index + 1
        if next_index >= len(normalized_args) or normalized_args[next_index] == "--":
            print(f"{LAMBDA_OPTION} requires a value. {LAMBDA_VALUE_HINT}", file=sys.stderr)
            raise SystemExit(2)
        value = normalized_args[next_index]
        if arg_parser.parse_as_attr(value).is_opt() and not _looks_numeric(value):
            print(f"{LAMBDA_OPTION} requires a value. {LAMBDA_VALUE_HINT}", file=sys.stderr)
            raise SystemExit(2)
        lam = _lambda_value(value)
        index += 2

    return filtered_args, lam


def _looks_numeric(value: str) -> bool:
    try:
        _ = float(value)
    except ValueError:
        return False
    return True


def parse_conebvp_args(args: Sequence[str] | None = None) -> Conebvp:
    """Parse CLI arguments, routing `--lambda` onto the solve subcommand."""

    raw_args = list(args) if args is not None else sys.argv[1:]
    filtered_args, lam = _extract_lambda_args(raw_args)
    command = Conebvp.parse(filtered_args)
    if lam is not None:
        if not isinstance(command.subcommand, Solve):
            print(f"{LAMBDA_OPTION} is only valid for the solve subcommand.", file=sys.stderr)
            raise SystemExit(2)
        command.subcommand.lam = lam
    return command


__all__ = ["Conebvp", "exit_code_for", "parse_conebvp_args"]
