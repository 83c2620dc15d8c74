from __future__ import annotations

import datetime
import logging
import sys
from typing import TypedDict, cast

import structlog
from rich.traceback import install as install_rich_traceback
from structlog.dev import Column, ConsoleRenderer, KeyValueColumnFormatter
from structlog.typing import EventDict, Processor

DIM = "\x1b[2m"
RESET = "\x1b[0m"
PROBLEM_STYLE = "\x1b[38;2;129;161;193m"
PROBLEM_KEY = "problem"


class LevelStyle(TypedDict):
    text: str
    bracket: str


def hex_to_ansi_fg(value: int) -> str:
    """Convert a 24-bit RGB hex color to an ANSI foreground escape sequence."""

    red = (value >> 16) & 0xFF
    green = (value >> 8) & 0xFF
    blue = value & 0xFF
    return f"\x1b[38;2;{red};{green};{blue}m"


def _level(tag: str, text_color: int, bracket_color: int) -> LevelStyle:
    return {
        "text": f"{hex_to_ansi_fg(text_color)}{tag}{RESET}",
        "bracket": hex_to_ansi_fg(bracket_color),
    }


LEVEL_MAPPING: dict[str, LevelStyle] = {
    "debug": _level("dbug", 0x908CAA, 0x817E99),
    "info": _level("info", 0x9CCFD8, 0x8CBAC2),
    "warning": _level("warn", 0xF6C177, 0xDDAD6B),
    "error": _level("eror", 0xEB6F92, 0xD46483),
    "exception": _level("exc!", 0xEB6F92, 0xD46483),
    "critical": {
        "text": "\x1b[48;2;235;111;146;38;2;33;32;46mcrit\x1b[0m",
        "bracket": hex_to_ansi_fg(0xD46483),
    },
}


def timestamp_processor(
    _logger: structlog.stdlib.BoundLogger, _method: str, event_dict: EventDict
) -> EventDict:
    event_dict.setdefault("timestamp", datetime.datetime.now().strftime("%H:%M:%S"))
    return event_dict


def compact_level_processor(
    _logger: structlog.stdlib.BoundLogger, _method: str, event_dict: EventDict
) -> EventDict:
    level = str(cast(object, event_dict.get("level", ""))).lower()
    style = LEVEL_MAPPING.get(level)
    if style is not None:
        bracket = style["bracket"]
        event_dict["level"] = f"{bracket}[{style['text']}{bracket}]{RESET}"
    return event_dict


def problem_column_processor(key: str = PROBLEM_KEY, placeholder: str = "----") -> Processor:
    """Render the bound problem name as a bracketed column."""

    def processor(
        _logger: structlog.stdlib.BoundLogger, _method: str, event_dict: EventDict
    ) -> EventDict:
        value = str(cast(object, event_dict.get(key, placeholder))).strip() or placeholder
        event_dict[key] = f"{PROBLEM_STYLE}[{value}]{RESET}"
        return event_dict

    return processor


def extra_kv_processor(
    kv_key: str, default_key: str, reserved_keys: set[str]
) -> Processor:
    def processor(
        _logger: structlog.stdlib.BoundLogger, _method: str, event_dict: EventDict
    ) -> EventDict:
        extras: list[str] = []
        for key in sorted(event_dict.keys()):
            if key in reserved_keys or key.startswith("_"):
                continue
            extras.append(f"{key}={event_dict.pop(key)}")
        event_dict[kv_key] = " ".join(extras)
        event_dict[default_key] = ""
        return event_dict

    return processor


def _plain_column(key: str, *, value_style: str = "", prefix: str = "") -> Column:
    return Column(
        key,
        KeyValueColumnFormatter(
            key_style=None,
            value_style=value_style,
            reset_style=RESET,
            value_repr=str,
            prefix=prefix,
        ),
    )


def build_renderer(
    problem_key: str = PROBLEM_KEY,
) -> tuple[list[Processor], ConsoleRenderer]:
    """Compact console renderer: time, level tag, [problem], event, key=value extras."""

    default_key = ""
    kv_key = "kv"
    columns = [
        _plain_column("timestamp", value_style=DIM),
        _plain_column("level"),
        _plain_column(problem_key),
        _plain_column("event"),
        _plain_column(kv_key, prefix=" "),
        _plain_column(default_key),
    ]
    renderer = ConsoleRenderer(colors=True, columns=columns)
    processors: list[Processor] = [
        timestamp_processor,
        compact_level_processor,
        problem_column_processor(problem_key),
        extra_kv_processor(
            kv_key,
            default_key,
            {"timestamp", "level", problem_key, "event", kv_key, default_key},
        ),
    ]
    return processors, renderer


def configure_logging(*, debug: bool = False, json_logs: bool = False) -> None:
    """Route structlog through stdlib logging to stderr; stdout carries data only."""

    if debug:
        _ = install_rich_traceback(show_locals=True)
    level = logging.DEBUG if debug else logging.INFO
    if json_logs:
        renderer_processors: list[Processor] = [
            structlog.processors.TimeStamper(fmt="iso"),
        ]
        renderer: Processor = structlog.processors.JSONRenderer(sort_keys=True)
    else:
        renderer_processors, renderer = build_renderer()
    pre_chain: list[Processor] = [
        structlog.contextvars.merge_contextvars,
        structlog.processors.add_log_level,
        structlog.stdlib.PositionalArgumentsFormatter(),
        *renderer_processors,
    ]
    formatter = structlog.stdlib.ProcessorFormatter(
        foreign_pre_chain=pre_chain,
        processors=[
            structlog.stdlib.ProcessorFormatter.remove_processors_meta,
            renderer,
        ],
    )
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(formatter)
    logging.basicConfig(level=level, handlers=[handler], force=True)
    structlog.configure(
        processors=[
            *pre_chain,
            structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )
    structlog.contextvars.clear_contextvars()


__all__ = [
    "PROBLEM_KEY",
    "build_renderer",
    "compact_level_processor",
    "configure_logging",
    "extra_kv_processor",
    "problem_column_processor",
    "timestamp_processor",
]
