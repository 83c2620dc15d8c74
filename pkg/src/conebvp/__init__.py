from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .cli import Conebvp

__all__ = ["Conebvp", "main"]


def __getattr__(name: str) -> object:
    """Lazily expose the CLI command class so library imports stay light."""

    if name == "Conebvp":
        from .cli import Conebvp

        return Conebvp
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def main() -> None:
    from .cli import parse_conebvp_args

    _ = parse_conebvp_args().start()
