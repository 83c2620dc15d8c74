from __future__ import annotations


class BvpRunError(Exception):
    """Base class for subcommand outcomes that should fail the process. Carries no exit code."""


class UnsolvedError(BvpRunError):
    """The solver finished without a verified positive solution."""

    def __init__(self, status: str) -> None:
        super().__init__(f"no verified positive solution (status: {status})")
        self.status: str = status


class KernelViolationError(BvpRunError):
    """A sampled kernel inequality or seam agreement exceeded its tolerance."""

    def __init__(self, check: str, worst: float) -> None:
        super().__init__(f"kernel check {check!r} violated by {worst!r}")
        self.check: str = check
        self.worst: float = worst
