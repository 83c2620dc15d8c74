from __future__ import annotations

import json
import unittest
from pathlib import Path
from tempfile import TemporaryDirectory

import pytest

from conebvp.constants import AsymptoticValue
from conebvp.exprlang import ExpressionSyntaxError, UnknownIdentifierError, parse
from conebvp.kernel import ParameterRangeError
from conebvp.problem import (
    ConfigError,
    Problem,
    declared_limit,
    load_problem,
    sample_warnings,
)

CASE1_F = "5*u*exp(2*u)/(8+exp(u)+exp(2*u))"


def write_config(directory: Path, name: str, payload: dict[str, object]) -> Path:
    path = directory / f"{name}.json"
    _ = path.write_text(json.dumps(payload), encoding="utf-8")
    return path


class LoadProblemTests(unittest.TestCase):
    def setUp(self) -> None:
        self._tmp = TemporaryDirectory()
        self.dir = Path(self._tmp.name)

    def tearDown(self) -> None:
        self._tmp.cleanup()

    def _load(self, **payload: object) -> Problem:
        base: dict[str, object] = {"alpha": 2.0, "eta": 1.0 / 3.0, "a": "1", "f": CASE1_F}
        base.update(payload)
        return load_problem(write_config(self.dir, "case", base))

    def test_loads_defaults_and_name(self) -> None:
        problem = load_problem(
            write_config(self.dir, "case-one", {"alpha": 2, "eta": 0.25, "a": "t", "f": "u^2"})
        )
        self.assertEqual(problem.name, "case-one")
        self.assertEqual(problem.params.alpha, 2.0)
        self.assertEqual(problem.grid_n, 200)
        self.assertIsNone(problem.lam)
        self.assertIsNone(problem.declared_f0)
        self.assertEqual(problem.warnings, ())

    def test_overrides_flow_into_settings(self) -> None:
        problem = load_problem(
            write_config(
                self.dir,
                "tuned",
                {
                    "alpha": 1.0,
                    "eta": 0.5,
                    "a": "0.2",
                    "f": "u*(1-1/(1+u^2))",
                    "lambda": 20.0,
                    "grid_n": 64,
                    "quad_abs_tol": 1e-9,
                    "solve": {"damping": 0.25, "shell_search": False},
                    "f0": "zero",
                    "finf": 1,
                },
            )
        )
        self.assertEqual(problem.lam, 20.0)
        self.assertEqual(problem.grid_n, 64)
        self.assertEqual(problem.quadrature.abs_tol, 1e-9)
        self.assertEqual(problem.solve.damping, 0.25)
        self.assertFalse(problem.solve.shell_search)
        self.assertEqual(problem.declared_f0, AsymptoticValue.zero())
        self.assertEqual(problem.declared_finf, AsymptoticValue.finite(1.0))

    def test_missing_file(self) -> None:
        with self.assertRaisesRegex(ConfigError, "Unable to read"):
            _ = load_problem(self.dir / "absent.json")

    def test_invalid_documents(self) -> None:
        cases: list[dict[str, object]] = [
            {"extra": 1},
            {"grid_n": 15},
            {"grid_n": 8},
            {"lambda": -1.0},
            {"f0": "huge"},
            {"finf": -2.0},
            {"solve": {"damping": 1.5}},
            {"quadrature": {"panels": 0}},
        ]
        for payload in cases:
            with self.subTest(payload=payload):
                with self.assertRaises(ConfigError):
                    _ = self._load(**payload)

    def test_malformed_json(self) -> None:
        path = self.dir / "broken.json"
        _ = path.write_text("{not json", encoding="utf-8")
        with self.assertRaisesRegex(ConfigError, "Invalid problem config"):
            _ = load_problem(path)

    def test_parameter_and_expression_errors_propagate(self) -> None:
        with self.assertRaises(ParameterRangeError):
            _ = self._load(alpha=3.0)
        with self.assertRaises(ExpressionSyntaxError):
            _ = self._load(f="u +")
        with self.assertRaises(UnknownIdentifierError):
            _ = self._load(a="u")

    def test_pole_at_zero_is_a_warning(self) -> None:
        problem = self._load(f="5*u*exp(2*u)/(-2+exp(u)+exp(2*u))")
        self.assertEqual(len(problem.warnings), 1)
        self.assertIn("u=0.0", problem.warnings[0])


def test_sample_warnings_flag_negative_values() -> None:
    warnings = sample_warnings(parse("t-0.5", "t"), parse("u-1", "u"))
    assert len(warnings) == 2
    assert warnings[0].startswith("a(t) is negative at t=0.0")
    assert warnings[1].startswith("f(u) is negative at u=0.0")


@pytest.mark.parametrize(
    ("raw", "expected"),
    [
        (None, None),
        ("zero", AsymptoticValue.zero()),
        ("infinite", AsymptoticValue.infinite()),
        (0.0, AsymptoticValue.zero()),
        (2.5, AsymptoticValue.finite(2.5)),
    ],
)
def test_declared_limit(raw: float | str | None, expected: AsymptoticValue | None) -> None:
    assert declared_limit(raw) == expected


if __name__ == "__main__":
    _ = unittest.main()
