from __future__ import annotations

import unittest
from pathlib import Path

import numpy as np
import pytest

from conebvp.exprlang import parse
from conebvp.kernel import gamma, green, validate_params
from conebvp.problem import load_problem
from conebvp.quadrature import QuadratureSettings, integrate_split
from conebvp.solver import (
    GridFunction,
    SolveOutcome,
    SolveSettings,
    SolveStatus,
    apply_operator,
    cone_membership,
    grid_function,
    picard_solve,
)
from conebvp.verifier import verify

CASE1_F = "5*u*exp(2*u)/(8+exp(u)+exp(2*u))"
CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def closed_form(t: np.ndarray) -> np.ndarray:
    return 23.0 / 24.0 - t**2 / 2.0


class GridFunctionTests(unittest.TestCase):
    def test_rejects_bad_grids(self) -> None:
        with self.assertRaises(ValueError):
            _ = grid_function(15, np.zeros(16))
        with self.assertRaises(ValueError):
            _ = grid_function(8, np.zeros(9))
        with self.assertRaises(ValueError):
            _ = grid_function(16, np.zeros(16))
        with self.assertRaises(ValueError):
            _ = grid_function(16, np.full(17, np.nan))

    def test_values_are_read_only(self) -> None:
        u = GridFunction.from_callable(16, lambda t: t)
        with self.assertRaises(ValueError):
            u.values[0] = 1.0
        self.assertEqual(u.norm, 1.0)

    def test_outcome_requires_solution_exactly_when_solved(self) -> None:
        with self.assertRaises(ValueError):
            _ = SolveOutcome(SolveStatus.SOLVED, None, 1, ())
        with self.assertRaises(ValueError):
            _ = SolveOutcome(SolveStatus.TRIVIAL, grid_function(16, np.zeros(17)), 1, ())


class OperatorTests(unittest.TestCase):
    def test_constant_nonlinearity_has_closed_form_image(self) -> None:
        p = validate_params(1.0, 0.5)
        u = GridFunction.from_callable(64, lambda t: 1.0 + t)
        v = apply_operator(p, parse("1", "t"), parse("u*0+1", "u"), 1.0, u)
        np.testing.assert_allclose(v.values, closed_form(v.t), atol=1e-12)

    def test_image_scales_with_lambda(self) -> None:
        p = validate_params(2.0, 0.25)
        a = parse("t", "t")
        f = parse("u^2", "u")
        u = GridFunction.from_callable(32, lambda t: 1.0 - t / 2.0)
        once = apply_operator(p, a, f, 1.0, u)
        thrice = apply_operator(p, a, f, 3.0, u)
        np.testing.assert_allclose(thrice.values, 3.0 * once.values)

    def test_operator_maps_into_cone(self) -> None:
        p = validate_params(2.0, 1.0 / 3.0)
        u = GridFunction.from_callable(64, lambda t: 1.0 + np.sin(3.0 * t) ** 2)
        v = apply_operator(p, parse("1", "t"), parse(CASE1_F, "u"), 0.8, u)
        member, margin = cone_membership(v, gamma(p), p.eta)
        self.assertTrue(member)
        self.assertGreaterEqual(margin, 0.0)


class PicardSolveTests(unittest.TestCase):
    def setUp(self) -> None:
        self.p = validate_params(1.0, 0.5)
        self.a = parse("1", "t")

    def test_constant_nonlinearity_converges_to_closed_form(self) -> None:
        outcome = picard_solve(self.p, self.a, parse("u*0+1", "u"), 1.0, n=64)
        self.assertIs(outcome.status, SolveStatus.SOLVED)
        self.assertEqual(outcome.method, "picard")
        assert outcome.solution is not None and outcome.verification is not None
        np.testing.assert_allclose(
            outcome.solution.values, closed_form(outcome.solution.t), atol=1e-8
        )
        self.assertTrue(outcome.verification.passed)
        self.assertAlmostEqual(outcome.verification.cone_margin, 17.0 / 48.0, delta=1e-8)
        _, margin = cone_membership(outcome.solution, gamma(self.p))
        self.assertAlmostEqual(margin, 17.0 / 48.0, delta=1e-8)

    def test_small_start_decays_to_trivial(self) -> None:
        settings = SolveSettings(init_scales=(0.1,), shell_search=False)
        outcome = picard_solve(self.p, self.a, parse("u^2", "u"), 0.1, settings, n=32)
        self.assertIs(outcome.status, SolveStatus.TRIVIAL)
        self.assertIsNone(outcome.solution)

    def test_large_start_diverges(self) -> None:
        settings = SolveSettings(init_scales=(10.0,), shell_search=False)
        outcome = picard_solve(self.p, self.a, parse("u^2", "u"), 10.0, settings, n=32)
        self.assertIs(outcome.status, SolveStatus.DIVERGED)

    def test_iteration_budget_is_reported(self) -> None:
        settings = SolveSettings(init_scales=(0.1,), max_iters=3, shell_search=False)
        outcome = picard_solve(self.p, self.a, parse("u*0+1", "u"), 1.0, settings, n=32)
        self.assertIs(outcome.status, SolveStatus.MAX_ITERS)
        self.assertEqual(outcome.iterations, 3)
        self.assertEqual(len(outcome.history), 4)

    def test_best_failure_ranks_trivial_over_diverged(self) -> None:
        settings = SolveSettings(init_scales=(10.0, 0.1), shell_search=False)
        outcome = picard_solve(self.p, self.a, parse("u^2", "u"), 0.1, settings, n=32)
        self.assertIs(outcome.status, SolveStatus.TRIVIAL)

    def test_rejects_bad_arguments(self) -> None:
        f = parse("u^2", "u")
        with self.assertRaises(ValueError):
            _ = picard_solve(self.p, self.a, f, 0.0)
        with self.assertRaises(ValueError):
            _ = picard_solve(self.p, self.a, f, 1.0, n=33)


def test_repelling_fixed_point_is_found_by_shell_search() -> None:
    p = validate_params(2.0, 1.0 / 3.0)
    outcome = picard_solve(p, parse("1", "t"), parse(CASE1_F, "u"), 0.8)

    assert outcome.status is SolveStatus.SOLVED
    assert outcome.method == "shell"
    assert outcome.solution is not None
    assert outcome.solution.norm > 1e-3
    member, _ = cone_membership(outcome.solution, gamma(p), p.eta)
    assert member


def test_solve_is_deterministic() -> None:
    p = validate_params(1.0, 0.5)
    f = parse("u*0+1", "u")
    first = picard_solve(p, parse("1", "t"), f, 1.0, n=32)
    second = picard_solve(p, parse("1", "t"), f, 1.0, n=32)
    assert first.solution is not None and second.solution is not None
    assert np.array_equal(first.solution.values, second.solution.values)
    assert first.history == second.history


@pytest.mark.parametrize(
    "kwargs",
    [
        {"damping": 0.0},
        {"max_iters": 0},
        {"conv_tol": 1.0},
        {"init_scales": ()},
        {"shell_radii": (1.0,)},
        {"shell_radii": (2.0, 1.0)},
    ],
)
def test_settings_are_validated(kwargs: dict[str, object]) -> None:
    with pytest.raises(ValueError):
        _ = SolveSettings(**kwargs)  # pyright: ignore[reportArgumentType]


def test_linear_contraction_is_trivial_with_shell_search_enabled() -> None:
    p = validate_params(1.0, 0.5)
    outcome = picard_solve(p, parse("1", "t"), parse("u", "u"), 0.1, n=32)
    assert outcome.status is SolveStatus.TRIVIAL
    assert outcome.method == "picard"


def test_vanishing_profile_is_not_a_cone_member() -> None:
    member, margin = cone_membership(GridFunction.from_callable(32, lambda t: t), 0.5)
    assert not member
    assert margin == pytest.approx(-0.5)


def test_shell_history_records_image_norms() -> None:
    p = validate_params(2.0, 1.0 / 3.0)
    outcome = picard_solve(p, parse("1", "t"), parse(CASE1_F, "u"), 0.8)
    assert outcome.method == "shell" and outcome.scale is not None
    assert outcome.history and min(outcome.history) > 0.0
    closest = min(abs(norm - outcome.scale) for norm in outcome.history)
    assert closest <= 1e-6 * outcome.scale


@pytest.mark.parametrize("name", ["superlinear", "sublinear"])
def test_shipped_power_law_problems_solve(name: str) -> None:
    problem = load_problem(CONFIGS / f"{name}.json")
    assert problem.lam is not None
    outcome = picard_solve(
        problem.params,
        problem.a,
        problem.f,
        problem.lam,
        problem.solve,
        problem.quadrature,
        problem.grid_n,
    )

    assert outcome.status is SolveStatus.SOLVED
    assert outcome.verification is not None
    assert outcome.verification.bc_neumann <= 1e-6
    assert outcome.verification.bc_integral <= 1e-8


def test_operator_matches_adaptive_quadrature_to_tolerance() -> None:
    p = validate_params(2.0, 1.0 / 3.0)
    a = parse("1", "t")
    f = parse(CASE1_F, "u")
    u = GridFunction.from_callable(16, lambda t: 2.0 + np.cos(7.0 * t))
    seams = sorted({*u.t.tolist(), p.eta})
    reference_settings = QuadratureSettings(abs_tol=1e-13)
    reference = np.array(
        [
            integrate_split(
                lambda s, t=float(t): green(p, t, s) * f(float(np.interp(s, u.t, u.values))),
                0.0,
                1.0,
                seams,
                reference_settings,
            )
            for t in u.t
        ]
    )

    tight = apply_operator(p, a, f, 1.0, u, QuadratureSettings(abs_tol=1e-10))
    loose = apply_operator(p, a, f, 1.0, u, QuadratureSettings(abs_tol=1e-3))

    assert float(np.max(np.abs(tight.values - reference))) <= 1e-9
    assert float(np.max(np.abs(loose.values - reference))) > 1e-8


def test_operator_represents_the_linear_problem() -> None:
    rng = np.random.default_rng(7)
    p = validate_params(2.0, 0.25)
    f = parse("u*0+1", "u")
    for _ in range(10):
        c0, c1, c2 = rng.uniform(-1.0, 1.0, 3)
        c3 = rng.uniform(0.5, 1.0) * rng.choice([-1.0, 1.0])
        a = parse(f"{c0!r} + {c1!r}*t + {c2!r}*t^2 + {c3!r}*t^3", "t")
        residuals: list[float] = []
        for n in (200, 400):
            v = apply_operator(p, a, f, 1.0, GridFunction.from_callable(n, np.ones_like))
            report = verify(p, a, f, 1.0, v)
            residuals.append(report.ode_residual_sup)
            assert report.bc_neumann <= 1e-6
            assert report.bc_integral <= 1e-8
        assert residuals[0] <= 5e-4
        assert residuals[0] / residuals[1] >= 3.5


def test_operator_keeps_random_cone_members_in_the_cone() -> None:
    rng = np.random.default_rng(11)
    p = validate_params(2.0, 1.0 / 3.0)
    a = parse("1", "t")
    f = parse(CASE1_F, "u")
    cone_gamma = gamma(p)
    t = np.linspace(0.0, 1.0, 65)
    for _ in range(50):
        waves = sum(
            rng.uniform(-1.0, 1.0) * np.cos(k * np.pi * t) for k in range(1, 5)
        )
        shape = (waves - waves.min()) / (waves.max() - waves.min())
        u = grid_function(64, rng.uniform(0.1, 5.0) * (cone_gamma + (1.0 - cone_gamma) * shape))
        assert cone_membership(u, cone_gamma, p.eta)[1] >= -1e-12
        v = apply_operator(p, a, f, 0.8, u)
        _, margin = cone_membership(v, cone_gamma, p.eta)
        assert margin >= -1e-9


if __name__ == "__main__":
    _ = unittest.main()
