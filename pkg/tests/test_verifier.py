from __future__ import annotations

import math
import unittest


from conebvp.exprlang import parse
from conebvp.kernel import validate_params
from conebvp.solver import GridFunction
from conebvp.verifier import (
    VerificationTolerances,
    default_tolerances,
    integral_to_eta,
    verify,
)

ETA = 0.3
# u = 1 - t^4/12 solves u'' + t^2 = 0, u'(0) = 0; alpha makes u(1) match the integral.
QUARTIC_ALPHA = (11.0 / 12.0) / (ETA - ETA**5 / 60.0)


def quartic(n: int) -> GridFunction:
    return GridFunction.from_callable(n, lambda t: 1.0 - t**4 / 12.0)


class VerifyTests(unittest.TestCase):
    def setUp(self) -> None:
        self.p = validate_params(QUARTIC_ALPHA, ETA)
        self.a = parse("t^2", "t")
        self.f = parse("u*0+1", "u")

    def test_manufactured_solution_passes(self) -> None:
        report = verify(self.p, self.a, self.f, 1.0, quartic(128))
        self.assertTrue(report.passed)
        self.assertLess(report.bc_integral, 1e-8)
        self.assertLess(report.bc_neumann, 1e-6)
        self.assertGreater(report.cone_margin, 0.0)

    def test_ode_residual_is_second_order(self) -> None:
        coarse = verify(self.p, self.a, self.f, 1.0, quartic(128)).ode_residual_sup
        fine = verify(self.p, self.a, self.f, 1.0, quartic(256)).ode_residual_sup
        self.assertAlmostEqual(coarse, (1.0 / 128.0) ** 2 / 6.0, delta=1e-9)
        self.assertAlmostEqual(coarse / fine, 4.0, delta=0.01)

    def test_wrong_lambda_fails_the_ode_check(self) -> None:
        report = verify(self.p, self.a, self.f, 2.0, quartic(128))
        self.assertFalse(report.passed)
        self.assertGreater(report.ode_residual_sup, 0.5)

    def test_negative_candidate_fails_the_cone_check(self) -> None:
        u = GridFunction.from_callable(64, lambda t: t - 0.5)
        report = verify(self.p, self.a, self.f, 1.0, u)
        self.assertLess(report.cone_margin, 0.0)
        self.assertFalse(report.passed)

    def test_evaluation_fault_makes_residual_infinite(self) -> None:
        u = GridFunction.from_callable(64, lambda t: t - 0.5)
        report = verify(self.p, self.a, parse("sqrt(u)", "u"), 1.0, u)
        self.assertEqual(report.ode_residual_sup, math.inf)
        self.assertFalse(report.passed)

    def test_explicit_tolerances_are_honoured(self) -> None:
        strict = VerificationTolerances(ode=1e-9)
        report = verify(self.p, self.a, self.f, 1.0, quartic(128), strict)
        self.assertFalse(report.passed)
        self.assertIs(report.tolerances, strict)


def test_neumann_estimate_follows_the_equation_at_zero() -> None:
    # u = 1 - t^3/6 solves u'' + t = 0 with u'(0) = 0 but u'''(0) != 0.
    p = validate_params((5.0 / 6.0) / (ETA - ETA**4 / 24.0), ETA)
    u = GridFunction.from_callable(128, lambda t: 1.0 - t**3 / 6.0)
    report = verify(p, parse("t", "t"), parse("u*0+1", "u"), 1.0, u)
    assert report.bc_neumann < 1e-10
    assert report.passed


def test_default_ode_tolerance_widens_on_coarse_grids() -> None:
    a = parse("t^2", "t")
    f = parse("u*0+1", "u")
    assert default_tolerances(1.0, a, f, quartic(200)).ode == 2e-4
    assert default_tolerances(1.0, a, f, quartic(100)).ode == 2e-4 * 4.0
    assert default_tolerances(1.0, a, f, quartic(400)).ode == 2e-4


def test_integral_to_eta_handles_partial_cells() -> None:
    u = GridFunction.from_callable(64, lambda t: 1.0 + t + t**2)
    for eta in (0.25, 0.3, 0.51, 1.0 / 3.0):
        exact = eta + eta**2 / 2.0 + eta**3 / 3.0
        assert abs(integral_to_eta(u, eta) - exact) < 1e-13


def test_integral_to_eta_inside_first_cell() -> None:
    u = GridFunction.from_callable(16, lambda t: 1.0 + t)
    assert abs(integral_to_eta(u, 0.01) - (0.01 + 0.01**2 / 2.0)) < 1e-14


if __name__ == "__main__":
    _ = unittest.main()
