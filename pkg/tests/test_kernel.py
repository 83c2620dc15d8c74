from __future__ import annotations

import unittest

import numpy as np
import pytest

from conebvp.kernel import (
    Branch,
    BvpParams,
    ParameterRangeError,
    g_envelope,
    gamma,
    green,
    green_branch,
    green_matrix,
    kernel_seams,
    select_branch,
    validate_params,
)


class ValidateParamsTests(unittest.TestCase):
    def test_accepts_interior_values(self) -> None:
        self.assertEqual(validate_params(2, 0.25), BvpParams(alpha=2.0, eta=0.25))

    def test_rejects_eta_outside_unit_interval(self) -> None:
        for eta in (0.0, 1.0, -0.5, 1.5):
            with self.assertRaisesRegex(ParameterRangeError, "eta"):
                _ = validate_params(0.5, eta)

    def test_rejects_alpha_at_reciprocal_bound(self) -> None:
        with self.assertRaisesRegex(ParameterRangeError, "alpha"):
            _ = validate_params(2.0, 0.5)

    def test_rejects_nonpositive_alpha(self) -> None:
        with self.assertRaises(ParameterRangeError):
            _ = validate_params(0.0, 0.5)


class GreenTests(unittest.TestCase):
    def setUp(self) -> None:
        self.p = validate_params(1.0, 0.5)

    def test_known_values(self) -> None:
        self.assertAlmostEqual(green(self.p, 0.0, 0.0), 1.75)
        self.assertAlmostEqual(green(self.p, 1.0, 1.0), 0.0)
        self.assertAlmostEqual(green(self.p, 0.25, 0.75), 0.5)
        self.assertAlmostEqual(green(self.p, 0.75, 0.25), 0.9375)

    def test_branch_selection_order_on_seams(self) -> None:
        self.assertIs(select_branch(self.p, 0.3, 0.3), Branch.BELOW_BOTH)
        self.assertIs(select_branch(self.p, 0.2, 0.5), Branch.BETWEEN_T_AND_ETA)
        self.assertIs(select_branch(self.p, 0.8, 0.5), Branch.BELOW_BOTH)
        self.assertIs(select_branch(self.p, 0.8, 0.6), Branch.BETWEEN_ETA_AND_T)
        self.assertIs(select_branch(self.p, 0.6, 0.8), Branch.ABOVE_BOTH)

    def test_adjacent_branches_agree_on_seams(self) -> None:
        for t in (0.1, 0.3, 0.5, 0.7, 0.9):
            for first, second in (
                (Branch.BELOW_BOTH, Branch.BETWEEN_T_AND_ETA),
                (Branch.BETWEEN_ETA_AND_T, Branch.ABOVE_BOTH),
            ):
                self.assertAlmostEqual(
                    green_branch(self.p, first, t, t), green_branch(self.p, second, t, t)
                )

    def test_envelope_and_gamma(self) -> None:
        self.assertAlmostEqual(g_envelope(self.p, 0.0), 2.0)
        self.assertAlmostEqual(g_envelope(self.p, 1.0), 0.0)
        self.assertAlmostEqual(gamma(self.p), 0.5)

    def test_seams_are_sorted_and_deduplicated(self) -> None:
        self.assertEqual(kernel_seams(self.p, 0.5), [0.5])
        self.assertEqual(kernel_seams(self.p, 0.8), [0.5, 0.8])
        self.assertEqual(kernel_seams(self.p, 0.0), [0.5])


@pytest.mark.parametrize(("alpha", "eta"), [(2.0, 0.25), (2.0, 1.0 / 3.0), (1.0, 0.5), (0.1, 0.9)])
def test_matrix_matches_pointwise_and_satisfies_bounds(alpha: float, eta: float) -> None:
    p = validate_params(alpha, eta)
    axis = np.linspace(0.0, 1.0, 41)
    matrix = green_matrix(p, axis, axis)
    expected = np.array([[green(p, float(t), float(s)) for s in axis] for t in axis])

    np.testing.assert_allclose(matrix, expected, atol=1e-14)
    assert matrix.min() >= -1e-12
    envelope = np.array([g_envelope(p, float(s)) for s in axis])
    assert np.all(matrix <= envelope[None, :] + 1e-12)
    head = axis <= eta
    assert np.all(matrix[head] >= gamma(p) * envelope[None, :] - 1e-12)


def _violations(p: BvpParams, t: np.ndarray, s: np.ndarray, values: np.ndarray) -> float:
    envelope = (1.0 - s) / (1.0 - p.alpha * p.eta)
    worst = max(float(np.max(-values)), float(np.max(values - envelope)))
    head = t <= p.eta
    lower = gamma(p) * envelope - values
    if np.any(head):
        worst = max(worst, float(np.max(np.where(head, lower, -np.inf))))
    return worst


def test_inequalities_hold_for_random_parameters() -> None:
    rng = np.random.default_rng(20240607)
    axis = np.linspace(0.0, 1.0, 400)
    for _ in range(20):
        eta = float(rng.uniform(0.02, 0.98))
        alpha = float(rng.uniform(0.01, 0.99)) / eta
        p = validate_params(alpha, eta)

        matrix = green_matrix(p, axis, axis)
        assert _violations(p, axis[:, None], axis[None, :], matrix) <= 1e-12

        t_points = rng.uniform(0.0, 1.0, 10_000)
        s_points = rng.uniform(0.0, 1.0, 10_000)
        values = np.array(
            [green(p, float(t), float(s)) for t, s in zip(t_points, s_points)]
        )
        assert _violations(p, t_points, s_points, values) <= 1e-12


@pytest.mark.parametrize(("alpha", "eta"), [(1.0, 0.5), (2.0, 0.25), (2.0, 1.0 / 3.0)])
def test_branches_agree_on_the_eta_seam(alpha: float, eta: float) -> None:
    p = validate_params(alpha, eta)
    for t in np.linspace(0.0, 1.0, 11):
        if t <= eta:
            pair = (Branch.BETWEEN_T_AND_ETA, Branch.ABOVE_BOTH)
        else:
            pair = (Branch.BELOW_BOTH, Branch.BETWEEN_ETA_AND_T)
        first, second = (green_branch(p, branch, float(t), eta) for branch in pair)
        assert abs(first - second) <= 1e-12


@pytest.mark.parametrize(("alpha", "eta"), [(1.0, 0.5), (2.0, 0.25), (0.1, 0.9)])
def test_kernel_is_continuous_across_seams(alpha: float, eta: float) -> None:
    p = validate_params(alpha, eta)
    delta = 1e-8
    for t in (0.05, 0.2, 0.45, 0.6, 0.95):
        for seam in (t, eta):
            jump = abs(green(p, t, seam + delta) - green(p, t, seam - delta))
            assert jump <= 1e-6


if __name__ == "__main__":
    _ = unittest.main()
