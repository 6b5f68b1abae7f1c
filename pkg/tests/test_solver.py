"""Tests for the moment-conserving Newton solver and continuation"""

import math
import unittest
from unittest.mock import MagicMock

import numpy as np

from src.config import SolveConfig
from src.errors import GeometryError, InvalidArgumentError, NoConvergenceError, ResolutionError
from src.lgsolve.channel_map import ChannelMap, MomentSet, moments_from_map, sample_contour
from src.lgsolve.checks import large_R_trend
from src.lgsolve.refine import StepRefinementExhausted, is_refinable_error, retry_with_halving
from src.lgsolve.solver import (
    estimate_cusp_time,
    evolve,
    residual_and_jacobian,
    solve_cold,
    solve_for_moments,
)
from src.trochoid import solution as trochoid
from src.trochoid.solution import TrochoidParams


def contour_error(m: ChannelMap, params: TrochoidParams, t0: float, M: int = 128) -> float:
    exact = ChannelMap.from_trochoid(params, t0, m.N)
    return float(np.max(np.abs(sample_contour(m, M).Z - sample_contour(exact, M).Z)))


class TestNewton(unittest.TestCase):
    """Test cases for single solves"""

    def setUp(self):
        self.cfg = SolveConfig(M=128)
        self.params = TrochoidParams(R=1.0, r0=1.0, kappa=0.3)

    def test_jacobian_matches_differences(self):
        """Test the analytic Jacobian column by column"""
        m = ChannelMap(1.0, 1.2, np.array([0.1, 0.2 + 0.05j, 0.03 - 0.02j]))
        targets = MomentSet.targets(1.0, 1.2, 0.0, {1: 0.1, 2: 0.0})
        r, J = residual_and_jacobian(m, targets, 64)
        h = 1e-7
        N = m.N
        for col in range(2 * N + 1):
            u = m.u.copy()
            if col == 0:
                u[0] += h
            elif col <= N:
                u[col] += h
            else:
                u[col - N] += 1j * h
            r_h, _ = residual_and_jacobian(m.with_u(u), targets, 64, with_jacobian=False)
            np.testing.assert_allclose((r_h - r) / h, J[:, col], atol=1e-6)

    def test_zero_targets_stay_straight(self):
        """Test that t_k = 0 gives the flat interface"""
        m = solve_cold(MomentSet.targets(1.0, 1.0, 0.4, {}), 3, self.cfg)
        self.assertAlmostEqual(m.u[0].real, 0.2, places=12)
        np.testing.assert_allclose(m.u[1:], 0, atol=1e-12)

    def test_trochoid_targets(self):
        """Test that a cold solve recovers the trochoid"""
        t0 = 0.3
        targets = MomentSet.targets(1.0, 1.0, t0, {1: self.params.t1})
        m = solve_cold(targets, 4, self.cfg)
        self.assertLess(contour_error(m, self.params, t0), 1e-10)
        np.testing.assert_allclose(m.u[2:], 0, atol=1e-10)
        self.assertEqual(m.u[0].imag, 0.0)

    def test_two_moment_targets(self):
        """Test that a solve meets general targets"""
        targets = MomentSet.targets(1.0, 1.0, 0.1, {1: 0.15, 2: 0.04 + 0.02j})
        m = solve_cold(targets, 6, self.cfg)
        mom = moments_from_map(m, M=128)
        self.assertAlmostEqual(mom.t0, 0.1, places=11)
        self.assertAlmostEqual(abs(mom.tk(1) - 0.15), 0, places=11)
        self.assertAlmostEqual(abs(mom.tk(2) - (0.04 + 0.02j)), 0, places=11)
        np.testing.assert_allclose(mom.t[2:6], 0, atol=1e-11)

    def test_gauge(self):
        """Test that Im u0 is pinned to the configured gauge"""
        cfg = SolveConfig(M=128, gauge_im_u0=0.7)
        m = solve_cold(MomentSet.targets(1.0, 1.0, 0.0, {1: 0.2}), 3, cfg)
        self.assertEqual(m.u[0].imag, 0.7)

    def test_support_exceeds_truncation(self):
        """Test that targets beyond N are rejected"""
        seed = ChannelMap.straight(1.0, 1.0, 2, 0.0)
        with self.assertRaises(InvalidArgumentError):
            solve_for_moments(MomentSet.targets(1.0, 1.0, 0.0, {3: 0.1}), seed, self.cfg)

    def test_folded_seed(self):
        """Test that a non-injective seed is rejected"""
        seed = ChannelMap(1.0, 1.0, np.array([0.0, 1.3]))
        with self.assertRaises(GeometryError):
            solve_for_moments(MomentSet.targets(1.0, 1.0, 0.0, {1: 0.1}), seed, self.cfg)

    def test_config_validation(self):
        """Test solver setting checks"""
        with self.assertRaises(InvalidArgumentError):
            SolveConfig(M=100).validate(4)
        with self.assertRaises(InvalidArgumentError):
            SolveConfig(M=16).validate(4)
        with self.assertRaises(InvalidArgumentError):
            SolveConfig(dt0=0.0).validate(2)

    def test_large_R_limit(self):
        """Test v_k -> k r0^(2k) conj(t_k) as R grows"""
        deviations = large_R_trend({1: 0.05, 2: 0.02j}, [2.0, 8.0, 32.0], 1.0, 0.0, 4, self.cfg)
        self.assertTrue(all(b < a for a, b in zip(deviations, deviations[1:])))
        self.assertLess(deviations[-1], 0.5 * deviations[0])


class TestRefinement(unittest.TestCase):
    """Test cases for step halving"""

    def test_first_attempt_succeeds(self):
        """Test that no halving happens on success"""
        attempt = MagicMock(return_value="ok")
        self.assertEqual(retry_with_halving(attempt, 0.1, 3), ("ok", 0.1))
        attempt.assert_called_once_with(0.1)

    def test_halves_after_refinable_error(self):
        """Test retry with smaller steps"""
        attempt = MagicMock(side_effect=[NoConvergenceError("stall"), ResolutionError("coarse"), "ok"])
        on_retry = MagicMock()
        result, step = retry_with_halving(attempt, 0.4, 3, on_retry=on_retry)
        self.assertEqual((result, step), ("ok", 0.1))
        self.assertEqual(on_retry.call_count, 2)

    def test_exhausted(self):
        """Test the error after the last halving"""
        attempt = MagicMock(side_effect=GeometryError("fold"))
        with self.assertRaises(StepRefinementExhausted) as context:
            retry_with_halving(attempt, 1.0, 2)
        self.assertEqual(context.exception.step, 0.25)
        self.assertIsInstance(context.exception.last_error, GeometryError)
        self.assertEqual(attempt.call_count, 3)

    def test_non_refinable_propagates(self):
        """Test that other errors are not retried"""
        attempt = MagicMock(side_effect=InvalidArgumentError("bad"))
        with self.assertRaises(InvalidArgumentError):
            retry_with_halving(attempt, 1.0, 4)
        attempt.assert_called_once()
        self.assertFalse(is_refinable_error(ValueError("x")))
        self.assertTrue(is_refinable_error(NoConvergenceError("x")))


class TestEvolve(unittest.TestCase):
    """Test cases for continuation in t0"""

    def setUp(self):
        self.params = TrochoidParams(R=1.0, r0=1.0, kappa=0.3)

    def test_straight_evolution(self):
        """Test F0 = t0^3/(6R) along a flat run"""
        cfg = SolveConfig(M=64, dt0=0.05)
        trajectory = evolve(MomentSet.targets(1.0, 1.0, 0.0, {}), (0.0, 0.2), cfg, 2)
        self.assertEqual(len(trajectory.steps), 5)
        for step in trajectory.steps:
            self.assertAlmostEqual(step.tau.F0, step.t0**3 / 6, places=12)
        self.assertFalse(trajectory.singular)
        self.assertIsNone(trajectory.failure)

    def test_trochoid_evolution(self):
        """Test the march reproduces the trochoid and conserves t1"""
        cfg = SolveConfig(M=128, dt0=0.01)
        targets = MomentSet.targets(1.0, 1.0, 0.0, {1: self.params.t1})
        trajectory = evolve(targets, (0.0, 0.05), cfg, 4)
        self.assertEqual(len(trajectory.steps), 6)
        for step in trajectory.steps:
            self.assertLess(contour_error(step.map, self.params, step.t0), 1e-9)
            self.assertAlmostEqual(step.tau.F0, trochoid.tau(self.params, step.t0), places=9)
        self.assertLess(trajectory.max_drift(), 1e-9)
        self.assertLess(trajectory.gauge_drift(), 1e-12)
        record = trajectory.steps[-1].to_record()
        self.assertEqual(record["flags"], [])
        self.assertEqual(len(record["u_re"]), 5)

    def test_backward_march(self):
        """Test decreasing t0"""
        cfg = SolveConfig(M=64, dt0=0.1)
        trajectory = evolve(MomentSet.targets(1.0, 1.0, 0.0, {1: 0.2}), (0.3, 0.0), cfg, 2)
        np.testing.assert_allclose(trajectory.t0_values, [0.3, 0.2, 0.1, 0.0], atol=1e-12)

    def test_cusp_detection(self):
        """Test that the march stops at the cusp"""
        tc = trochoid.critical_time(self.params)
        cfg = SolveConfig(M=256, dt0=1e-3)
        targets = MomentSet.targets(1.0, 1.0, 0.0, {1: self.params.t1})
        trajectory = evolve(targets, (tc - 0.01, tc + 0.05), cfg, 2)
        self.assertTrue(trajectory.singular)
        self.assertLess(trajectory.steps[-1].t0, tc + 1e-12)
        self.assertIsNotNone(trajectory.cusp_time_estimate)
        self.assertLess(abs(trajectory.cusp_time_estimate - tc), 2 * cfg.dt0)

    def test_full_trochoid_run(self):
        """Test the N=12 march to 0.9 t_c"""
        tc = trochoid.critical_time(self.params)
        cfg = SolveConfig()
        targets = MomentSet.targets(1.0, 1.0, 0.0, {1: self.params.t1})
        trajectory = evolve(targets, (0.0, 0.9 * tc), cfg, 12)
        self.assertFalse(trajectory.singular)
        self.assertLess(trajectory.max_drift(), 1e-9)
        self.assertLess(trajectory.gauge_drift(), 1e-12)
        for step in trajectory.steps[::50]:
            self.assertLess(contour_error(step.map, self.params, step.t0, 512), 1e-8)
            exact = trochoid.tau(self.params, step.t0)
            self.assertLess(abs(step.tau.F0 - exact) / max(1.0, abs(exact)), 1e-8)
            self.assertLess(step.tau.discrepancy, 1e-6)

    def test_estimate_cusp_time(self):
        """Test linear extrapolation of min|Z'|^2"""
        a, b = MagicMock(t0=1.0, min_abs_zprime=math.sqrt(0.2)), MagicMock(t0=1.1, min_abs_zprime=math.sqrt(0.1))
        self.assertAlmostEqual(estimate_cusp_time([a, b]), 1.2)
        self.assertIsNone(estimate_cusp_time([a]))
        self.assertIsNone(estimate_cusp_time([b, a]))


if __name__ == "__main__":
    unittest.main()
