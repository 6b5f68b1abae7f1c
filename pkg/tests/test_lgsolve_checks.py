"""Tests for gradient, Darcy and map reconstruction checks"""

import math
import unittest
from unittest.mock import MagicMock, patch

import numpy as np

from src.config import SolveConfig
from src.errors import InvalidArgumentError, ResolutionError, StepSizeError
from src.lgsolve.channel_map import ChannelMap, MomentSet
from src.lgsolve.checks import (
    central_difference,
    check_darcy,
    check_gradients,
    check_map_reconstruction,
)
from src.lgsolve.solver import evolve
from src.trochoid import solution as trochoid
from src.trochoid.solution import TrochoidParams


class TestCentralDifference(unittest.TestCase):
    """Test cases for the Richardson-checked difference"""

    def test_smooth_function(self):
        """Test the extrapolated derivative of sin"""
        d = central_difference(math.sin, 0.3, 1e-3, 1e-3, "sin")
        self.assertAlmostEqual(d, math.cos(0.3), places=11)

    def test_step_too_large(self):
        """Test that disagreeing estimates raise"""
        with self.assertRaises(StepSizeError):
            central_difference(lambda x: math.sin(50 * x), 0.0, 0.05, 1e-3, "fast")


class TestGradients(unittest.TestCase):
    """Test cases for the gradient structure of F0"""

    def test_trochoid_gradients(self):
        """Test v_k = dF0/dt_k and the derivative relations on the trochoid"""
        params = TrochoidParams(R=1.0, r0=1.0, kappa=0.3)
        targets = MomentSet.targets(1.0, 1.0, 0.2, {1: params.t1})
        report = check_gradients(targets, SolveConfig(M=64), N=3, k_max=2)
        for key in ("v0", "v1", "v2", "first_derivative_relation", "homogeneity", "inverse_R_derivative"):
            self.assertIn(key, report.residuals)
            self.assertLess(report.residuals[key], 1e-5, key)
        self.assertLess(report.max_residual, 1e-5)
        # v0 agrees with the closed form
        self.assertAlmostEqual(report.values["v0"][0], trochoid.moments(params, 0.2).v0, places=9)

    def test_general_targets(self):
        """Test the gradient identities with two nonzero moments and r0 != 1"""
        targets = MomentSet.targets(1.0, 1.3, 0.1, {1: 0.1, 2: 0.03 - 0.01j})
        report = check_gradients(targets, SolveConfig(M=128), N=5, k_max=2)
        self.assertLess(report.max_residual, 1e-5)
        self.assertEqual(set(report.to_dict()), {"residuals", "values", "max_residual"})


class TestDarcy(unittest.TestCase):
    """Test cases for the normal velocity check"""

    def setUp(self):
        self.params = TrochoidParams(R=1.0, r0=1.0, kappa=0.3)
        self.cfg = SolveConfig(M=128, dt0=0.005)

    def test_trochoid_velocity(self):
        """Test V_n = R/(2|Z'|) along a trochoid march"""
        targets = MomentSet.targets(1.0, 1.0, 0.0, {1: self.params.t1})
        trajectory = evolve(targets, (0.0, 0.04), self.cfg, 4)
        report = check_darcy(trajectory, self.cfg)
        self.assertLess(report.max_deviation, 1e-4)
        self.assertLess(report.max_lg_residual, 1e-4)
        self.assertEqual(report.steps_checked, len(trajectory.steps) - 2)
        self.assertIsNotNone(report.deviation_coarse)

    def test_straight_velocity(self):
        """Test that the flat interface moves at R/(2R) = 1/2"""
        trajectory = evolve(MomentSet.targets(1.0, 1.0, 0.0, {}), (0.0, 0.02), self.cfg, 2)
        report = check_darcy(trajectory, self.cfg)
        self.assertLess(report.max_deviation, 1e-7)

    def test_too_few_steps(self):
        """Test that a two-step trajectory is rejected"""
        trajectory = evolve(MomentSet.targets(1.0, 1.0, 0.0, {}), (0.0, 0.005), self.cfg, 2)
        with self.assertRaises(InvalidArgumentError):
            check_darcy(trajectory, self.cfg)

    def test_lambda_half_window(self):
        """Test the N=12, M=512 march up to lambda = 0.5"""
        cfg = SolveConfig()
        start = trochoid.time_of_lambda(self.params, 0.49)
        end = trochoid.time_of_lambda(self.params, 0.5)
        targets = MomentSet.targets(1.0, 1.0, 0.0, {1: self.params.t1})
        seed = ChannelMap.from_trochoid(self.params, start, 12)
        trajectory = evolve(targets, (start, end), cfg, 12, seed=seed)
        report = check_darcy(trajectory, cfg)
        self.assertGreaterEqual(report.steps_checked, 20)
        self.assertLess(report.max_deviation, 1e-4)

    def test_near_cusp_window(self):
        """Test a fine-step window at lambda = 0.95 passes without a refinement error"""
        cfg = SolveConfig(dt0=1e-4)
        center = trochoid.time_of_lambda(self.params, 0.95)
        targets = MomentSet.targets(1.0, 1.0, 0.0, {1: self.params.t1})
        seed = ChannelMap.from_trochoid(self.params, center - 5e-4, 12)
        trajectory = evolve(targets, (center - 5e-4, center + 5e-4), cfg, 12, seed=seed)
        self.assertFalse(trajectory.singular)
        report = check_darcy(trajectory, cfg)
        self.assertLess(report.max_deviation, 1e-2)
        self.assertIsNotNone(report.time_step_error)


class TestDarcyRefinement(unittest.TestCase):
    """Test cases for the step refinement rule of the Darcy check"""

    def run_check(self, fine: float, coarse: float):
        trajectory = MagicMock(steps=[object()] * 9)
        deviations = [(fine, 0.0, 7), (coarse, 0.0, 3)]
        with patch("src.lgsolve.checks._darcy_deviation", side_effect=deviations):
            return check_darcy(trajectory, SolveConfig())

    def test_step_independent_deviation(self):
        """Test that agreeing step sizes pass even when the deviation is large"""
        report = self.run_check(6.27e-4, 5.82e-4)
        self.assertEqual(report.max_deviation, 6.27e-4)
        self.assertAlmostEqual(report.time_step_error, -1.5e-5)

    def test_quadratic_shrinkage(self):
        """Test that a fourfold larger coarse deviation passes"""
        report = self.run_check(1e-3, 4e-3)
        self.assertAlmostEqual(report.time_step_error, 1e-3)

    def test_growing_deviation(self):
        """Test that a deviation growing under refinement raises"""
        with self.assertRaises(ResolutionError):
            self.run_check(1e-3, 1e-4)

    def test_below_floor(self):
        """Test that tiny deviations are never rejected"""
        report = self.run_check(1e-8, 1e-10)
        self.assertEqual(report.deviation_coarse, 1e-10)


class TestMapReconstruction(unittest.TestCase):
    """Test cases for W(Z) rebuilt from second derivatives of F0"""

    def test_trochoid_reconstruction(self):
        """Test the truncated formula against inversion of the map"""
        params = TrochoidParams(R=1.0, r0=1.0, kappa=0.3)
        t0 = trochoid.time_of_lambda(params, 0.4)
        m = ChannelMap.from_trochoid(params, t0, 10)
        targets = MomentSet.targets(1.0, 1.0, t0, {1: params.t1})
        report = check_map_reconstruction(m, targets, SolveConfig(M=128), depth=1.5)
        self.assertLess(report.max_deviation, 1e-4)
        self.assertLess(report.tail_estimate, 1e-4)
        self.assertLess(report.leading_deviation, 1e-6)

    def test_default_depth_reconstruction(self):
        """Test the N=12 reconstruction at the default depth and resolution"""
        params = TrochoidParams(R=1.0, r0=1.0, kappa=0.3)
        t0 = trochoid.time_of_lambda(params, 0.4)
        m = ChannelMap.from_trochoid(params, t0, 12)
        targets = MomentSet.targets(1.0, 1.0, t0, {1: params.t1})
        report = check_map_reconstruction(m, targets, SolveConfig())
        self.assertLess(report.max_deviation, 1e-4)

    def test_straight_reconstruction(self):
        """Test W = Z/R - t0/(2R) on the flat interface"""
        m = ChannelMap.straight(1.0, 1.0, 2, 0.4)
        targets = MomentSet.targets(1.0, 1.0, 0.4, {})
        report = check_map_reconstruction(m, targets, SolveConfig(M=64))
        self.assertLess(report.max_deviation, 1e-8)
        self.assertAlmostEqual(report.leading_constant, -0.2, places=8)
        np.testing.assert_allclose(report.tail_estimate, 0.0, atol=1e-8)


if __name__ == "__main__":
    unittest.main()
