"""Tests for channel maps, their moments and tau"""

import math
import unittest

import numpy as np

from src.errors import ConsistencyError, GeometryError, InvalidArgumentError, ResolutionError
from src.lgsolve.channel_map import (
    ChannelMap,
    MomentSet,
    check_injective,
    derivative_winding,
    eval_map,
    invert_map,
    moments_from_map,
    sample_contour,
)
from src.lgsolve.tau import tau_from_map, tau_from_moments
from src.trochoid import solution as trochoid
from src.trochoid.solution import TrochoidParams


class TestChannelMap(unittest.TestCase):
    """Test cases for map evaluation and geometry"""

    def test_straight_section(self):
        """Test that the flat map has X = t0/2 and Y = R sigma"""
        m = ChannelMap.straight(2.0, 1.0, 3, t0=0.6)
        s = sample_contour(m, 16)
        np.testing.assert_allclose(s.X, 0.3)
        np.testing.assert_allclose(s.Y, 2.0 * s.sigma, atol=1e-14)
        self.assertEqual(m.N, 3)

    def test_invalid_map(self):
        """Test parameter validation"""
        with self.assertRaises(InvalidArgumentError):
            ChannelMap(-1.0, 1.0, np.zeros(2))
        with self.assertRaises(InvalidArgumentError):
            ChannelMap(1.0, 0.0, np.zeros(2))
        with self.assertRaises(InvalidArgumentError):
            ChannelMap(1.0, 1.0, np.zeros(0))

    def test_trochoid_embedding(self):
        """Test that the embedded map traces the closed-form contour"""
        params = TrochoidParams(R=1.5, r0=1.0, kappa=0.3, Y0=0.2)
        m = ChannelMap.from_trochoid(params, 0.4, 5)
        s = sample_contour(m, 64)
        X, Y = trochoid.contour(params, 0.4, s.sigma)
        np.testing.assert_allclose(s.X, X, atol=1e-13)
        np.testing.assert_allclose(s.Y, Y, atol=1e-13)

    def test_invert_round_trip(self):
        """Test Newton inversion at interior points"""
        m = ChannelMap.from_trochoid(TrochoidParams(1.0, 1.0, 0.3), 0.2, 3)
        W = 0.8 + 1j * np.linspace(0, 2 * math.pi, 9)
        np.testing.assert_allclose(invert_map(m, eval_map(m, W)), W, atol=1e-12)

    def test_injectivity(self):
        """Test the cusp and the folded branch are rejected"""
        good = ChannelMap(1.0, 1.0, np.array([0.0, 0.5]))
        self.assertAlmostEqual(check_injective(sample_contour(good, 64), 1.0), 0.5)
        self.assertEqual(derivative_winding(sample_contour(good, 64)), 0)

        folded = ChannelMap(1.0, 1.0, np.array([0.0, 1.3]))
        self.assertEqual(abs(derivative_winding(sample_contour(folded, 64))), 1)
        with self.assertRaises(GeometryError):
            check_injective(sample_contour(folded, 64), 1.0)

        cusp = ChannelMap(1.0, 1.0, np.array([0.0, 1.0]))
        with self.assertRaises(GeometryError):
            check_injective(sample_contour(cusp, 64), 1.0)


class TestMoments(unittest.TestCase):
    """Test cases for moment quadrature"""

    def test_straight_moments(self):
        """Test t0, v0 and vanishing t_k, v_k of a flat interface"""
        R, r0, t0 = 1.0, 2.0, 0.5
        mom = moments_from_map(ChannelMap.straight(R, r0, 2, t0), M=32)
        self.assertAlmostEqual(mom.t0, t0, places=14)
        np.testing.assert_allclose(mom.t, 0, atol=1e-14)
        np.testing.assert_allclose(mom.v, 0, atol=1e-14)
        self.assertAlmostEqual(mom.v0, t0 * t0 / (2 * R) + 2 * t0 * math.log(r0), places=14)
        self.assertAlmostEqual(mom.v0_quadrature, mom.v0, places=14)

    def test_trochoid_moments(self):
        """Test quadrature moments against the closed form"""
        params = TrochoidParams(R=1.0, r0=1.3, kappa=0.3)
        for t0 in (0.0, 0.5, 1.0):
            with self.subTest(t0=t0):
                exact = trochoid.moments(params, t0)
                mom = moments_from_map(ChannelMap.from_trochoid(params, t0, 4), M=128)
                self.assertAlmostEqual(mom.t0, t0, places=12)
                self.assertAlmostEqual(abs(mom.tk(1) - exact.tk(1)), 0, places=12)
                np.testing.assert_allclose(mom.t[1:], 0, atol=1e-12)
                self.assertAlmostEqual(abs(mom.vk(1) - exact.vk(1)), 0, places=11)
                self.assertAlmostEqual(abs(mom.vk(2) - exact.vk(2)), 0, places=11)
                self.assertAlmostEqual(mom.v0, exact.v0, places=11)
                self.assertAlmostEqual(mom.v0_quadrature, exact.v0, places=11)
                self.assertAlmostEqual(mom.v0_imag, 0, places=12)

    def test_moment_arguments(self):
        """Test the K and M preconditions"""
        m = ChannelMap.straight(1.0, 1.0, 2, 0.0)
        with self.assertRaises(InvalidArgumentError):
            moments_from_map(m, K=5)
        with self.assertRaises(InvalidArgumentError):
            moments_from_map(m, K=4, M=8)

    def test_self_test_detects_coarse_grid(self):
        """Test that an under-resolved grid raises"""
        m = ChannelMap.from_trochoid(TrochoidParams(1.0, 1.0, 0.3), 1.35, 1)
        with self.assertRaises(ResolutionError):
            moments_from_map(m, K=2, M=10)

    def test_moment_set_helpers(self):
        """Test target construction and out-of-range lookups"""
        targets = MomentSet.targets(1.0, 1.0, 0.2, {2: 0.1j})
        self.assertEqual(targets.support, 2)
        self.assertEqual(targets.tk(1), 0)
        self.assertEqual(targets.tk(7), 0)
        self.assertEqual(targets.with_t0(0.5).t0, 0.5)
        with self.assertRaises(InvalidArgumentError):
            targets.tk(0)
        with self.assertRaises(InvalidArgumentError):
            MomentSet.targets(1.0, 1.0, 0.0, {0: 1.0})


class TestTau(unittest.TestCase):
    """Test cases for the tau-function of a map"""

    def test_straight_tau(self):
        """Test F0 = t0^3/(6R) + t0^2 log r0 with no harmonic moments"""
        R, r0, t0 = 2.0, 1.5, 0.7
        result = tau_from_map(ChannelMap.straight(R, r0, 2, t0), M=32)
        expected = t0**3 / (6 * R) + t0 * t0 * math.log(r0)
        self.assertAlmostEqual(result.F0, expected, places=13)
        self.assertAlmostEqual(result.F0_crosscheck, expected, places=13)
        self.assertAlmostEqual(result.F0_cutoff, expected, places=13)

    def test_trochoid_tau(self):
        """Test the three tau values against the closed form"""
        params = TrochoidParams(R=1.0, r0=1.0, kappa=0.3)
        for lam in (0.35, 0.6, 0.9):
            t0 = trochoid.time_of_lambda(params, lam)
            with self.subTest(lam=lam):
                m = ChannelMap.from_trochoid(params, t0, 4)
                result = tau_from_map(m, M=256)
                exact = trochoid.tau(params, t0)
                self.assertLess(abs(result.F0 - exact) / max(1.0, abs(exact)), 1e-10)
                self.assertLess(result.discrepancy, 1e-8)
                self.assertAlmostEqual(result.F0_cutoff, exact, places=9)
                self.assertLess(result.imag_linear, 1e-12)

    def test_tau_from_moments_closed_form_set(self):
        """Test the finite form on closed-form moments"""
        params = TrochoidParams(R=2.0, r0=1.2, kappa=0.25)
        mom = trochoid.moments(params, 0.3)
        self.assertAlmostEqual(tau_from_moments(mom, 1), trochoid.tau(params, 0.3), places=12)

    def test_strict_mismatch(self):
        """Test that disagreeing forms raise when strict"""
        m = ChannelMap.from_trochoid(TrochoidParams(1.0, 1.0, 0.3), 0.2, 2)
        mom = moments_from_map(m, M=64)
        mom.v[1] += 0.1
        with self.assertRaises(ConsistencyError):
            tau_from_map(m, M=64, moments=mom)
        self.assertGreater(tau_from_map(m, M=64, moments=mom, strict=False).discrepancy, 1e-6)


if __name__ == "__main__":
    unittest.main()
