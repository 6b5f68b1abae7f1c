"""Tests for the exact identity checks"""

import unittest
from dataclasses import replace
from fractions import Fraction

from src.errors import InvalidArgumentError
from src.genfun.identities import (
    bridge_closed_form,
    check_bridge,
    check_cutjoin,
    check_euler,
    check_hirota,
)
from src.genfun.series import GradedSeries
from src.genfun.tau_series import TauSeries, build_F0


class TestIdentities(unittest.TestCase):
    """Test cases for Euler, cut-and-join, Hirota and bridge checks"""

    @classmethod
    def setUpClass(cls):
        cls.F0 = build_F0(4)
        cls.F0_wide = build_F0(2, nvars=3)

    def perturbed(self, F0: TauSeries) -> TauSeries:
        bump = GradedSeries.monomial(F0.D, Fraction(1, 7), qdeg=2, bdeg=1, t={1: 2}, tbar={2: 1}, nvars=F0.nvars)
        return replace(F0, series=F0.series + bump)

    def test_euler_holds(self):
        """Test q d/dq F0 = sum k t_k d/dt_k F0"""
        self.assertEqual(check_euler(self.F0), [])

    def test_euler_detects_ungraded_term(self):
        """Test that a term with t-weight != qdeg is reported"""
        bad = self.F0.series + GradedSeries.monomial(4, 1, qdeg=1, t={2: 1}, tbar={1: 1}, nvars=4)
        violations = check_euler(bad)
        self.assertEqual(len(violations), 1)
        self.assertEqual(violations[0].key, "q*t2*tb1")
        self.assertEqual(violations[0].to_dict()["lhs"], "1")

    def test_cutjoin_holds(self):
        """Test the cut-and-join flow through q^4"""
        self.assertEqual(check_cutjoin(self.F0), [])

    def test_cutjoin_full_holds(self):
        """Test the complete beta-flow with the t0 polynomial parts"""
        self.assertEqual(check_cutjoin(self.F0, full=True), [])

    def test_cutjoin_detects_perturbation(self):
        """Test that a changed coefficient breaks cut-and-join"""
        violations = check_cutjoin(self.perturbed(self.F0))
        self.assertTrue(violations)
        self.assertTrue(all(v.identity == "cutjoin" for v in violations))

    def test_cutjoin_full_detects_wrong_cubic(self):
        """Test that the t0^3 part is checked"""
        violations = check_cutjoin(replace(self.F0, cubic=Fraction(1, 3)), full=True)
        self.assertEqual([v.key for v in violations], ["t0^3"])

    def test_cutjoin_needs_enough_variables(self):
        """Test nvars >= D"""
        s = GradedSeries.monomial(3, 1, qdeg=1, t={1: 1}, tbar={1: 1}, nvars=2)
        with self.assertRaises(InvalidArgumentError):
            check_cutjoin(s)

    def test_hirota_holds(self):
        """Test both Hirota equations at q^2, z-orders 3"""
        self.assertEqual(check_hirota(self.F0_wide, 3, 3), [])
        self.assertEqual(check_hirota(self.F0_wide, 2, 1), [])

    def test_hirota_holds_degree_three(self):
        """Test both Hirota equations at q^3, z-orders 4"""
        self.assertEqual(check_hirota(build_F0(3, nvars=4), 4, 4), [])

    def test_hirota_detects_perturbation(self):
        """Test that a wrong coefficient is reported"""
        violations = check_hirota(self.perturbed(self.F0_wide), 3, 3)
        self.assertTrue(violations)

    def test_hirota_detects_wrong_cubic(self):
        """Test that the cubic term enters the second equation"""
        violations = check_hirota(replace(self.F0_wide, cubic=Fraction(1, 5)), 2, 2)
        self.assertIn(("hirota2", "t0^3"), [(v.identity, v.key) for v in violations])

    def test_hirota_orders(self):
        """Test z-order validation"""
        with self.assertRaises(InvalidArgumentError):
            check_hirota(self.F0_wide, 0, 2)
        with self.assertRaises(InvalidArgumentError):
            check_hirota(self.F0_wide, 4, 2)

    def test_bridge_holds(self):
        """Test the t1^d tbar1^d coefficients against both closed forms"""
        self.assertEqual(check_bridge(self.F0, order=6), [])

    def test_bridge_closed_form(self):
        """Test d^(d-3)/d! for small d"""
        self.assertEqual(
            [bridge_closed_form(d) for d in range(1, 6)],
            [Fraction(1), Fraction(1, 4), Fraction(1, 6), Fraction(1, 6), Fraction(5, 24)],
        )

    def test_bridge_detects_perturbation(self):
        """Test that a wrong diagonal coefficient is reported"""
        bump = GradedSeries.monomial(4, 1, qdeg=2, bdeg=2, t={1: 2}, tbar={1: 2}, nvars=4)
        violations = check_bridge(self.F0.series + bump, order=3)
        self.assertEqual([v.key for v in violations], ["hurwitz d=2 b^2"])


if __name__ == "__main__":
    unittest.main()
