"""Unit tests for Cramer functions, feasibility predicates and region curves"""
import math
import unittest

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.analysis.cramer import (CramerFn, chernoff_tail, cramer_closed_arikan, cramer_eval)
from src.analysis.curves import arikan_pair, rs_beta_intercept, rs_family
from src.analysis.feasibility import feasible_thm5, feasible_thm6, thm5_margin
from src.analysis.region import (hull_check, lower_hull, q_point, region_boundary, region_hull,
                                 region_intercepts)
from src.analysis.rs_bound import (RSCramerBound, choose_rs_parameters, in_triangle, rs_bound,
                                   rs_ystar)
from src.models.dice import DiceDistribution
from src.models.tradeoff_region import TradeoffRegion
from src.utils.errors import InfeasibleTargetError, ValidationError

ARIKAN = DiceDistribution.from_partial_distances([1, 2])
BEC_MU = 3.627
BDMC_MU = 4.714


@pytest.mark.unit
class TestDice(unittest.TestCase):
    """Test dice construction"""

    def test_merges_and_drops(self):
        """Test duplicate atoms merge and zero-probability atoms vanish"""
        dice = DiceDistribution([0.0, 1.0, 1.0, 2.0], [0.5, 0.25, 0.25, 0.0])
        self.assertEqual(dice.values.tolist(), [0.0, 1.0])
        self.assertEqual(dice.probs.tolist(), [0.5, 0.5])
        self.assertAlmostEqual(dice.mean, 0.5)

    def test_validation(self):
        """Test negative values and bad probability vectors"""
        with self.assertRaises(ValidationError):
            DiceDistribution([-1.0], [1.0])
        with self.assertRaises(ValidationError):
            DiceDistribution([0.0, 1.0], [0.5, 0.6])
        with self.assertRaises(ValidationError):
            DiceDistribution([], [])

    def test_reed_solomon(self):
        """Test the uniform dice on log 1..log l"""
        dice = DiceDistribution.reed_solomon(4)
        self.assertEqual(dice.p_zero, 0.25)
        self.assertAlmostEqual(dice.mean, math.log(24) / 4)
        self.assertAlmostEqual(dice.prob_below(math.log(2.5)), 0.5)


@pytest.mark.unit
class TestCramer(unittest.TestCase):
    """Test the Cramer function of finite dice"""

    def test_arikan_closed_form(self):
        """Test Lambda*(beta log 2)/log 2 against the binary entropy form"""
        betas = np.linspace(0.0, 0.5, 51)
        numeric = cramer_eval(ARIKAN, betas * math.log(2)) / math.log(2)
        closed = cramer_closed_arikan(betas)
        self.assertLessEqual(float(np.max(np.abs(numeric - closed))), 1e-6)

    def test_boundary_values(self):
        """Test Lambda* below min, at min and above the mean"""
        fn = CramerFn(ARIKAN)
        self.assertAlmostEqual(fn(0.0), math.log(2), places=12)
        self.assertEqual(fn(1.0), 0.0)
        self.assertIsInstance(fn(0.2), float)
        rs = CramerFn(DiceDistribution.reed_solomon(8))
        self.assertAlmostEqual(rs(0.0), math.log(8), places=12)

    def test_rejects_negative(self):
        """Test y < 0 and beta outside [0, 1] are rejected"""
        with self.assertRaises(ValidationError):
            cramer_eval(ARIKAN, -0.1)
        with self.assertRaises(ValidationError):
            cramer_closed_arikan(1.5)

    def test_closed_form_beyond_half(self):
        """Test the closed form vanishes from beta = 1/2 on"""
        self.assertEqual(cramer_closed_arikan(0.7), 0.0)
        self.assertAlmostEqual(cramer_closed_arikan(0.0), 1.0)

    def test_chernoff_tail(self):
        """Test exp(-n Lambda*) and its argument check"""
        self.assertAlmostEqual(chernoff_tail(ARIKAN, 10, 0.0), 2.0 ** -10, places=14)
        self.assertEqual(chernoff_tail(ARIKAN, 5, 1.0), 1.0)
        with self.assertRaises(ValidationError):
            chernoff_tail(ARIKAN, 0, 0.1)

    @given(st.floats(min_value=0.0, max_value=0.49))
    @settings(max_examples=40, deadline=None)
    def test_monotone_decreasing(self, beta):
        """Test Lambda* is nonincreasing up to the mean"""
        fn = CramerFn(ARIKAN)
        y = beta * math.log(2)
        self.assertGreaterEqual(fn(y) + 1e-9, fn(y + 0.01 * math.log(2)))


@pytest.mark.unit
class TestFeasibility(unittest.TestCase):
    """Test the single- and two-kernel predicates"""

    def test_arikan_points(self):
        """Test feasible and infeasible targets for the Arikan kernel at mu* = 3.627"""
        for beta_p, inv_mu in ((0.45, 0.005), (0.49, 1e-4), (0.3, 0.05)):
            with self.subTest(point=(beta_p, inv_mu)):
                self.assertTrue(feasible_thm5(ARIKAN, 2, BEC_MU, beta_p, 1.0 / inv_mu))
        for beta_p, inv_mu in ((0.45, 0.01), (0.6, 0.1), (0.1, 0.3)):
            with self.subTest(point=(beta_p, inv_mu)):
                self.assertFalse(feasible_thm5(ARIKAN, 2, BEC_MU, beta_p, 1.0 / inv_mu))

    def test_identity_fails_precondition(self):
        """Test P{Y=0} = 1 fails regardless of the target"""
        identity = DiceDistribution([0.0], [1.0])
        verdict = feasible_thm5(identity, 2, BEC_MU, 0.0, 100.0)
        self.assertFalse(verdict.p0_ok)
        self.assertFalse(verdict.feasible)

    def test_nonpositive_denominator(self):
        """Test mu' <= mu* gives a -inf margin"""
        self.assertEqual(thm5_margin(ARIKAN, 2, BEC_MU, 0.1, 3.0), -math.inf)

    def test_argument_validation(self):
        """Test mu' <= 0 and beta' < 0 are rejected"""
        with self.assertRaises(ValidationError):
            feasible_thm5(ARIKAN, 2, BEC_MU, 0.1, 0.0)
        with self.assertRaises(ValidationError):
            feasible_thm5(ARIKAN, 2, BEC_MU, -0.1, 10.0)

    def test_two_kernel_precondition(self):
        """Test the rate-kernel precondition gates the two-kernel verdict"""
        rs16 = DiceDistribution.reed_solomon(16)
        ok = feasible_thm6(rs16, 16, 2.1, 0.1, 10.0)
        self.assertTrue(ok.feasible)
        gated = feasible_thm6(rs16, 16, 2.1, 0.1, 10.0, rat_precondition=False)
        self.assertFalse(gated.feasible)
        self.assertEqual(gated.margin, ok.margin)

    @given(st.floats(min_value=0.0, max_value=0.7), st.floats(min_value=1e-3, max_value=0.45))
    @settings(max_examples=40, deadline=None)
    def test_single_kernel_graft_matches(self, beta_p, inv_mu):
        """Test one Arikan kernel as both rate and error kernel gives the single-kernel verdict"""
        mu_p = 1.0 / inv_mu
        single = feasible_thm5(ARIKAN, 2, BEC_MU, beta_p, mu_p, pi_grid_size=128)
        rate_ok = ARIKAN.p_zero < 2 ** (-1.0 / BEC_MU)
        grafted = feasible_thm6(ARIKAN, 2, BEC_MU, beta_p, mu_p, rat_precondition=rate_ok,
                                pi_grid_size=128)
        self.assertEqual(grafted.feasible, single.feasible)
        self.assertEqual(grafted.margin, single.margin)
        self.assertEqual(grafted.p0_ok, single.p0_ok)


@pytest.mark.unit
class TestRegion(unittest.TestCase):
    """Test region boundaries"""

    def test_intercepts(self):
        """Test (beta*, 0) and (0, 1/mu*)"""
        beta, inv_mu = region_intercepts(ARIKAN, 2, BEC_MU)
        self.assertAlmostEqual(beta, 0.5)
        self.assertAlmostEqual(inv_mu, 1 / BEC_MU)

    def test_q_point(self):
        """Test the ray passes through both endpoints"""
        self.assertEqual(q_point(0.0, 0.2, 10.0, BEC_MU), (0.2, 0.1))
        x, y = q_point(1.0, 0.2, 10.0, BEC_MU)
        self.assertAlmostEqual(y, 0.0)

    def test_boundary_endpoints(self):
        """Test the scanned boundary meets both axes at the intercepts"""
        for mu in (BEC_MU, BDMC_MU):
            with self.subTest(mu_star=mu):
                region = region_boundary(ARIKAN, 2, mu, beta_grid=np.linspace(0.0, 0.5, 11))
                self.assertAlmostEqual(region.inv_mu_intercept, 1 / mu, places=6)
                self.assertEqual(region.inv_mus[-1], 0.0)
                self.assertEqual(region.method, "predicate-scan")
                self.assertTrue(np.all(np.diff(region.inv_mus) <= 1e-9))
                self.assertEqual(len(region), 11)

    def test_identity_region_rejected(self):
        """Test a non-powerful kernel has no region"""
        with self.assertRaises(InfeasibleTargetError):
            region_boundary(DiceDistribution([0.0], [1.0]), 2, BEC_MU)

    def test_lower_hull(self):
        """Test the lower chain of a simple point cloud"""
        points = np.array([[0.0, 1.0], [0.5, 0.2], [1.0, 0.0], [0.5, 0.9]])
        chain = lower_hull(points)
        self.assertEqual(chain[:, 0].tolist(), [0.0, 0.5, 1.0])

    def test_region_model(self):
        """Test interpolation and sup-distance"""
        a = TradeoffRegion("a", [0.0, 0.5], [0.2, 0.0], "hull", 2, 5.0)
        b = TradeoffRegion("b", [0.0, 0.5], [0.25, 0.0], "hull", 2, 5.0)
        self.assertAlmostEqual(a.at(0.25), 0.1)
        self.assertEqual(a.at(0.9), 0.0)
        self.assertAlmostEqual(a.sup_distance(b), 0.05)
        self.assertEqual(a.rows()[0][0], "a")
        self.assertEqual(a.beta_intercept, 0.0)
        flat = TradeoffRegion("flat", [0.0, 0.5], [0.0, 0.0], "hull", 2, 5.0)
        self.assertIsNone(flat.beta_intercept)

    @pytest.mark.slow
    def test_hull_agrees_with_scan(self):
        """Test the two boundary constructions agree on the Arikan kernel"""
        for mu in (BEC_MU, BDMC_MU):
            with self.subTest(mu_star=mu):
                self.assertLessEqual(hull_check(ARIKAN, 2, mu), 1e-3)

    def test_hull_endpoints(self):
        """Test the hull boundary starts at 1/mu* and ends at zero"""
        hull = region_hull(ARIKAN, 2, BEC_MU)
        self.assertAlmostEqual(hull.inv_mu_intercept, 1 / BEC_MU, places=9)
        self.assertAlmostEqual(hull.inv_mus[-1], 0.0, places=9)


@pytest.mark.unit
class TestReedSolomonBounds(unittest.TestCase):
    """Test the Reed-Solomon closed forms and parameter search"""

    def test_ystar(self):
        """Test the root of the closed-form bound"""
        self.assertAlmostEqual(rs_ystar(16), 1.17736, places=4)
        self.assertAlmostEqual(rs_bound(16, rs_ystar(16)), 0.0, places=12)
        with self.assertRaises(ValidationError):
            rs_ystar(6)

    def test_beta_intercepts(self):
        """Test log(l!)/(l log l)"""
        self.assertAlmostEqual(rs_beta_intercept(1), 0.5, places=12)
        self.assertAlmostEqual(rs_beta_intercept(2), 0.57312, places=5)

    def test_closed_form_is_lower_bound(self):
        """Test the closed form stays below the exact Cramer function"""
        for ell in (16, 64):
            exact = CramerFn(DiceDistribution.reed_solomon(ell))
            ys = np.linspace(0.0, rs_ystar(ell), 25)
            with self.subTest(ell=ell):
                self.assertTrue(np.all(rs_bound(ell, ys) <= exact(ys) + 1e-9))

    def test_certified_bound_below_exact(self):
        """Test the certified bound never exceeds the exact Cramer function"""
        ell = 1024
        exact = CramerFn(DiceDistribution.reed_solomon(ell))
        bound = RSCramerBound(ell)
        ys = np.linspace(0.0, exact.mean, 30)
        self.assertTrue(np.all(bound(ys) <= exact(ys) + 1e-9))

    def test_triangle(self):
        """Test strict triangle membership"""
        self.assertTrue(in_triangle(0.1, 0.1))
        self.assertFalse(in_triangle(0.6, 0.45))
        self.assertFalse(in_triangle(0.0, 0.1))

    def test_outside_triangle_rejected(self):
        """Test points outside the triangle are rejected before any search"""
        with self.assertRaises(InfeasibleTargetError) as ctx:
            choose_rs_parameters(0.6, 1 / 0.45, 2.1)
        self.assertIn("not strictly inside the triangle", str(ctx.exception))

    @pytest.mark.slow
    def test_choose_parameters(self):
        """Test feasible points find a k and far points exhaust the search"""
        for beta_p, inv_mu in ((0.1, 0.1), (0.33, 0.1), (0.6, 0.1), (0.1, 0.33)):
            with self.subTest(point=(beta_p, inv_mu)):
                choice = choose_rs_parameters(beta_p, 1.0 / inv_mu, 2.1)
                self.assertGreater(choice.margin, 0.0)
                self.assertEqual(choice.ell, 2 ** choice.k)
        with self.assertRaises(InfeasibleTargetError) as ctx:
            choose_rs_parameters(0.33, 1.0 / 0.33, 2.1)
        self.assertIn("no k <= 30", str(ctx.exception))


@pytest.mark.unit
class TestCurves(unittest.TestCase):
    """Test the named curve sets"""

    def test_arikan_pair(self):
        """Test the current and reference curves"""
        grid = np.linspace(0.0, 0.5, 6)
        current, reference = arikan_pair(BEC_MU, beta_grid=grid)
        self.assertAlmostEqual(current.inv_mu_intercept, 1 / BEC_MU, places=6)
        self.assertAlmostEqual(reference.inv_mu_intercept, 1 / (BEC_MU + 1), places=6)
        self.assertTrue(np.all(reference.inv_mus <= current.inv_mus + 1e-9))

    def test_rs_family_first_member_is_arikan(self):
        """Test the k = 1 member coincides with the Arikan curve"""
        grid = np.linspace(0.0, 0.5, 6)
        family = rs_family((1, 2), beta_grid=grid)
        arikan = region_boundary(ARIKAN, 2, BEC_MU, beta_grid=grid)
        np.testing.assert_allclose(family[0].inv_mus, arikan.inv_mus, atol=1e-12)
        self.assertAlmostEqual(family[1].inv_mu_intercept, 1 / BEC_MU, places=6)


if __name__ == '__main__':
    unittest.main()
