"""Unit tests for the selection templates, certificates and exponent estimates"""
import math
import unittest
from fractions import Fraction

import numpy as np
import pandas as pd
import pytest

from src.construction.code_parameters import code_rate_exact, error_bound
from src.construction.grafting import build_grafted_tree
from src.construction.tree_builder import perfect_tree
from src.core.field import default_field
from src.kernels.kernel import arikan_kernel, identity_kernel, kernel_load
from src.models.channel_tree import POWER
from src.models.erasure_channel import ErasureChannel
from src.models.selection import RoundRecord, SelectionDiagnostics, SelectionParams
from src.selection.certificates import (certify_disposable, certify_grafted, certify_recyclable,
                                        verify_disjoint)
from src.selection.disposable import disposable_params, retain_limit, select_disposable
from src.selection.exponents import (empirical_exponents, error_exponent_trend,
                                     fit_scaling_slope, scaling_trend)
from src.selection.grafted import select_on_grafted
from src.selection.mu_estimator import MU_COLUMNS, estimate_mu_star, mu_from_gap
from src.selection.recyclable import recyclable_params, select_recyclable
from src.selection.threshold import quasi_polynomial_ln_threshold, select_threshold
from src.selection.training import descendants_at_depth, measure, window_walk
from src.storage.presets import get_kernel
from src.utils.errors import InfeasibleTargetError, InvariantViolation, ValidationError

BEC_MU = 3.627


def binary_channel(eps):
    return ErasureChannel(default_field(2), eps)


@pytest.mark.unit
class TestThreshold(unittest.TestCase):
    """Test threshold selection"""

    def setUp(self):
        """Set up test fixtures"""
        self.tree = perfect_tree(binary_channel(0.5), arikan_kernel(), 2)

    def test_cutoffs(self):
        """Test linear and log cutoffs"""
        self.assertEqual(select_threshold(self.tree, threshold=0.5).tolist(), [5, 6])
        self.assertEqual(select_threshold(self.tree, ln_threshold=math.log(0.1)).tolist(), [6])

    def test_extreme_cutoffs(self):
        """Test cutoffs >= 1 keep everything and <= 0 keep nothing"""
        self.assertEqual(select_threshold(self.tree, threshold=1.0).tolist(), [3, 4, 5, 6])
        self.assertEqual(select_threshold(self.tree, threshold=0.0).size, 0)

    def test_argument_check(self):
        """Test exactly one cutoff must be given"""
        with self.assertRaises(ValidationError):
            select_threshold(self.tree)
        with self.assertRaises(ValidationError):
            select_threshold(self.tree, threshold=0.5, ln_threshold=-1.0)

    def test_default_cutoff(self):
        """Test exp(-n^(2/3))"""
        self.assertAlmostEqual(quasi_polynomial_ln_threshold(8), -4.0)


@pytest.mark.unit
class TestTraining(unittest.TestCase):
    """Test the shared train-and-retain helpers"""

    def setUp(self):
        """Set up test fixtures"""
        self.tree = perfect_tree(binary_channel(0.5), arikan_kernel(), 3)

    def test_measure(self):
        """Test exact measures"""
        self.assertEqual(measure(self.tree, self.tree.leaves), Fraction(1))
        self.assertEqual(measure(self.tree, np.array([1])), Fraction(1, 2))
        self.assertEqual(measure(self.tree, np.array([], dtype=np.int64)), Fraction(0))

    def test_descendants_at_depth(self):
        """Test inclusive descendants at a kernel depth"""
        self.assertEqual(descendants_at_depth(self.tree, np.array([2]), 2).tolist(), [5, 6])
        self.assertEqual(descendants_at_depth(self.tree, np.array([2]), 1).tolist(), [2])

    def test_window_walk(self):
        """Test anchors and dice sums of a window"""
        leaf = int(self.tree.leaves[-1])  # good, good, good
        anchors, sums, hit = window_walk(self.tree, np.array([leaf]), 1, math.log(0.9))
        self.assertEqual(anchors.tolist(), [2])
        self.assertAlmostEqual(sums[0], 2 * math.log(2))
        self.assertFalse(hit[0])
        _, _, hit_root = window_walk(self.tree, np.array([leaf]), 0, math.log(0.4))
        self.assertTrue(hit_root[0])


@pytest.mark.unit
class TestSelectionModels(unittest.TestCase):
    """Test parameter validation and diagnostic identities"""

    def test_params_validation(self):
        """Test unknown modes, bad eps and missing disposable fields"""
        with self.assertRaises(ValidationError):
            SelectionParams(n=4, s=2, mode="greedy", eps=0.1, ln_delta=-1.0)
        with self.assertRaises(ValidationError):
            SelectionParams(n=4, s=2, mode="recyclable", eps=1.5, ln_delta=-1.0)
        with self.assertRaises(ValidationError):
            SelectionParams(n=4, s=2, mode="recyclable", eps=0.1, ln_delta=0.5)
        with self.assertRaises(ValidationError):
            SelectionParams(n=4, s=2, mode="disposable", eps=0.1, ln_delta=-1.0)

    def test_default_recruit_exponent(self):
        """Test 2/3 for recyclable and 1/3 for disposable"""
        rec = SelectionParams(n=4, s=2, mode="recyclable", eps=0.1, ln_delta=-1.0)
        self.assertAlmostEqual(rec.recruit_exponent, 2.0 / 3.0)
        dis = SelectionParams(n=4, s=2, mode="disposable", eps=0.1, ln_delta=-1.0, beta_p=0.1,
                              mu_p=5.0, mu_star=BEC_MU, n_rat=3)
        self.assertAlmostEqual(dis.recruit_exponent, 1.0 / 3.0)

    def test_diagnostics_verify(self):
        """Test a broken partition is reported"""
        half = Fraction(1, 2)
        quarter = Fraction(1, 4)
        diag = SelectionDiagnostics("recyclable", half)
        diag.rounds.append(RoundRecord(2, half, half, quarter, 0, quarter, quarter, quarter))
        diag.verify()
        diag.rounds.append(RoundRecord(4, half, quarter, 0, 0, 0, quarter, quarter))
        with self.assertRaises(InvariantViolation):
            diag.verify()

    def test_retain_limit(self):
        """Test n beta' log l + (n - m) eps"""
        params = SelectionParams(n=16, s=4, mode="disposable", eps=0.1, ln_delta=-1.0,
                                 beta_p=0.05, mu_p=5.0, mu_star=BEC_MU, n_rat=12)
        self.assertAlmostEqual(retain_limit(params, 2, 4), 16 * 0.05 * math.log(2) + 1.2)


@pytest.mark.unit
class TestRecyclable(unittest.TestCase):
    """Test the recyclable template on the Arikan kernel"""

    def setUp(self):
        """Set up test fixtures"""
        self.T = arikan_kernel()
        self.W = binary_channel(0.5)

    def test_depth_sixteen(self):
        """Test selection, diagnostics and certificates at n = 16"""
        params = recyclable_params(self.T, 16, BEC_MU)
        self.assertEqual(params.s, 4)
        tree = perfect_tree(self.W, self.T, 16)
        A, diag = select_recyclable(self.W, self.T, params, tree=tree)
        self.assertEqual([r.m for r in diag.rounds], [4, 8, 12])
        self.assertTrue(np.all(tree.depth[A] == 16))
        self.assertTrue(np.all(tree.n_children[A] == 0))
        self.assertEqual(code_rate_exact(tree, A), diag.retained_measure)
        self.assertEqual(certify_recyclable(tree, A, params), A.size)
        self.assertTrue(verify_disjoint(tree, diag.retained))
        for r in diag.rounds:
            self.assertEqual(r.c + r.d + r.e, r.b)

    def test_degenerate_channel(self):
        """Test a nearly useless channel recruits nothing"""
        params = recyclable_params(self.T, 4, BEC_MU)
        A, diag = select_recyclable(binary_channel(0.999), self.T, params)
        self.assertEqual(A.size, 0)
        self.assertTrue(all(r.note == "empty recruit" for r in diag.rounds))

    def test_no_round_fits(self):
        """Test n = 1 has no recruit round"""
        params = recyclable_params(self.T, 1, BEC_MU)
        A, diag = select_recyclable(self.W, self.T, params)
        self.assertEqual(A.size, 0)
        self.assertTrue(diag.notes)

    def test_identity_infeasible(self):
        """Test the identity kernel fails the precondition"""
        T = identity_kernel(default_field(2), 2)
        params = SelectionParams(n=4, s=2, mode="recyclable", eps=0.1, ln_delta=-1.0,
                                 mu_star=BEC_MU)
        with self.assertRaises(InfeasibleTargetError):
            select_recyclable(self.W, T, params)


@pytest.mark.unit
class TestDisposable(unittest.TestCase):
    """Test the disposable template on the Arikan kernel"""

    def setUp(self):
        """Set up test fixtures"""
        self.T = arikan_kernel()
        self.W = binary_channel(0.5)

    def test_depth_sixteen(self):
        """Test rounds 4, 8, 12 with n_rat = 12"""
        params = disposable_params(self.T, 16, BEC_MU, 0.05, 5.0)
        self.assertEqual(params.n_rat, 12)
        tree = perfect_tree(self.W, self.T, 16)
        A, diag = select_disposable(self.W, self.T, params, tree=tree)
        self.assertEqual([r.m for r in diag.rounds], [4, 8, 12])
        self.assertEqual(certify_disposable(tree, A, params), A.size)
        self.assertTrue(verify_disjoint(tree, diag.recruits))
        last = diag.rounds[-1]
        self.assertEqual(last.f, diag.capacity - last.a0)
        self.assertLessEqual(math.exp(error_bound(tree, A)) if A.size else 0.0, 1.0)

    def test_infeasible_before_building(self):
        """Test an infeasible target is rejected before any tree is built"""
        params = SelectionParams(n=16, s=4, mode="disposable", eps=0.1, ln_delta=-5.0,
                                 beta_p=0.6, mu_p=5.0, mu_star=BEC_MU, n_rat=12)
        with self.assertRaises(InfeasibleTargetError):
            select_disposable(self.W, self.T, params, budget=10)
        with self.assertRaises(InfeasibleTargetError):
            disposable_params(self.T, 16, BEC_MU, 0.6, 5.0)

    def test_degenerate_channel(self):
        """Test a nearly useless channel selects nothing"""
        params = disposable_params(self.T, 16, BEC_MU, 0.05, 5.0)
        A, _ = select_disposable(binary_channel(0.999), self.T, params)
        self.assertEqual(A.size, 0)


@pytest.mark.unit
class TestGraftedSelection(unittest.TestCase):
    """Test the retain step on a grafted tree"""

    def setUp(self):
        """Set up test fixtures"""
        self.rs4 = get_kernel("rs4")
        self.grafted = build_grafted_tree(binary_channel(0.1), get_kernel("arikan2"), self.rs4,
                                          k=2, n=8, mu_star_rat=BEC_MU, mu_p=20.0)
        self.params = disposable_params(self.rs4, 8, BEC_MU, 0.05, 20.0, mode="graft")

    def test_frontier_round(self):
        """Test the frontier is classified as a final round"""
        A, diag = select_on_grafted(self.grafted, self.params)
        self.assertEqual(len(diag.rounds), 1)
        self.assertEqual(diag.rounds[0].note, "frontier")
        self.assertIn(-1, diag.retained)
        self.assertTrue(any(note.startswith("ln P =") for note in diag.notes))
        self.assertEqual(certify_grafted(self.grafted, A, self.params), A.size)
        self.assertTrue(verify_disjoint(self.grafted.tree, diag.recruits))

    def test_without_frontier(self):
        """Test no recruits and no frontier round select nothing"""
        A, diag = select_on_grafted(self.grafted, self.params, frontier_round=False)
        self.assertEqual(A.size, 0)
        self.assertEqual(diag.rounds, [])

    def test_depth_mismatch(self):
        """Test params for another n are rejected"""
        params = disposable_params(self.rs4, 9, BEC_MU, 0.05, 20.0, mode="graft")
        with self.assertRaises(ValidationError):
            select_on_grafted(self.grafted, params)


@pytest.mark.unit
class TestGraftedRounds(unittest.TestCase):
    """Test grafted trees whose stock reaches real recruit rounds"""

    def setUp(self):
        """Set up test fixtures"""
        self.W = binary_channel(0.5)
        self.T = arikan_kernel()
        self.params = disposable_params(self.T, 16, BEC_MU, 0.05, 5.0, mode="graft")

    def assert_rounds_consistent(self, grafted, A, diag):
        self.assertEqual(grafted.rounds, [4, 8, 12])
        self.assertEqual([r.m for r in diag.rounds[:3]], [4, 8, 12])
        self.assertTrue(any(grafted.recruits[m].size for m in grafted.rounds))
        for r in diag.rounds:
            with self.subTest(m=r.m, note=r.note):
                self.assertEqual(r.b, r.a)
                self.assertEqual(r.c + r.d + r.e, r.b)
                self.assertEqual(r.g, diag.capacity - r.e0)
                self.assertEqual(r.f, diag.capacity - r.a0)
        self.assertTrue(verify_disjoint(grafted.tree, diag.recruits))
        self.assertTrue(verify_disjoint(grafted.tree, diag.retained))
        self.assertEqual(certify_grafted(grafted, A, self.params), A.size)

    def test_single_kernel_graft(self):
        """Test k = 1 recruits at depths 4, 8 and 12 before the frontier"""
        grafted = build_grafted_tree(self.W, self.T, self.T, k=1, n=16,
                                     mu_star_rat=BEC_MU, mu_p=5.0)
        self.assertEqual((grafted.n_rat, grafted.s), (12, 4))
        A, diag = select_on_grafted(grafted, self.params)
        self.assert_rounds_consistent(grafted, A, diag)
        self.assertGreater(A.size, 0)
        if grafted.frontier.size:
            self.assertEqual(diag.rounds[-1].note, "frontier")
            self.assertIn(-12, diag.retained)

    def test_packaged_graft(self):
        """Test k = 2 grafts an error kernel over GF(4) at each recruit"""
        T_err = kernel_load(default_field(4), [[1, 0], [1, 1]], "arikan-gf4")
        grafted = build_grafted_tree(self.W, self.T, T_err, k=2, n=16,
                                     mu_star_rat=BEC_MU, mu_p=5.0)
        A, diag = select_on_grafted(grafted, self.params)
        self.assert_rounds_consistent(grafted, A, diag)
        recruited = grafted.recruited
        self.assertTrue(np.all(grafted.tree.transform[recruited] == POWER))
        self.assertTrue(np.all(grafted.tree.depth[recruited] % 4 == 0))

    def test_single_kernel_graft_matches_disposable(self):
        """Test a k = 1 graft without the frontier round reproduces the disposable template"""
        grafted = build_grafted_tree(self.W, self.T, self.T, k=1, n=16,
                                     mu_star_rat=BEC_MU, mu_p=5.0)
        A_graft, graft_diag = select_on_grafted(grafted, self.params, frontier_round=False)
        params = disposable_params(self.T, 16, BEC_MU, 0.05, 5.0)
        A_disp, disp_diag = select_disposable(self.W, self.T, params)
        self.assertEqual(A_graft.size, A_disp.size)
        self.assertEqual([(r.m, r.a, r.e) for r in graft_diag.rounds],
                         [(r.m, r.a, r.e) for r in disp_diag.rounds])
        for m in grafted.rounds:
            with self.subTest(m=m):
                self.assertEqual(graft_diag.recruits[m].size, disp_diag.recruits[m].size)
                self.assertEqual(graft_diag.retained[m].size, disp_diag.retained[m].size)
        self.assertEqual(measure(grafted.tree, A_graft), disp_diag.rounds[-1].e0)
        self.assertEqual(certify_grafted(grafted, A_graft, self.params, frontier_round=False),
                         A_graft.size)


@pytest.mark.unit
class TestCertificates(unittest.TestCase):
    """Test certificate failures and disjointness"""

    def setUp(self):
        """Set up test fixtures"""
        self.tree = perfect_tree(binary_channel(0.5), arikan_kernel(), 4)

    def test_disjoint(self):
        """Test ancestor pairs and repeated vertices are rejected"""
        self.assertTrue(verify_disjoint(self.tree, {1: np.array([3, 4]), 2: np.array([5])}))
        self.assertTrue(verify_disjoint(self.tree, {}))
        with self.assertRaises(InvariantViolation):
            verify_disjoint(self.tree, {1: np.array([1]), 2: np.array([3])})
        with self.assertRaises(InvariantViolation):
            verify_disjoint(self.tree, {1: np.array([4]), 2: np.array([4])})

    def test_uncertified_leaf(self):
        """Test a leaf below a bad channel has no certificate"""
        params = SelectionParams(n=4, s=2, mode="recyclable", eps=0.1, ln_delta=-10.0)
        worst = int(self.tree.leaves[0])
        with self.assertRaises(InvariantViolation):
            certify_recyclable(self.tree, np.array([worst]), params)


@pytest.mark.unit
class TestExponents(unittest.TestCase):
    """Test mu* estimates and empirical exponents"""

    def test_mu_from_gap(self):
        """Test the clamp at N^(-1/2)"""
        ln_n = math.log(1024)
        self.assertAlmostEqual(mu_from_gap(ln_n, 0.5)[1], 10.0)
        clamped, estimate = mu_from_gap(ln_n, 1e-9)
        self.assertAlmostEqual(clamped, 1 / 32)
        self.assertAlmostEqual(estimate, 2.0)
        self.assertEqual(mu_from_gap(ln_n, 1.0)[1], math.inf)

    def test_estimate_mu_star(self):
        """Test the estimator table and its lower limit of 2"""
        frame, summary = estimate_mu_star(arikan_kernel(), [0.3, 0.5], range(6, 9))
        self.assertEqual(list(frame.columns), MU_COLUMNS)
        self.assertEqual(len(frame), 6)
        self.assertTrue((frame["mu_estimate"] >= 2.0 - 1e-12).all())
        self.assertEqual(summary["n_last"], 8)
        self.assertEqual(summary["kind"], "limsup estimate")
        ident, _ = estimate_mu_star(identity_kernel(default_field(2), 2), [0.5], [4, 6])
        self.assertTrue((ident["mu_estimate"] >= 2.0).all())
        with self.assertRaises(ValidationError):
            estimate_mu_star(arikan_kernel(), [0.5], [0, 2])

    def test_empirical_exponents(self):
        """Test the exponent ratios and their running minima"""
        series = [(4, 0.25, math.log(1e-2)), (16, 0.4, math.log(1e-4))]
        result = empirical_exponents(series, 0.5)
        beta_2 = math.log(-math.log(1e-4)) / math.log(16)
        inv_mu_2 = -math.log(0.1) / math.log(16)
        self.assertAlmostEqual(result.beta_hat, beta_2)
        self.assertAlmostEqual(result.inv_mu_hat, inv_mu_2)
        self.assertFalse(result.frame["skipped"].any())

    def test_empirical_exponents_skips(self):
        """Test points above capacity are kept but skipped"""
        series = [(4, 0.25, math.log(1e-2)), (16, 0.6, math.log(1e-4))]
        result = empirical_exponents(series, 0.5)
        self.assertTrue(bool(result.frame["skipped"].iloc[1]))
        self.assertTrue(math.isnan(result.frame["inv_mu_ratio"].iloc[1]))
        with self.assertRaises(ValidationError):
            empirical_exponents(series[:1], 0.5)

    def test_fit_slope(self):
        """Test the fitted slope of a pure power law"""
        N = np.array([4, 16, 64, 256])
        frame = pd.DataFrame({"N": N, "gap": N ** -0.5})
        self.assertAlmostEqual(fit_scaling_slope(frame), -0.5, places=9)
        with self.assertRaises(ValidationError):
            fit_scaling_slope(frame.iloc[:1])

    def test_trends(self):
        """Test the per-depth trend tables"""
        W = binary_channel(0.5)
        scaling = scaling_trend(W, arikan_kernel(), [6, 8])
        self.assertEqual(scaling["n"].tolist(), [6, 8])
        self.assertTrue((scaling["ln_P"] <= math.log(1e-3) + 1e-12).all())
        errors = error_exponent_trend(W, arikan_kernel(), [6, 8], rate=0.25)
        self.assertTrue((errors["R"] >= 0.25 - 1e-12).all())


if __name__ == '__main__':
    unittest.main()
