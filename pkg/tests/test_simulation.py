"""Unit tests for the Monte Carlo SC simulator"""
import math
import unittest

import numpy as np
import pytest

from src.construction.code_parameters import block_length, error_bound
from src.construction.grafting import build_grafted_tree
from src.construction.tree_builder import packaged_tree, perfect_tree
from src.core.field import default_field
from src.kernels.kernel import arikan_kernel, kernel_load, random_kernel, rs_kernel
from src.models.erasure_channel import ErasureChannel
from src.models.simulation import SimConfig, SimReport, UnionBoundReport, normal_interval
from src.simulation.sc_simulator import (check_union_bound, simulate, uses_per_node,
                                         verify_union_bound)
from src.utils.errors import BudgetExceededError, ValidationError


def arikan_tree(eps, n):
    return perfect_tree(ErasureChannel(default_field(2), eps), arikan_kernel(), n)


@pytest.mark.unit
class TestSimConfig(unittest.TestCase):
    """Test simulation settings and report arithmetic"""

    def test_validation(self):
        """Test bad trial counts, seeds and overrides are rejected"""
        with self.assertRaises(ValidationError):
            SimConfig(trials=0)
        with self.assertRaises(ValidationError):
            SimConfig(trials=10, seed=-1)
        with self.assertRaises(ValidationError):
            SimConfig(trials=10, epsilon=1.2)
        with self.assertRaises(ValidationError):
            SimConfig(trials=10, shards=0)
        with self.assertRaises(ValidationError):
            SimConfig(trials=10, z=0.0)

    def test_normal_interval(self):
        """Test the interval is centered and clipped"""
        lo, hi = normal_interval(np.array([50]), np.array([100]), 2.0)
        self.assertAlmostEqual(float(lo[0]), 0.4)
        self.assertAlmostEqual(float(hi[0]), 0.6)
        lo, hi = normal_interval(np.array([0]), np.array([100]), 2.0)
        self.assertEqual((float(lo[0]), float(hi[0])), (0.0, 0.0))

    def test_report_quantities(self):
        """Test BLER, sigma and the union bound of a report"""
        report = SimReport(np.array([2]), np.array([math.log(0.25)]), np.array([25]),
                           np.array([1]), 100, 25, math.log(0.25))
        self.assertAlmostEqual(report.bler, 0.25)
        self.assertAlmostEqual(report.bler_sigma, math.sqrt(0.25 * 0.75 / 100))
        self.assertAlmostEqual(report.union_bound, 0.25)
        self.assertTrue(report.within_ci()[0])
        self.assertEqual(report.rows()[0][0], 2)
        self.assertEqual(SimReport(np.array([]), np.array([]), np.array([]), np.array([]), 1, 0,
                                   -math.inf).union_bound, 0.0)

    def test_union_bound_report(self):
        """Test slack and flagging"""
        ok = UnionBoundReport(0.1, 0.01, 0.1, math.log(0.1), 4.0, 1000)
        self.assertAlmostEqual(ok.slack, 0.04)
        self.assertFalse(ok.flagged)
        bad = UnionBoundReport(0.3, 0.01, 0.1, math.log(0.1), 4.0, 1000)
        self.assertTrue(bad.flagged)
        self.assertTrue(bad.to_dict()["flagged"])

    def test_check_union_bound(self):
        """Test a report is flagged only when its rate clears bound + z sigma"""
        within = SimReport(np.array([2]), np.array([math.log(0.25)]), np.array([25]),
                           np.array([1]), 100, 25, math.log(0.25))
        result = check_union_bound(within, 4.0)
        self.assertFalse(result.flagged)
        self.assertEqual(result.trials, 100)
        above = SimReport(np.array([2]), np.array([math.log(0.01)]), np.array([400]),
                          np.array([1]), 500, 400, math.log(0.01))
        self.assertTrue(check_union_bound(above, 4.0).flagged)


@pytest.mark.unit
class TestSimulator(unittest.TestCase):
    """Test erasure propagation and block error counting"""

    def test_uses_per_node(self):
        """Test uses split evenly down the tree"""
        tree = arikan_tree(0.5, 2)
        self.assertEqual(uses_per_node(tree, 4).tolist(), [4, 2, 2, 1, 1, 1, 1])
        with self.assertRaises(ValidationError):
            uses_per_node(tree, 6)

    def test_single_good_channel(self):
        """Test the good child of one Arikan step fails a quarter of the time"""
        tree = arikan_tree(0.5, 1)
        report = simulate(tree, [2], SimConfig(trials=20000, seed=3))
        self.assertAlmostEqual(report.bler, 0.25, delta=0.02)
        self.assertAlmostEqual(report.union_bound, 0.25)
        self.assertTrue(report.within_ci().all())

    def test_noiseless_override(self):
        """Test epsilon = 0 never fails and is noted"""
        tree = arikan_tree(0.5, 3)
        report = simulate(tree, tree.leaves, SimConfig(trials=200, epsilon=0.0))
        self.assertEqual(report.block_errors, 0)
        self.assertEqual(int(report.erased_uses.sum()), 0)
        self.assertTrue(report.notes)

    def test_empty_information_set(self):
        """Test an empty A never fails and has union bound 0"""
        tree = arikan_tree(0.3, 2)
        report = simulate(tree, [], SimConfig(trials=100))
        self.assertEqual(report.block_errors, 0)
        self.assertEqual(report.union_bound, 0.0)

    def test_rejects_non_leaf(self):
        """Test an interior vertex in A is rejected"""
        tree = arikan_tree(0.3, 2)
        with self.assertRaises(ValidationError):
            simulate(tree, [1], SimConfig(trials=10))

    def test_trial_budget(self):
        """Test trials * N above the budget raise before sampling"""
        tree = arikan_tree(0.3, 1)
        with self.assertRaises(BudgetExceededError):
            simulate(tree, [2], SimConfig(trials=10, trial_budget=10))

    def test_merged_tree_rejected(self):
        """Test a merged tree cannot be simulated"""
        merged = perfect_tree(ErasureChannel(default_field(2), 0.3), arikan_kernel(), 4, budget=8)
        with self.assertRaises(BudgetExceededError):
            simulate(merged, [0], SimConfig(trials=10))

    def test_seed_determinism(self):
        """Test equal seeds give equal counts and block size does not matter"""
        tree = arikan_tree(0.4, 3)
        a = simulate(tree, tree.leaves[-3:], SimConfig(trials=500, seed=11, block_trials=100))
        b = simulate(tree, tree.leaves[-3:], SimConfig(trials=500, seed=11, block_trials=100))
        np.testing.assert_array_equal(a.erased_uses, b.erased_uses)
        self.assertEqual(a.block_errors, b.block_errors)

    def test_conservation_check(self):
        """Test the per-group erasure conservation check passes"""
        tree = arikan_tree(0.4, 3)
        report = simulate(tree, tree.leaves, SimConfig(trials=300, check_conservation=True))
        N = 8
        self.assertEqual(int(report.uses_per_trial.sum()), N)


@pytest.mark.slow
class TestSimulatorStatistics(unittest.TestCase):
    """Test simulated rates against analytic erasure probabilities"""

    def test_shard_independence(self):
        """Test one and two shards give identical counts"""
        tree = arikan_tree(0.4, 4)
        A = tree.leaves[-5:]
        one = simulate(tree, A, SimConfig(trials=4000, seed=5, block_trials=500, shards=1))
        two = simulate(tree, A, SimConfig(trials=4000, seed=5, block_trials=500, shards=2))
        np.testing.assert_array_equal(one.erased_uses, two.erased_uses)
        self.assertEqual(one.block_errors, two.block_errors)

    def test_leaf_rates_match_analytic(self):
        """Test every leaf's erasure rate lies within its interval"""
        tree = arikan_tree(0.3, 4)
        report = simulate(tree, tree.leaves, SimConfig(trials=20000, seed=1))
        self.assertTrue(report.within_ci().all())

    def test_packaged_tree(self):
        """Test erasures survive the packaging step"""
        W = ErasureChannel(default_field(2), 0.1)
        tree = packaged_tree(W, 2, rs_kernel(default_field(4)), 1)
        report = simulate(tree, tree.leaves, SimConfig(trials=20000, seed=2, check_conservation=True))
        self.assertEqual(int(report.uses_per_trial.sum()), 4)
        self.assertTrue(report.within_ci().all())

    def test_union_bound_holds(self):
        """Test the simulated BLER stays below the union bound"""
        tree = arikan_tree(0.3, 6)
        leaves = tree.leaves[np.argsort(tree.leaf_ln_z())[:20]]
        result = verify_union_bound(tree, leaves, SimConfig(trials=20000, seed=4))
        self.assertFalse(result.flagged)
        self.assertLessEqual(result.bler, result.union_bound + result.z * result.sigma)

    def test_randomized_union_bound_sweep(self):
        """Test twenty random (tree, A) pairs against the union bound and its N accounting"""
        rng = np.random.default_rng(2024)
        f2, f4 = default_field(2), default_field(4)
        arikan_f4 = kernel_load(f4, [[1, 0], [1, 1]], "arikan-gf4")
        kinds = ["arikan", "rs4", "random", "packaged", "graft"] * 4
        for index, kind in enumerate(kinds):
            eps = float(rng.uniform(0.05, 0.5))
            if kind == "arikan":
                tree, k = arikan_tree(eps, int(rng.integers(2, 9))), 1
            elif kind == "rs4":
                tree = perfect_tree(ErasureChannel(f4, eps), rs_kernel(f4), int(rng.integers(1, 4)))
                k = 1
            elif kind == "random":
                T = random_kernel(f2, 3, seed=int(rng.integers(0, 1000)))
                tree, k = perfect_tree(ErasureChannel(f2, eps), T, int(rng.integers(1, 5))), 1
            elif kind == "packaged":
                tree = packaged_tree(ErasureChannel(f2, eps), 2, rs_kernel(f4),
                                     int(rng.integers(1, 4)))
                k = 2
            else:
                tree = build_grafted_tree(ErasureChannel(f2, eps), arikan_kernel(), arikan_f4,
                                          k=2, n=int(rng.integers(4, 9)), mu_star_rat=3.627,
                                          mu_p=5.0).tree
                k = 2
            order = tree.leaves[np.argsort(tree.leaf_ln_z(), kind="stable")]
            candidates = order[:max(1, order.size // 2)]
            size = int(rng.integers(1, min(8, candidates.size) + 1))
            A = np.sort(rng.choice(candidates, size=size, replace=False))
            cfg = SimConfig(trials=2000, seed=100 + index)
            with self.subTest(index=index, kind=kind, eps=eps, size=size):
                report = simulate(tree, A, cfg)
                self.assertEqual(int(report.uses_per_trial.sum()) * k, block_length(tree))
                self.assertAlmostEqual(report.ln_union_bound, error_bound(tree, A))
                in_A = np.isin(report.leaf_ids, A)
                per_use = float(np.sum(report.uses_per_trial[in_A] *
                                       np.exp(report.analytic_ln_z[in_A])))
                self.assertAlmostEqual(report.union_bound, k * per_use,
                                       delta=1e-9 * max(1.0, report.union_bound))
                self.assertFalse(check_union_bound(report, cfg.z).flagged)
                self.assertLessEqual(report.bler, per_use + cfg.z * report.bler_sigma + 1e-12)


if __name__ == '__main__':
    unittest.main()
