"""Monte Carlo successive-cancellation decoding over erasure channels"""
from typing import List, Tuple

import numpy as np
from joblib import Parallel, delayed

from src.construction.code_parameters import block_length, error_bound
from src.models.channel_tree import POWER, ChannelTree, require_explicit
from src.models.simulation import SimConfig, SimReport, UnionBoundReport
from src.utils.errors import BudgetExceededError, InvariantViolation, ValidationError
from src.utils.helpers import worker_count
from src.utils.logger import default_logger as logger

BLOCK_CELLS = 1 << 24


def uses_per_node(tree: ChannelTree, N: int) -> np.ndarray:
    """
    Channel uses of every vertex in one block of N root uses.

    Raises:
        ValidationError: a split is not exact
    """
    uses = np.zeros(tree.n_nodes, dtype=np.int64)
    uses[0] = N
    for g in range(1, int(tree.generation.max()) + 1):
        level = np.flatnonzero(tree.generation == g)
        parent = tree.parent[level]
        split = np.where(tree.transform[parent] == POWER, tree.power_k, tree.n_children[parent])
        if np.any(uses[parent] % split):
            raise ValidationError("block length does not split evenly over the tree")
        uses[level] = uses[parent] // split
    return uses


def _kernel_split(erased: np.ndarray, masks: np.ndarray, check: bool) -> List[np.ndarray]:
    """Children erasures of a kernel vertex; group j holds uses j, j + U/l, ..."""
    trials, uses = erased.shape
    ell = masks.shape[0]
    grouped = erased.reshape(trials, ell, uses // ell)
    weights = (np.int64(1) << np.arange(ell, dtype=np.int64))[None, :, None]
    patterns = (grouped * weights).sum(axis=1)
    children = [masks[i][patterns] for i in range(ell)]
    if check:
        total = np.sum(children, axis=0, dtype=np.int64)
        if not np.array_equal(total, grouped.sum(axis=1, dtype=np.int64)):
            raise InvariantViolation("erased synthetic uses differ from the group's erasure count")
    return children


def _run_block(tree: ChannelTree, block: int, trials: int, seed: int, epsilon: float,
               N: int, leaf_pos: np.ndarray, in_A: np.ndarray, check: bool) -> Tuple[np.ndarray, int]:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    counts = np.zeros(tree.leaves.size, dtype=np.int64)
    failed = np.zeros(trials, dtype=bool)
    masks = [k.table.erased_masks for k in tree.kernels]
    stack = [(0, rng.random((trials, N)) < epsilon)]
    while stack:
        v, erased = stack.pop()
        t = tree.transform[v]
        if tree.n_children[v] == 0:
            counts[leaf_pos[v]] += int(erased.sum())
            if in_A[v]:
                failed |= erased.any(axis=1)
        elif t == POWER:
            k = tree.power_k
            packed = erased.reshape(trials, k, erased.shape[1] // k).any(axis=1)
            stack.append((int(tree.first_child[v]), packed))
        else:
            children = _kernel_split(erased, masks[t], check)
            first = int(tree.first_child[v])
            for i in range(len(children) - 1, -1, -1):
                stack.append((first + i, children[i]))
    return counts, int(failed.sum())


def simulate(tree: ChannelTree, A, cfg: SimConfig) -> SimReport:
    """
    Sample erasures at the root and push them down the tree.

    A kernel child use is erased when its row is erased under the pattern of
    its group of l parent uses; a T_C^k child use is erased when any of its
    k parent uses is. A trial fails when any use of a leaf in A is erased,
    which is exactly the SC failure event over erasure channels.

    Args:
        tree: Explicit tree
        A: Information leaves
        cfg: Trials, seed and sharding

    Returns:
        SimReport

    Raises:
        ValidationError: A holds a non-leaf
        BudgetExceededError: trials * N above the trial budget, or merged tree
    """
    tree = require_explicit(tree, "simulate")
    ids = tree.validate_leaf_set(A)
    N = block_length(tree)
    if cfg.trials * N > cfg.trial_budget:
        raise BudgetExceededError(
            f"{cfg.trials} trials of {N} uses exceed the trial budget {cfg.trial_budget}")
    epsilon = tree.root_channel.epsilon if cfg.epsilon is None else cfg.epsilon
    uses = uses_per_node(tree, N)

    leaf_pos = np.full(tree.n_nodes, -1, dtype=np.int64)
    leaf_pos[tree.leaves] = np.arange(tree.leaves.size)
    in_A = np.zeros(tree.n_nodes, dtype=bool)
    in_A[ids] = True

    per_block = max(1, min(cfg.block_trials, BLOCK_CELLS // N))
    sizes = [min(per_block, cfg.trials - start) for start in range(0, cfg.trials, per_block)]
    jobs = min(worker_count(cfg.shards), len(sizes)) if cfg.shards > 1 else 1
    logger.info(f"Simulating {cfg.trials} trials of N={N} in {len(sizes)} blocks on {jobs} workers")
    args = (cfg.seed, epsilon, N, leaf_pos, in_A, cfg.check_conservation)
    if jobs > 1:
        parts = Parallel(n_jobs=jobs)(delayed(_run_block)(tree, b, size, *args)
                                      for b, size in enumerate(sizes))
    else:
        parts = [_run_block(tree, b, size, *args) for b, size in enumerate(sizes)]

    counts = np.zeros(tree.leaves.size, dtype=np.int64)
    failures = 0
    for block_counts, block_failures in parts:
        counts += block_counts
        failures += block_failures
    report = SimReport(tree.leaves.copy(), tree.leaf_ln_z().copy(), counts, uses[tree.leaves],
                       cfg.trials, failures, error_bound(tree, ids), cfg.z)
    if cfg.epsilon is not None and cfg.epsilon != tree.root_channel.epsilon:
        report.notes.append(f"epsilon overridden to {cfg.epsilon}; analytic Z uses "
                            f"{tree.root_channel.epsilon}")
    logger.debug(f"simulation: {failures} block errors in {cfg.trials} trials")
    return report


def check_union_bound(report: SimReport, z: float) -> UnionBoundReport:
    """
    Compare a simulated block error rate with its union bound.

    A rate above bound + z sigma is reported as flagged, not raised.
    """
    result = UnionBoundReport(report.bler, report.bler_sigma, report.union_bound,
                              report.ln_union_bound, z, report.trials)
    if result.flagged:
        logger.warning(f"Simulated BLER {result.bler:.4g} exceeds the union bound "
                       f"{result.union_bound:.4g} by more than {z} sigma")
    else:
        logger.info(f"BLER {result.bler:.4g} <= union bound {result.union_bound:.4g} "
                    f"(slack {result.slack:.3g})")
    return result


def verify_union_bound(tree: ChannelTree, A, cfg: SimConfig) -> UnionBoundReport:
    """Simulate (tree, A) and check the result against the union bound."""
    return check_union_bound(simulate(tree, A, cfg), cfg.z)
