"""Sampling the channel process W_0, W_1, ..., W_tau down a tree"""
import math
from typing import List, Optional

import numpy as np

from src.models.channel_tree import ChannelTree, PathRecord, require_explicit


def empirical_increment(ln_z_prev: float, ln_z_next: float) -> Optional[float]:
    """
    log(log Z_i / log Z_{i-1}), or None when Z_{i-1} is 0 or 1.

    A step into Z_i = 0 gives +inf; a step into Z_i = 1 gives -inf.
    """
    if ln_z_prev == 0.0 or ln_z_prev == -math.inf:
        return None
    if ln_z_next == -math.inf:
        return math.inf
    if ln_z_next == 0.0:
        return -math.inf
    return math.log(ln_z_next / ln_z_prev)


def z_process_sample(tree: ChannelTree, seed: int) -> PathRecord:
    """
    Walk from the root to a leaf choosing a uniform child at every step.

    Args:
        tree: Explicit channel tree
        seed: Seed of the walk

    Returns:
        PathRecord with node ids, ln Z_i, branch indices X_i, empirical
        increments and tau
    """
    tree = require_explicit(tree, "z_process_sample")
    rng = np.random.default_rng(seed)
    v = tree.root
    nodes = [v]
    while tree.n_children[v] > 0:
        v = int(tree.first_child[v] + rng.integers(tree.n_children[v]))
        nodes.append(v)
    ln_z = [float(tree.ln_z[u]) for u in nodes]
    branches = [int(tree.branch[u]) for u in nodes[1:]]
    y_emp: List[Optional[float]] = [empirical_increment(a, b) for a, b in zip(ln_z, ln_z[1:])]
    return PathRecord(nodes, ln_z, branches, y_emp)


def sample_leaves(tree: ChannelTree, count: int, seed: int) -> np.ndarray:
    """Leaves reached by count independent walks, advanced together."""
    tree = require_explicit(tree, "sample_leaves")
    rng = np.random.default_rng(seed)
    at = np.zeros(count, dtype=np.int64)
    while True:
        moving = tree.n_children[at] > 0
        if not moving.any():
            return at
        k = tree.n_children[at[moving]]
        at[moving] = tree.first_child[at[moving]] + (rng.random(k.size) * k).astype(np.int64)


def level_moment(tree: ChannelTree, d: int, fn) -> float:
    """E[fn(ln Z_d)] over nodes at kernel depth d, weighted by P."""
    tree = require_explicit(tree, "level_moment")
    nodes = tree.at_depth(d)
    weights = tree.prob_of(nodes)
    return float(np.dot(weights, fn(tree.ln_z[nodes])))
