"""Train-and-retain bookkeeping shared by the selection templates"""
from collections import defaultdict
from fractions import Fraction
from typing import Callable, Tuple

import numpy as np

from src.models.channel_tree import POWER, ChannelTree


def measure(tree: ChannelTree, nodes: np.ndarray) -> Fraction:
    """Exact probability of a set of vertices (summed P(v))."""
    nodes = np.asarray(nodes, dtype=np.int64)
    if nodes.size == 0:
        return Fraction(0)
    grouped = defaultdict(int)
    for den in tree.denominators[nodes].tolist():
        grouped[int(den)] += 1
    return sum((Fraction(c, d) for d, c in grouped.items()), Fraction(0))


def window_walk(tree: ChannelTree, nodes: np.ndarray, m: int,
                ln_delta: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Walk each node up to its ancestor at kernel depth m.

    Returns:
        (anchor ids at depth m, dice sums of the branches taken below the
        anchor, whether Z >= delta anywhere on the path, anchor included)
    """
    nodes = np.asarray(nodes, dtype=np.int64)
    anchors = tree.ancestor_at_depth(nodes, m)
    cur = nodes.copy()
    sums = np.zeros(nodes.size)
    hit = tree.ln_z[cur] >= ln_delta
    active = cur != anchors
    while active.any():
        sums[active] += tree.y_inc[cur[active]]
        cur[active] = tree.parent[cur[active]]
        hit[active] |= tree.ln_z[cur[active]] >= ln_delta
        active = cur != anchors
    return anchors, sums, hit


def descendants_at_depth(tree: ChannelTree, roots: np.ndarray, d: int) -> np.ndarray:
    """Descendants of roots (inclusive) at kernel depth d, skipping vertices about to be packaged."""
    frontier = np.asarray(roots, dtype=np.int64)
    found = [frontier[(tree.depth[frontier] == d) & (tree.transform[frontier] != POWER)]]
    while frontier.size:
        frontier = tree.children_of(frontier)
        frontier = frontier[tree.depth[frontier] <= d]
        found.append(frontier[(tree.depth[frontier] == d) & (tree.transform[frontier] != POWER)])
    out = np.concatenate(found)
    return np.unique(out)


def classify(tree: ChannelTree, members: np.ndarray, m: int, ln_delta: float,
             lose: Callable[[np.ndarray], np.ndarray]):
    """
    Split trained members into C (delta hit), D (dice sum fails) and E (kept).

    Args:
        tree: Explicit tree
        members: B_m node ids
        m: Recruit depth
        ln_delta: ln of the delta threshold
        lose: Maps window dice sums to True where the D inequality holds

    Returns:
        (C ids, D ids, E ids, window sums of members)
    """
    _, sums, hit = window_walk(tree, members, m, ln_delta)
    in_d = ~hit & lose(sums)
    in_e = ~hit & ~in_d
    return members[hit], members[in_d], members[in_e], sums
