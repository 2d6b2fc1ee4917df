"""Block length, rate and union-bound error of a (tree, leaf set) code"""
import math
from collections import defaultdict
from fractions import Fraction
from typing import Iterable

import numpy as np
from scipy.special import logsumexp

from src.models.channel_tree import CodeSpec
from src.utils.errors import ValidationError
from src.utils.helpers import lcm_of


def vertex_prob(tree, v: int) -> Fraction:
    """
    P(v) = 1 / (product of kernel arities along the root path).

    For a merged tree, v is a class id and the result is the probability of
    one channel of that class.

    Raises:
        ValidationError: invalid id
    """
    if tree.merged:
        if not (0 <= int(v) < tree.class_ln_z.size):
            raise ValidationError(f"class id {v} is not in the merged tree")
        return Fraction(1, tree.denominator)
    return Fraction(1, int(tree.denominators[tree.check_node(v)]))


def block_length(tree) -> int:
    """lcm over leaves of 1/P(w), times k when the tree packages symbols."""
    if tree.merged:
        n = tree.denominator
    else:
        n = lcm_of(set(tree.denominators[tree.leaves].tolist()))
    return n * tree.power_k if tree.has_power else n


def _as_ids(tree, A: Iterable[int]) -> np.ndarray:
    return tree.validate_leaf_set(np.fromiter((int(a) for a in A), dtype=np.int64)
                                  if not isinstance(A, np.ndarray) else A)


def code_rate_exact(tree, A) -> Fraction:
    """
    Sum of P(w) over w in A, as an exact rational.

    Raises:
        ValidationError: A holds a non-leaf
    """
    ids = _as_ids(tree, A)
    if ids.size == 0:
        return Fraction(0)
    grouped = defaultdict(int)
    for den, mult in zip(tree.denominators_of(ids), tree.multiplicity_of(ids).tolist()):
        grouped[den] += int(mult)
    return sum((Fraction(c, d) for d, c in grouped.items()), Fraction(0))


def code_rate(tree, A) -> float:
    return float(code_rate_exact(tree, A))


def capacity_gap(tree, A) -> float:
    """I(W) - R."""
    return float(tree.root_channel.capacity_exact() - code_rate_exact(tree, A))


def _leaf_terms(tree, ids: np.ndarray) -> np.ndarray:
    """ln(N P(w) m(w) Z(w)) per leaf id."""
    ln_n = math.log(block_length(tree))
    ln_p = -np.array([math.log(d) for d in tree.denominators_of(ids)])
    ln_mult = np.log(tree.multiplicity_of(ids).astype(float))
    return ln_n + ln_p + ln_mult + tree.ln_z_of(ids)


def error_bound(tree, A) -> float:
    """
    Natural log of the union bound: sum over w in A of N P(w) Z(w).

    Accumulated with logsumexp so that doubly small Z values survive;
    -inf for an empty set.
    """
    ids = _as_ids(tree, A)
    if ids.size == 0:
        return -math.inf
    terms = _leaf_terms(tree, ids)
    if np.all(terms == -np.inf):
        return -math.inf
    return float(logsumexp(terms))


def make_code(tree, A) -> CodeSpec:
    """Bundle (tree, A) with N, R and ln P."""
    ids = _as_ids(tree, A)
    rate = code_rate_exact(tree, ids)
    return CodeSpec(tree, ids, block_length(tree), float(rate), error_bound(tree, ids), rate)


def _sorted_leaves(tree) -> np.ndarray:
    leaves = np.asarray(tree.leaves)
    return leaves[np.argsort(tree.ln_z_of(leaves), kind="stable")]


def select_by_budget(tree, ln_budget: float) -> np.ndarray:
    """
    Largest prefix of the leaves, sorted by Z, whose union bound stays within
    exp(ln_budget).
    """
    order = _sorted_leaves(tree)
    if order.size == 0:
        return order
    cumulative = np.logaddexp.accumulate(_leaf_terms(tree, order))
    keep = int(np.searchsorted(cumulative, ln_budget, side="right"))
    return np.sort(order[:keep])


def select_by_rate(tree, rate: float) -> np.ndarray:
    """
    Fewest lowest-Z leaves whose total probability reaches rate.

    Raises:
        ValidationError: rate outside [0, 1]
    """
    if not (0.0 <= rate <= 1.0):
        raise ValidationError(f"rate must lie in [0, 1], got {rate}")
    order = _sorted_leaves(tree)
    if rate == 0 or order.size == 0:
        return np.empty(0, dtype=np.int64)
    mass = tree.prob_of(order) * tree.multiplicity_of(order)
    keep = int(np.searchsorted(np.cumsum(mass), rate - 1e-12, side="left")) + 1
    return np.sort(order[:min(keep, order.size)])
