"""Stock, prune and graft: two-kernel trees joined by a T_C^k step"""
import math
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from src.construction.tree_builder import TreeBuilder, check_conventions
from src.core.field import extension_field
from src.kernels.kernel import Kernel
from src.models.channel_tree import LEAF, NODE_BUDGET, POWER, ChannelTree
from src.models.erasure_channel import ErasureChannel
from src.utils.errors import ValidationError
from src.utils.logger import default_logger as logger

RATE, ERROR = 0, 1


def round_step(n: int) -> int:
    """s = ceil(sqrt(n))."""
    return max(1, math.isqrt(n - 1) + 1) if n > 0 else 1


def rational_depth(n: int, mu_star_rat: float, mu_p: float) -> int:
    """n_rat = n mu*_rat / mu', rounded to the nearest integer."""
    return int(round(n * mu_star_rat / mu_p))


def disposable_recruit_ln(m: int, exponent: float = 1.0 / 3.0) -> float:
    """ln of the recruit threshold exp(-exp(m^exponent))."""
    return -math.exp(m ** exponent)


@dataclass
class GraftedTree:
    """A grafted tree with the recruit bookkeeping of its stock part.

    recruits[m] are the stock vertices recruited at round m; frontier are the
    stock vertices at depth n_rat that were never recruited and were grafted
    all the same.
    """
    tree: ChannelTree
    k: int
    n: int
    n_rat: int
    s: int
    rounds: List[int]
    recruits: Dict[int, np.ndarray]
    frontier: np.ndarray
    mu_star_rat: float
    mu_p: float
    notes: List[str] = field(default_factory=list)

    @property
    def recruited(self) -> np.ndarray:
        parts = [self.recruits[m] for m in self.rounds]
        return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)

    def to_dict(self) -> dict:
        return {
            "k": self.k, "n": self.n, "n_rat": self.n_rat, "s": self.s,
            "rounds": self.rounds,
            "recruits": {m: int(v.size) for m, v in self.recruits.items()},
            "frontier": int(self.frontier.size),
            "notes": self.notes,
        }


def build_grafted_tree(
    W: ErasureChannel,
    T_rat: Kernel,
    T_err: Kernel,
    k: int,
    n: int,
    mu_star_rat: float,
    mu_p: float,
    recruit_exponent: float = 1.0 / 3.0,
    budget: int = NODE_BUDGET
) -> GraftedTree:
    """
    Grow the rate-kernel stock, graft at recruits and at depth n_rat.

    Stock vertices at round depths m = s, 2s, ... <= n_rat with
    Z < exp(-exp(m^(1/3))) are recruited. Recruits and the unrecruited stock
    vertices at depth n_rat keep no stock descendants; each gets a T_C^k
    child followed by a perfect T_err tree of depth n - m.

    Args:
        W: Root channel over the field of T_rat
        T_rat: Rate kernel of the stock
        T_err: Error kernel over the degree-k extension field
        k: Packaging degree
        n: Total kernel depth
        mu_star_rat: Scaling exponent of the rate kernel
        mu_p: Target mu'
        recruit_exponent: The 1/3 in the recruit threshold
        budget: Node budget

    Returns:
        GraftedTree

    Raises:
        ValidationError: field/extension mismatch, or n_rat outside 1..n
        BudgetExceededError: node budget
    """
    if W.field != T_rat.field:
        raise ValidationError(f"root channel over {W.field!r} but rate kernel over {T_rat.field!r}")
    expected = extension_field(T_rat.field, k)
    if T_err.field != expected:
        raise ValidationError(
            f"error kernel must live over the degree-{k} extension {expected!r}, "
            f"got {T_err.field!r}")
    n_rat = rational_depth(n, mu_star_rat, mu_p)
    if n_rat < 1:
        raise ValidationError(f"n_rat = round({n} * {mu_star_rat} / {mu_p}) rounds to 0")
    if n_rat > n:
        raise ValidationError(f"n_rat = {n_rat} exceeds the depth n = {n}")
    s = round_step(n)
    rounds = list(range(s, (n_rat // s) * s + 1, s))
    notes = []
    exact = n * mu_star_rat / mu_p
    if abs(exact - n_rat) > 1e-9:
        notes.append(f"n_rat rounded from {exact:.4f} to {n_rat}")
        logger.warning(notes[-1])
    if rounds and rounds[-1] != n_rat:
        notes.append(f"last recruit round {rounds[-1]} < n_rat = {n_rat}")
    thresholds = {m: disposable_recruit_ln(m, recruit_exponent) for m in rounds}

    def decide(nodes, ln_z, depth, generation, field_id):
        stock = generation == depth
        out = np.where(depth < n, ERROR, LEAF)
        out[stock] = RATE
        for m, ln_threshold in thresholds.items():
            out[stock & (depth == m) & (ln_z < ln_threshold)] = POWER
        out[stock & (depth == n_rat)] = POWER
        return out

    builder = TreeBuilder(W, [T_rat, T_err], k, budget)
    builder.grow(decide)
    tree = builder.finalize(roles={"rate": RATE, "error": ERROR})
    check_conventions(tree)

    stock_power = np.flatnonzero((tree.transform == POWER) & (tree.generation == tree.depth))
    recruits = {}
    for m in rounds:
        at_m = stock_power[tree.depth[stock_power] == m]
        recruits[m] = at_m[tree.ln_z[at_m] < thresholds[m]]
    recruited = np.concatenate(list(recruits.values())) if recruits else np.empty(0, dtype=np.int64)
    frontier = np.setdiff1d(stock_power[tree.depth[stock_power] == n_rat], recruited)
    if recruited.size == 0:
        notes.append("no stock vertex met a recruit threshold")
    logger.info(f"Grafted tree: n={n}, n_rat={n_rat}, s={s}, recruits={int(recruited.size)}, "
                f"frontier={int(frontier.size)}, nodes={tree.n_nodes}")
    return GraftedTree(tree, int(k), int(n), n_rat, s, rounds, recruits, frontier,
                       mu_star_rat, mu_p, notes)
