"""Per-leaf certificates, recomputed by walking each root path on its own"""
import math
from typing import Dict, List, Optional

import numpy as np

from src.construction.grafting import GraftedTree, disposable_recruit_ln
from src.construction.z_process import empirical_increment
from src.models.channel_tree import POWER, ChannelTree
from src.models.selection import SelectionParams
from src.utils.errors import InvariantViolation

TELESCOPE_TOLERANCE = 1e-7


def _ln_neg_ln(ln_z: float) -> float:
    return math.inf if ln_z == -math.inf else math.log(-ln_z)


def _window_problem(tree: ChannelTree, path: List[int], start: int, end: int,
                    ln_delta: float, min_sum: float, eps: float) -> Optional[str]:
    """Check the retain conditions on path[start..end]; None when all hold."""
    window = path[start:end + 1]
    if any(tree.ln_z[v] >= ln_delta for v in window):
        return "Z >= delta inside the window"
    dice_sum = sum(float(tree.y_inc[v]) for v in window[1:])
    if not dice_sum > min_sum:
        return f"window dice sum {dice_sum:.6g} <= {min_sum:.6g}"

    # Empirical gains are measured after the last packaging step.
    first = start
    for i in range(start, end):
        if tree.transform[path[i]] == POWER:
            first = i + 1
    gains = []
    for u, v in zip(path[first:end], path[first + 1:end + 1]):
        y = empirical_increment(float(tree.ln_z[u]), float(tree.ln_z[v]))
        if y is None:
            return None
        gains.append(y)
    head, tail = _ln_neg_ln(float(tree.ln_z[path[first]])), _ln_neg_ln(float(tree.ln_z[path[end]]))
    if math.isinf(tail):
        return None
    if abs(tail - head - sum(gains)) > TELESCOPE_TOLERANCE * max(1.0, abs(tail)):
        return "empirical increments do not telescope"
    theoretical = sum(float(tree.y_inc[v]) for v in path[first + 1:end + 1])
    if tail - head < theoretical - (end - first) * eps - TELESCOPE_TOLERANCE:
        return "empirical gain fell more than eps per step below the dice sum"
    return None


def _depth_index(tree: ChannelTree, path: List[int], d: int) -> Optional[int]:
    for i, v in enumerate(path):
        if tree.depth[v] == d:
            return i
    return None


def certify_recyclable(tree: ChannelTree, selected: np.ndarray, params: SelectionParams) -> int:
    """
    Every selected leaf descends from a vertex e at depth m + s such that
    the depth-m ancestor v met the recruit cutoff, the window v..e stays
    below delta, its dice sum exceeds 2 eps s, and
    ln(-ln Z(e)) - ln(-ln Z(v)) exceeds the dice sum less eps per step.

    Returns:
        Number of certified leaves

    Raises:
        InvariantViolation: a leaf has no certificate
    """
    n, s = params.n, params.s
    for w in np.asarray(selected).tolist():
        path = tree.path(w)
        reasons = []
        certified = False
        for m in range(s, n - s + 1, s):
            i, j = _depth_index(tree, path, m), _depth_index(tree, path, m + s)
            if i is None or j is None:
                continue
            if tree.ln_z[path[i]] > -(m ** params.recruit_exponent):
                continue
            problem = _window_problem(tree, path, i, j, params.ln_delta,
                                      2.0 * params.eps * s, params.eps)
            if problem is None:
                certified = True
                break
            reasons.append(f"m={m}: {problem}")
        if not certified:
            raise InvariantViolation(f"leaf {w} has no recyclable certificate: {reasons}")
    return int(np.asarray(selected).size)


def _certify_disposable_leaf(tree: ChannelTree, w: int, rounds: List[int], params: SelectionParams,
                             ell: int, frontier_depth: Optional[int] = None) -> None:
    n = params.n
    path = tree.path(w)
    if tree.depth[path[-1]] != n:
        raise InvariantViolation(f"leaf {w} is not at depth n = {n}")
    candidates = [(m, False) for m in rounds]
    if frontier_depth is not None:
        candidates.append((frontier_depth, True))
    for m, forced in candidates:
        i = _depth_index(tree, path, m)
        if i is None:
            continue
        if not forced and tree.ln_z[path[i]] >= disposable_recruit_ln(m, params.recruit_exponent):
            continue
        floor = n * params.beta_p * math.log(ell)
        min_sum = floor + (n - m) * params.eps
        problem = _window_problem(tree, path, i, len(path) - 1, params.ln_delta,
                                  min_sum, params.eps)
        if problem is None:
            return
        raise InvariantViolation(f"leaf {w} (recruit depth {m}): {problem}")
    raise InvariantViolation(f"leaf {w} has no recruit ancestor")


def certify_disposable(tree: ChannelTree, selected: np.ndarray, params: SelectionParams) -> int:
    """
    Every selected leaf has a recruit ancestor at a round depth m whose
    path to the leaf stays below delta, with dice sum above
    n beta' log l + (n - m) eps (hence above beta' n log l).

    Raises:
        InvariantViolation: a leaf has no certificate
    """
    ell = tree.kernels[0].ell
    last = (min(params.n_rat, params.n) // params.s) * params.s
    rounds = list(range(params.s, last + 1, params.s))
    for w in np.asarray(selected).tolist():
        _certify_disposable_leaf(tree, w, rounds, params, ell)
    return int(np.asarray(selected).size)


def certify_grafted(grafted: GraftedTree, selected: np.ndarray, params: SelectionParams,
                    frontier_round: bool = True) -> int:
    """Disposable certificates on a grafted tree, with the frontier as a forced round."""
    tree = grafted.tree
    ell = tree.kernels[tree.roles["error"]].ell
    frontier = grafted.n_rat if frontier_round else None
    for w in np.asarray(selected).tolist():
        _certify_disposable_leaf(tree, w, grafted.rounds, params, ell, frontier)
    return int(np.asarray(selected).size)


def verify_disjoint(tree: ChannelTree, groups: Dict[int, np.ndarray]) -> bool:
    """
    No vertex of one group is a proper ancestor of a vertex in any group.

    Raises:
        InvariantViolation: two vertex events overlap
    """
    parts = [np.asarray(g, dtype=np.int64) for g in groups.values() if np.asarray(g).size]
    if not parts:
        return True
    nodes = np.concatenate(parts)
    if np.unique(nodes).size != nodes.size:
        raise InvariantViolation("a vertex appears in two groups")
    marked = np.zeros(tree.n_nodes, dtype=bool)
    marked[nodes] = True
    cur = tree.parent[nodes]
    while True:
        alive = cur >= 0
        if not alive.any():
            return True
        if marked[cur[alive]].any():
            raise InvariantViolation("a selected vertex has a selected ancestor")
        cur = np.where(alive, tree.parent[np.maximum(cur, 0)], -1)
