"""The recyclable template: recruit, train for s levels, retain or recycle"""
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from src.construction.grafting import round_step
from src.construction.tree_builder import perfect_tree
from src.kernels.constants import RecyclableConstants, pick_constants_recyclable
from src.kernels.kernel import Kernel
from src.kernels.kernel_analyzer import kernel_dice
from src.models.channel_tree import NODE_BUDGET, ChannelTree
from src.models.erasure_channel import ErasureChannel
from src.models.selection import RoundRecord, SelectionDiagnostics, SelectionParams
from src.selection.training import classify, descendants_at_depth, measure
from src.utils.errors import InfeasibleTargetError
from src.utils.logger import default_logger as logger


def recyclable_params(kernel: Kernel, n: int, mu_star: float,
                      constants: Optional[RecyclableConstants] = None) -> SelectionParams:
    """SelectionParams for the recyclable template, picking constants if not given."""
    constants = constants or pick_constants_recyclable(kernel, mu_star)
    return SelectionParams(n=n, s=round_step(n), mode="recyclable", eps=constants.eps,
                           ln_delta=constants.ln_delta, upsilon=constants.upsilon,
                           mu_star=mu_star)


def select_recyclable(
    W: ErasureChannel,
    T: Kernel,
    params: SelectionParams,
    tree: Optional[ChannelTree] = None,
    budget: int = NODE_BUDGET
) -> Tuple[np.ndarray, SelectionDiagnostics]:
    """
    Run the recyclable template on the perfect tree of depth n.

    For m = s, 2s, ... <= n - s: A_m are depth-m vertices with
    Z <= exp(-m^(2/3)) and no inclusive ancestor in E_0; B_m are their
    depth-(m+s) descendants; C_m hit Z >= delta on the window; D_m have a
    window dice mean <= 2 eps; E_m are kept. C and D vertices may be
    recruited again in later rounds.

    Args:
        W: Root channel
        T: Kernel
        params: Constants (mode 'recyclable')
        tree: Prebuilt perfect tree (built when omitted)
        budget: Node budget

    Returns:
        (A_n leaf ids, diagnostics)

    Raises:
        InfeasibleTargetError: P{Y=0} >= l^(-1/mu*)
        BudgetExceededError: tree over budget
    """
    if params.mu_star is not None:
        dice = kernel_dice(T)
        target = T.ell ** (-1.0 / params.mu_star)
        if dice.p_zero >= target:
            raise InfeasibleTargetError(
                f"P{{Y=0}} = {dice.p_zero:.4g} is not below l^(-1/mu*) = {target:.4g}")
    n, s = params.n, params.s
    if tree is None:
        tree = perfect_tree(W, T, n, budget=budget, merge=False)

    diag = SelectionDiagnostics("recyclable", W.capacity_exact())
    last = ((n - s) // s) * s
    if last != n - s and n - s >= s:
        diag.notes.append(f"last recruit round {last} < n - s = {n - s}")
    excluded = np.zeros(tree.n_nodes, dtype=bool)
    e0 = Fraction(0)
    limit = 2.0 * params.eps * s

    for m in range(s, last + 1, s):
        level = tree.at_depth(m)
        blocked = excluded[level]
        ln_threshold = -(m ** params.recruit_exponent)
        recruits = level[~blocked & (tree.ln_z[level] <= ln_threshold)]
        members = descendants_at_depth(tree, recruits, m + s)
        c_ids, d_ids, e_ids, _ = classify(tree, members, m, params.ln_delta,
                                          lambda sums: sums <= limit)
        if e_ids.size:
            excluded[e_ids] = True
            excluded[tree.descendants_of_all(e_ids)] = True
        a = measure(tree, recruits)
        e = measure(tree, e_ids)
        e0 += e
        note = "" if recruits.size else "empty recruit"
        diag.rounds.append(RoundRecord(m, a, measure(tree, members), measure(tree, c_ids),
                                       measure(tree, d_ids), e, e0, diag.capacity - e0,
                                       note=note))
        diag.recruits[m] = recruits
        diag.retained[m] = e_ids
        logger.debug(f"recyclable m={m}: |A|={recruits.size} |C|={c_ids.size} "
                     f"|D|={d_ids.size} |E|={e_ids.size}")

    kept = [descendants_at_depth(tree, ids, n) for ids in diag.retained.values() if ids.size]
    selected = np.unique(np.concatenate(kept)) if kept else np.empty(0, dtype=np.int64)
    if not diag.rounds:
        diag.notes.append(f"no recruit round fits: n = {n}, s = {s}")
    diag.verify()
    logger.info(f"Recyclable selection n={n}: {selected.size} leaves, "
                f"measure {float(diag.retained_measure):.6g}")
    return selected, diag
