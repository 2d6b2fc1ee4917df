"""The disposable template: recruit once, train to depth n, retain or discard"""
import math
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from src.analysis.feasibility import feasible_thm5
from src.construction.grafting import disposable_recruit_ln, rational_depth, round_step
from src.construction.tree_builder import perfect_tree
from src.kernels.constants import DisposableConstants, pick_constants_disposable
from src.kernels.kernel import Kernel
from src.kernels.kernel_analyzer import kernel_dice
from src.models.channel_tree import NODE_BUDGET, ChannelTree
from src.models.erasure_channel import ErasureChannel
from src.models.selection import RoundRecord, SelectionDiagnostics, SelectionParams
from src.selection.training import classify, descendants_at_depth, measure
from src.utils.errors import InfeasibleTargetError
from src.utils.logger import default_logger as logger


def disposable_params(kernel: Kernel, n: int, mu_star: float, beta_p: float, mu_p: float,
                      constants: Optional[DisposableConstants] = None,
                      mode: str = "disposable") -> SelectionParams:
    """SelectionParams for the disposable template, picking constants if not given."""
    constants = constants or pick_constants_disposable(
        kernel_dice(kernel), kernel.ell, mu_star, beta_p, mu_p, kernel=kernel)
    return SelectionParams(n=n, s=round_step(n), mode=mode, eps=constants.eps,
                           ln_delta=constants.ln_delta, beta_p=beta_p, mu_p=mu_p,
                           mu_star=mu_star, n_rat=rational_depth(n, mu_star, mu_p))


def retain_limit(params: SelectionParams, ell: int, m: int) -> float:
    """Window dice sum at or below which a trained vertex is discarded.

    (n - m)(beta' log l / (1 - m/n) + eps) = n beta' log l + (n - m) eps.
    """
    return params.n * params.beta_p * math.log(ell) + (params.n - m) * params.eps


def select_disposable(
    W: ErasureChannel,
    T: Kernel,
    params: SelectionParams,
    tree: Optional[ChannelTree] = None,
    budget: int = NODE_BUDGET
) -> Tuple[np.ndarray, SelectionDiagnostics]:
    """
    Run the disposable template on the perfect tree of depth n.

    For m = s, 2s, ... <= n_rat: A_m are depth-m vertices with
    Z < exp(-exp(m^(1/3))) and no ancestor in A_0; B_m are their depth-n
    descendants; C_m hit Z >= delta between depth m and n; D_m fail the
    window dice-sum bound; A_n is the union of the E_m.

    Raises:
        InfeasibleTargetError: (beta', mu') outside the region, checked
            before any tree is built
        BudgetExceededError: tree over budget
    """
    dice = kernel_dice(T)
    verdict = feasible_thm5(dice, T.ell, params.mu_star, params.beta_p, params.mu_p)
    if not verdict.feasible:
        raise InfeasibleTargetError(
            f"(beta'={params.beta_p}, 1/mu'={1 / params.mu_p:.4g}) fails the feasibility "
            f"predicate for {T.name} (margin {verdict.margin:.3g})")
    n, s = params.n, params.s
    n_rat = min(params.n_rat, n)
    if tree is None:
        tree = perfect_tree(W, T, n, budget=budget, merge=False)

    diag = SelectionDiagnostics("disposable", W.capacity_exact())
    if n_rat != params.n_rat:
        diag.notes.append(f"n_rat capped from {params.n_rat} to n = {n}")
    last = (n_rat // s) * s
    if last != n_rat:
        diag.notes.append(f"last recruit round {last} < n_rat = {n_rat}")

    taken = np.zeros(tree.n_nodes, dtype=bool)
    a0 = Fraction(0)
    e0 = Fraction(0)
    for m in range(s, last + 1, s):
        level = tree.at_depth(m)
        ln_threshold = disposable_recruit_ln(m, params.recruit_exponent)
        recruits = level[~taken[level] & (tree.ln_z[level] < ln_threshold)]
        if recruits.size:
            taken[recruits] = True
            taken[tree.descendants_of_all(recruits)] = True
        members = descendants_at_depth(tree, recruits, n)
        limit = retain_limit(params, T.ell, m)
        c_ids, d_ids, e_ids, _ = classify(tree, members, m, params.ln_delta,
                                          lambda sums: sums <= limit)
        a = measure(tree, recruits)
        e = measure(tree, e_ids)
        a0 += a
        e0 += e
        diag.rounds.append(RoundRecord(m, a, measure(tree, members), measure(tree, c_ids),
                                       measure(tree, d_ids), e, e0, diag.capacity - e0,
                                       a0=a0, f=diag.capacity - a0,
                                       note="" if recruits.size else "empty recruit"))
        diag.recruits[m] = recruits
        diag.retained[m] = e_ids
        logger.debug(f"disposable m={m}: |A|={recruits.size} |C|={c_ids.size} "
                     f"|D|={d_ids.size} |E|={e_ids.size}")

    kept = [ids for ids in diag.retained.values() if ids.size]
    selected = np.unique(np.concatenate(kept)) if kept else np.empty(0, dtype=np.int64)
    if not diag.rounds:
        diag.notes.append(f"no recruit round fits: n_rat = {n_rat}, s = {s}")
        logger.warning(diag.notes[-1])
    diag.verify()
    logger.info(f"Disposable selection n={n}, n_rat={n_rat}: {selected.size} leaves")
    return selected, diag
