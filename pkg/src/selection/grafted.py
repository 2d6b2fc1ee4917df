"""Retain step of the disposable template on a grafted tree"""
from fractions import Fraction
from typing import Tuple

import numpy as np

from src.construction.code_parameters import error_bound
from src.construction.grafting import GraftedTree
from src.models.selection import RoundRecord, SelectionDiagnostics, SelectionParams
from src.selection.disposable import retain_limit
from src.selection.training import classify, descendants_at_depth, measure
from src.utils.errors import ValidationError
from src.utils.logger import default_logger as logger


def select_on_grafted(
    grafted: GraftedTree,
    params: SelectionParams,
    frontier_round: bool = True
) -> Tuple[np.ndarray, SelectionDiagnostics]:
    """
    Classify the leaves below every grafted vertex into C, D and E.

    The recruits of each round come from the grafting bookkeeping; the
    windows run through the T_C^k step and the error-kernel subtree, and the
    retain bound uses the error kernel's length. Unrecruited stock vertices
    at depth n_rat form a final round unless frontier_round is False.
    With k = 1 and the same kernel for stock and grafts, frontier_round=False
    reproduces select_disposable round by round; the frontier round only adds
    leaves the disposable template never trains.

    Args:
        grafted: Output of build_grafted_tree
        params: Constants picked for the error kernel (mode 'graft')
        frontier_round: Classify the frontier grafts as a last round

    Returns:
        (A_n leaf ids, diagnostics); diagnostics.notes carry ln P, which
        already counts each packaged symbol k times through N
    """
    if params.n != grafted.n:
        raise ValidationError(f"params are for n = {params.n}, tree has n = {grafted.n}")
    tree = grafted.tree
    n = grafted.n
    ell_err = tree.kernels[tree.roles["error"]].ell
    diag = SelectionDiagnostics("graft", tree.root_channel.capacity_exact())
    diag.notes.extend(grafted.notes)

    rounds = [(m, grafted.recruits[m], "") for m in grafted.rounds]
    if frontier_round and grafted.frontier.size:
        rounds.append((grafted.n_rat, grafted.frontier, "frontier"))

    a0 = Fraction(0)
    e0 = Fraction(0)
    for m, recruits, note in rounds:
        members = descendants_at_depth(tree, recruits, n)
        limit = retain_limit(params, ell_err, m)
        c_ids, d_ids, e_ids, _ = classify(tree, members, m, params.ln_delta,
                                          lambda sums: sums <= limit)
        a = measure(tree, recruits)
        e = measure(tree, e_ids)
        a0 += a
        e0 += e
        if not recruits.size:
            note = note or "empty recruit"
        diag.rounds.append(RoundRecord(m, a, measure(tree, members), measure(tree, c_ids),
                                       measure(tree, d_ids), e, e0, diag.capacity - e0,
                                       a0=a0, f=diag.capacity - a0, note=note))
        key = m if note != "frontier" else -m
        diag.recruits[key] = recruits
        diag.retained[key] = e_ids

    kept = [ids for ids in diag.retained.values() if ids.size]
    selected = np.unique(np.concatenate(kept)) if kept else np.empty(0, dtype=np.int64)
    diag.verify()
    ln_p = error_bound(tree, selected)
    diag.notes.append(f"ln P = {ln_p:.6g} (k = {grafted.k})")
    logger.info(f"Grafted selection n={n}, k={grafted.k}: {selected.size} leaves, ln P {ln_p:.4g}")
    return selected, diag
