"""Exhaustive erasure-pattern analysis of a kernel"""
from math import comb
from typing import List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.special import logsumexp

from src.core.field import FieldSpec
from src.core.linalg import FieldBasis, GF2Basis, pack_gf2_rows
from src.utils.errors import BudgetExceededError, InvariantViolation
from src.utils.helpers import log1mexp, worker_count
from src.utils.logger import default_logger as logger

MAX_ENUMERATION_ELL = 20
PARALLEL_FROM_ELL = 14
CHUNK_BITS = 12
DIRECT_EVAL_FLOOR = 1e-6


class ErasureCountTable:
    """Counts A[i][s] of size-s erasure patterns that leave row i undetermined.

    erased_masks[i, S] is True when synthetic channel i is erased under the
    pattern S, where bit j of S marks column j as erased.
    """

    def __init__(self, name: str, counts: np.ndarray, erased_masks: Optional[np.ndarray] = None):
        """
        Args:
            name: Kernel label
            counts: int64 array of shape (l, l + 1)
            erased_masks: bool array of shape (l, 2**l), or None
        """
        self.name = name
        self.counts = np.asarray(counts, dtype=np.int64)
        self.ell = int(self.counts.shape[0])
        self.erased_masks = erased_masks
        with np.errstate(divide='ignore'):
            self.ln_counts = np.log(self.counts.astype(float))

    @property
    def partial_distances(self) -> List[int]:
        """d_i = min{s : A[i][s] > 0}."""
        return [int(np.flatnonzero(row)[0]) for row in self.counts]

    def verify(self) -> None:
        """
        Check the structural identities of an invertible kernel's table.

        Raises:
            InvariantViolation: when any identity fails
        """
        ell = self.ell
        if np.any(self.counts[:, 0] != 0):
            raise InvariantViolation(f"{self.name}: some row is erased by the empty pattern")
        if np.any(self.counts[:, ell] != 1):
            raise InvariantViolation(f"{self.name}: full erasure must erase every row once")
        expected = np.array([s * comb(ell, s) for s in range(ell + 1)], dtype=np.int64)
        if not np.array_equal(self.counts.sum(axis=0), expected):
            raise InvariantViolation(f"{self.name}: column sums differ from s*C(l, s)")

    def to_dict(self) -> dict:
        return {"name": self.name, "counts": self.counts.tolist()}

    def __repr__(self) -> str:
        return f"ErasureCountTable(name={self.name!r}, ell={self.ell})"


def _enumerate_range(rows: np.ndarray, field_data: dict, start: int, stop: int
                     ) -> Tuple[np.ndarray, np.ndarray]:
    """Erasure decisions for patterns start..stop-1, processed from the last row up."""
    ell = rows.shape[0]
    full = (1 << ell) - 1
    counts = np.zeros((ell, ell + 1), dtype=np.int64)
    masks = np.zeros((ell, stop - start), dtype=bool)

    binary = field_data["p"] == 2 and field_data["e"] == 1
    if binary:
        packed = pack_gf2_rows(rows)
    else:
        field = FieldSpec.from_dict(field_data)
        bit_index = np.arange(ell)

    for pattern in range(start, stop):
        size = bin(pattern).count("1")
        keep = full ^ pattern
        erased_here = 0
        if binary:
            basis = GF2Basis()
            for i in range(ell - 1, -1, -1):
                if not basis.insert(packed[i] & keep):
                    masks[i, pattern - start] = True
                    counts[i, size] += 1
                    erased_here += 1
        else:
            keep_vec = ((keep >> bit_index) & 1).astype(np.int64)
            basis = FieldBasis(field)
            for i in range(ell - 1, -1, -1):
                if not basis.insert(rows[i] * keep_vec):
                    masks[i, pattern - start] = True
                    counts[i, size] += 1
                    erased_here += 1
        if erased_here != size:
            raise InvariantViolation(
                f"pattern {pattern:#x} erased {erased_here} rows but has {size} erasures")
    return counts, masks


def erasure_table(kernel, keep_masks: bool = True, n_jobs: Optional[int] = None) -> ErasureCountTable:
    """
    Enumerate all 2^l erasure patterns of a kernel.

    Row i is erased under S iff its restriction to the surviving columns lies
    in the span of the restrictions of rows i+1..l.

    Args:
        kernel: Kernel to analyze
        keep_masks: Keep the per-pattern bitmaps used by the simulator
        n_jobs: joblib workers for l >= 14 (default: POLARFORGE_THREADS or all cores)

    Returns:
        ErasureCountTable

    Raises:
        BudgetExceededError: l > 20
        InvariantViolation: a pattern violates per-pattern conservation
    """
    ell = kernel.ell
    if ell > MAX_ENUMERATION_ELL:
        raise BudgetExceededError(
            f"kernel length {ell} exceeds the {MAX_ENUMERATION_ELL}-column enumeration limit")
    total = 1 << ell
    field_data = kernel.field.to_dict()
    rows = np.asarray(kernel.rows)

    if ell < PARALLEL_FROM_ELL:
        counts, masks = _enumerate_range(rows, field_data, 0, total)
    else:
        step = 1 << CHUNK_BITS
        bounds = [(lo, min(lo + step, total)) for lo in range(0, total, step)]
        logger.info(f"Enumerating {total} erasure patterns of {kernel.name} in {len(bounds)} chunks")
        parts = Parallel(n_jobs=worker_count(n_jobs))(
            delayed(_enumerate_range)(rows, field_data, lo, hi) for lo, hi in bounds)
        counts = sum(p[0] for p in parts)
        masks = np.concatenate([p[1] for p in parts], axis=1)

    table = ErasureCountTable(kernel.name, counts, masks if keep_masks else None)
    logger.debug(f"Erasure table for {kernel.name}: d = {table.partial_distances}")
    return table


def child_ln_eps(table: ErasureCountTable, ln_eps) -> np.ndarray:
    """
    ln of the synthetic erasure probabilities for an array of parent ln(epsilon).

    eps_i = sum_s A[i][s] eps^s (1 - eps)^(l - s), evaluated directly for
    eps >= 1e-6 and by logsumexp below.

    Args:
        table: Erasure-count table
        ln_eps: Parent ln(epsilon), any shape

    Returns:
        Array of shape ln_eps.shape + (l,)
    """
    ln_eps = np.asarray(ln_eps, dtype=float)
    flat = ln_eps.reshape(-1)
    ell = table.ell
    s = np.arange(ell + 1, dtype=float)
    out = np.empty((flat.size, ell))

    direct = np.exp(flat) >= DIRECT_EVAL_FLOOR
    if direct.any():
        eps = np.exp(flat[direct])
        powers = eps[:, None] ** s[None, :] * (1.0 - eps[:, None]) ** (ell - s)[None, :]
        with np.errstate(divide='ignore'):
            out[direct] = np.log(powers @ table.counts.T.astype(float))

    tiny = ~direct
    if tiny.any():
        x = flat[tiny][:, None]
        ln_keep = log1mexp(flat[tiny])[:, None]
        with np.errstate(invalid='ignore'):
            terms = (np.where(s == 0, 0.0, s[None, :] * x)
                     + np.where(s == ell, 0.0, (ell - s)[None, :] * ln_keep))
        terms = terms[:, None, :] + table.ln_counts[None, :, :]
        with np.errstate(divide='ignore'):
            out[tiny] = logsumexp(terms, axis=-1)

    return np.minimum(out, 0.0).reshape(ln_eps.shape + (ell,))
