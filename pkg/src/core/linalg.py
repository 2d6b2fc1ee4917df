"""Linear algebra over F_q: rank, span membership, incremental elimination"""
from typing import List, Sequence

import numpy as np

from src.core.field import FieldSpec
from src.utils.errors import ValidationError


def as_matrix(field: FieldSpec, rows: Sequence[Sequence[int]]) -> np.ndarray:
    """
    Validate a matrix of field codes and return it as an int64 array.

    Raises:
        ValidationError: ragged rows or entries outside 0..q-1
    """
    rows = [list(r) for r in rows]
    if rows and len({len(r) for r in rows}) != 1:
        raise ValidationError("ragged rows: all rows must have the same length")
    matrix = np.array(rows, dtype=np.int64).reshape(len(rows), len(rows[0]) if rows else 0)
    if matrix.size and not field.contains(matrix):
        raise ValidationError(f"matrix entry out of range for {field!r}")
    return matrix


def mat_rank(field: FieldSpec, rows: Sequence[Sequence[int]]) -> int:
    """
    Rank of a matrix over F_q by Gaussian elimination.

    Args:
        field: Field of the entries
        rows: Rectangular matrix of element codes

    Returns:
        Rank
    """
    matrix = as_matrix(field, rows)
    if matrix.size == 0 or not matrix.any():
        return 0
    return int(np.linalg.matrix_rank(field.array(matrix)))


def in_span(field: FieldSpec, v: Sequence[int], rows: Sequence[Sequence[int]]) -> bool:
    """
    Whether v lies in the row span of rows.

    The zero vector and the zero-length vector are always in the span.

    Raises:
        ValidationError: column count mismatch
    """
    vec = np.asarray(list(v), dtype=np.int64)
    if vec.size and not field.contains(vec):
        raise ValidationError(f"vector entry out of range for {field!r}")
    matrix = as_matrix(field, rows)
    if matrix.shape[0] and matrix.shape[1] != vec.size:
        raise ValidationError(
            f"dimension mismatch: vector has {vec.size} entries, rows have {matrix.shape[1]}")
    if vec.size == 0 or not vec.any():
        return True
    if matrix.shape[0] == 0:
        return False
    stacked = np.vstack([matrix, vec[None, :]])
    return mat_rank(field, stacked) == mat_rank(field, matrix)


class GF2Basis:
    """Incremental elimination basis for GF(2) vectors packed into ints."""

    def __init__(self):
        self.pivots = {}

    def reduce(self, v: int) -> int:
        while v:
            top = v.bit_length() - 1
            b = self.pivots.get(top)
            if b is None:
                return v
            v ^= b
        return 0

    def insert(self, v: int) -> bool:
        """Add v; returns False when v was already in the span."""
        v = self.reduce(v)
        if not v:
            return False
        self.pivots[v.bit_length() - 1] = v
        return True


class FieldBasis:
    """Incremental elimination basis over a general F_q.

    Each stored vector is normalized to 1 at its pivot and has zeros at the
    pivots of vectors stored before it.
    """

    def __init__(self, field: FieldSpec):
        self.field = field
        self.rows: List[np.ndarray] = []
        self.pivots: List[int] = []

    def reduce(self, v: np.ndarray) -> np.ndarray:
        f = self.field
        v = np.array(v, dtype=np.int64)
        for pivot, b in zip(self.pivots, self.rows):
            c = int(v[pivot])
            if c:
                v = f.sub(v, f.mul(c, b))
        return v

    def insert(self, v: np.ndarray) -> bool:
        """Add v; returns False when v was already in the span."""
        v = self.reduce(v)
        nz = np.flatnonzero(v)
        if nz.size == 0:
            return False
        pivot = int(nz[0])
        v = self.field.mul(int(self.field.inv(int(v[pivot]))), v)
        self.rows.append(np.asarray(v, dtype=np.int64))
        self.pivots.append(pivot)
        return True


def pack_gf2_rows(matrix: np.ndarray) -> List[int]:
    """Pack 0/1 rows into ints with bit j holding column j."""
    weights = 1 << np.arange(matrix.shape[1], dtype=object)
    return [int(np.dot(row.astype(object), weights)) for row in matrix]
