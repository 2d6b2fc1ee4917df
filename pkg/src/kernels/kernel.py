"""Polarization kernels as invertible matrices over F_q"""
from typing import Optional, Sequence

import numpy as np

from src.core.field import FieldSpec, field_make
from src.core.linalg import as_matrix, mat_rank
from src.utils.errors import ValidationError
from src.utils.logger import default_logger as logger


class Kernel:
    """An invertible l-by-l matrix over F_q defining a channel transformation.

    Row i (0-based here) produces synthetic channel i; the decoder resolves
    rows in order, so row i is erased when it is spanned by the later rows
    on the non-erased columns.
    """

    def __init__(self, field: FieldSpec, rows: np.ndarray, name: str = "kernel"):
        """
        Initialize a kernel. Use kernel_load() for validation.

        Args:
            field: Field of the entries
            rows: l x l int64 array of element codes
            name: Label
        """
        self.field = field
        self.rows = np.asarray(rows, dtype=np.int64)
        self.rows.setflags(write=False)
        self.ell = int(self.rows.shape[0])
        self.name = name
        self._table = None

    @property
    def table(self):
        """Erasure-count table, computed once per kernel."""
        if self._table is None:
            from src.kernels.erasure_table import erasure_table
            self._table = erasure_table(self)
        return self._table

    def to_text(self) -> str:
        """Kernel file text: `q ell name` then l rows."""
        lines = [f"{self.field.q} {self.ell} {self.name}"]
        lines += [" ".join(str(int(x)) for x in row) for row in self.rows]
        return "\n".join(lines) + "\n"

    def __eq__(self, other) -> bool:
        return (isinstance(other, Kernel) and self.field == other.field
                and np.array_equal(self.rows, other.rows))

    def __hash__(self) -> int:
        return hash((self.field, self.rows.tobytes()))

    def __repr__(self) -> str:
        return f"Kernel(name={self.name!r}, ell={self.ell}, field={self.field!r})"


def kernel_load(field: FieldSpec, rows: Sequence[Sequence[int]], name: str = "kernel") -> Kernel:
    """
    Validate a square invertible matrix and wrap it as a Kernel.

    Raises:
        ValidationError: non-square, out-of-range entries, singular, l < 2
    """
    matrix = as_matrix(field, rows)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValidationError(f"kernel must be square, got shape {matrix.shape}")
    if matrix.shape[0] < 2:
        raise ValidationError("kernel length must be at least 2")
    if mat_rank(field, matrix) != matrix.shape[0]:
        raise ValidationError(f"kernel {name!r} is singular over {field!r}")
    return Kernel(field, matrix, name)


def arikan_kernel() -> Kernel:
    """[[1,0],[1,1]] over GF(2)."""
    return kernel_load(field_make(2, 1), [[1, 0], [1, 1]], "arikan")


def identity_kernel(field: FieldSpec, ell: int = 2) -> Kernel:
    return kernel_load(field, np.eye(ell, dtype=np.int64), f"identity{ell}")


def rs_kernel(field: FieldSpec) -> Kernel:
    """
    Reed-Solomon kernel of length q: row j evaluates x^(q-j) at every element.

    Later rows span the low-degree polynomials, giving partial distances 1..q.
    """
    q = field.q
    if q < 2:
        raise ValidationError("field too small for a Reed-Solomon kernel")
    rows = [[field.power(x, q - j) for x in range(q)] for j in range(1, q + 1)]
    return kernel_load(field, rows, f"rs{q}")


def random_kernel(field: FieldSpec, ell: int, seed: int) -> Kernel:
    """
    Uniformly random invertible matrix, by rejection sampling.

    Args:
        field: Field of the entries
        ell: Kernel length >= 2
        seed: Seed for numpy's default generator

    Returns:
        Kernel, identical for identical (field, ell, seed)
    """
    if ell < 2:
        raise ValidationError("kernel length must be at least 2")
    rng = np.random.default_rng(seed)
    attempts = 0
    while True:
        attempts += 1
        rows = rng.integers(0, field.q, size=(ell, ell))
        if mat_rank(field, rows) == ell:
            logger.debug(f"random kernel {ell}x{ell} seed={seed} after {attempts} draws")
            return Kernel(field, rows, f"random{ell}-{seed}")


def kernel_kron(first: Kernel, second: Kernel, name: Optional[str] = None) -> Kernel:
    """
    Kronecker product of two kernels over the same field.

    Raises:
        ValidationError: field mismatch
    """
    if first.field != second.field:
        raise ValidationError(
            f"Kronecker factors live over {first.field!r} and {second.field!r}")
    f = first.field
    a, b = first.rows, second.rows
    product = f.mul(a[:, None, :, None], b[None, :, None, :])
    product = np.asarray(product).reshape(first.ell * second.ell, first.ell * second.ell)
    return kernel_load(f, product, name or f"{first.name}x{second.name}")


def kernel_power(kernel: Kernel, k: int) -> Kernel:
    """k-fold Kronecker power."""
    if k < 1:
        raise ValidationError("Kronecker power must be >= 1")
    result = kernel
    for _ in range(k - 1):
        result = kernel_kron(result, kernel)
    if k > 1:
        result.name = f"{kernel.name}^{k}"
    return result
