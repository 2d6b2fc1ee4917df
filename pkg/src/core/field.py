"""Finite field descriptions backed by galois field classes"""
import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import galois
import numpy as np

from src.utils.errors import ValidationError
from src.utils.logger import default_logger as logger

MAX_FIELD_ORDER = 2 ** 16
TABLE_LIMIT = 256
EXHAUSTIVE_DEGREE = 4

_FIELD_CACHE: Dict[Tuple[int, int, Tuple[int, ...]], "FieldSpec"] = {}


class FieldSpec:
    """A finite field F_q, q = p^e, with elements encoded as 0..q-1.

    The integer code of an element is its polynomial-basis representation
    (coefficient of x^j is the j-th base-p digit), which is the encoding
    galois uses for extension fields.
    """

    def __init__(self, p: int, e: int, irreducible: Sequence[int] = ()):
        """
        Initialize a field. Prefer field_make(), which validates and caches.

        Args:
            p: Prime characteristic
            e: Extension degree
            irreducible: Coefficients c_0..c_{e-1} of the monic modulus,
                low to high, leading 1 omitted (empty when e == 1)
        """
        self.p = int(p)
        self.e = int(e)
        self.irreducible = tuple(int(c) for c in irreducible)
        self.q = self.p ** self.e

        if self.e == 1:
            self.gf = galois.GF(self.p)
        else:
            self.gf = galois.GF(
                self.q, irreducible_poly=self.modulus_poly(), verify=False)

        self._tables = None
        if self.q <= TABLE_LIMIT:
            self._tables = self._build_tables()

    def modulus_poly(self) -> galois.Poly:
        """The monic modulus as a galois polynomial over F_p."""
        coeffs = [1] + list(reversed(self.irreducible))
        return galois.Poly(coeffs, field=galois.GF(self.p))

    def _build_tables(self) -> Dict[str, np.ndarray]:
        elements = self.gf(np.arange(self.q))
        add = (elements[:, None] + elements[None, :]).view(np.ndarray)
        mul = (elements[:, None] * elements[None, :]).view(np.ndarray)
        neg = (-elements).view(np.ndarray)
        inv = np.zeros(self.q, dtype=np.int64)
        inv[1:] = (elements[1:] ** -1).view(np.ndarray)
        return {
            "add": add.astype(np.int64),
            "mul": mul.astype(np.int64),
            "neg": neg.astype(np.int64),
            "inv": inv,
        }

    @property
    def has_tables(self) -> bool:
        return self._tables is not None

    @property
    def is_binary(self) -> bool:
        return self.q == 2

    def add(self, a, b):
        """Field addition of codes (scalars or arrays)."""
        if self._tables is not None:
            return self._tables["add"][a, b]
        return (self.gf(a) + self.gf(b)).view(np.ndarray)

    def sub(self, a, b):
        """Field subtraction a - b."""
        if self._tables is not None:
            return self._tables["add"][a, self._tables["neg"][b]]
        return (self.gf(a) - self.gf(b)).view(np.ndarray)

    def mul(self, a, b):
        """Field multiplication of codes."""
        if self._tables is not None:
            return self._tables["mul"][a, b]
        return (self.gf(a) * self.gf(b)).view(np.ndarray)

    def inv(self, a):
        """Multiplicative inverse; zero has none."""
        if np.any(np.asarray(a) == 0):
            raise ZeroDivisionError("zero has no inverse in a field")
        if self._tables is not None:
            return self._tables["inv"][a]
        return (self.gf(a) ** -1).view(np.ndarray)

    def power(self, a: int, k: int) -> int:
        """a**k with the convention 0**0 == 1."""
        if k == 0:
            return 1
        return int(self.gf(a) ** k)

    def array(self, values) -> galois.FieldArray:
        """Wrap integer codes as a galois field array."""
        return self.gf(np.asarray(values, dtype=np.int64))

    def contains(self, x) -> bool:
        arr = np.asarray(x)
        return bool(np.all((arr >= 0) & (arr < self.q)))

    def to_line(self) -> str:
        """Field spec text line `p e c_0 ... c_{e-1}`."""
        return " ".join(str(v) for v in (self.p, self.e) + self.irreducible)

    def to_dict(self) -> dict:
        return {"p": self.p, "e": self.e, "irreducible": list(self.irreducible)}

    @classmethod
    def from_dict(cls, data: dict) -> "FieldSpec":
        return field_make(data["p"], data["e"], data.get("irreducible", ()))

    def _key(self) -> Tuple[int, int, Tuple[int, ...]]:
        return (self.p, self.e, self.irreducible)

    def __eq__(self, other) -> bool:
        return isinstance(other, FieldSpec) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        if self.e == 1:
            return f"GF({self.p})"
        return f"GF({self.p}^{self.e}, {self.modulus_poly()})"


def field_make(p: int, e: int = 1, irreducible: Optional[Iterable[int]] = None,
               verify: Optional[bool] = None) -> FieldSpec:
    """
    Build (or fetch from cache) a validated finite field.

    Args:
        p: Prime characteristic
        e: Extension degree >= 1
        irreducible: c_0..c_{e-1} of the monic degree-e modulus, low to high;
            ignored when e == 1
        verify: Force/skip the irreducibility test (default: test for e <= 4)

    Returns:
        FieldSpec

    Raises:
        ValidationError: non-prime p, bad degree, reducible modulus, q too large
    """
    try:
        p = int(p)
        e = int(e)
    except (TypeError, ValueError):
        raise ValidationError(f"field parameters must be integers, got ({p!r}, {e!r})")
    if p < 2 or not galois.is_prime(p):
        raise ValidationError(f"characteristic {p} is not prime")
    if e < 1:
        raise ValidationError(f"extension degree must be >= 1, got {e}")
    if p ** e > MAX_FIELD_ORDER:
        raise ValidationError(f"field order {p}^{e} exceeds {MAX_FIELD_ORDER}")

    coeffs: Tuple[int, ...] = ()
    if e > 1:
        if irreducible is None:
            return default_field(p ** e)
        coeffs = tuple(int(c) for c in irreducible)
        if len(coeffs) != e:
            raise ValidationError(
                f"degree mismatch: expected {e} coefficients, got {len(coeffs)}")
        if any(c < 0 or c >= p for c in coeffs):
            raise ValidationError(f"modulus coefficients must lie in 0..{p - 1}")

    key = (p, e, coeffs)
    if key in _FIELD_CACHE:
        return _FIELD_CACHE[key]

    if e > 1:
        poly = galois.Poly([1] + list(reversed(coeffs)), field=galois.GF(p))
        check = e <= EXHAUSTIVE_DEGREE if verify is None else verify
        if check:
            if not poly.is_irreducible():
                raise ValidationError(f"modulus {poly} is reducible over GF({p})")
        else:
            logger.warning(
                f"Trusting modulus {poly} over GF({p}) without an irreducibility test")

    field = FieldSpec(p, e, coeffs)
    _FIELD_CACHE[key] = field
    return field


def _prime_power(q: int) -> Tuple[int, int]:
    if q < 2 or not galois.is_prime_power(q):
        raise ValidationError(f"{q} is not a prime power")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    return p, round(math.log(q, p))


def default_field(q: int) -> FieldSpec:
    """
    The field of order q with the lexicographically smallest irreducible modulus.

    Args:
        q: Prime power

    Returns:
        FieldSpec
    """
    p, e = _prime_power(int(q))
    if e == 1:
        return field_make(p, 1)
    poly = galois.irreducible_poly(p, e, method="min")
    coeffs = [int(c) for c in poly.coeffs]
    low_to_high = list(reversed(coeffs[1:]))
    return field_make(p, e, low_to_high, verify=False)


def extension_field(field: FieldSpec, k: int) -> FieldSpec:
    """
    Degree-k extension used by the packaging transformation.

    The result depends only on q^k, so extending twice agrees with extending
    once by the product of the degrees.

    Args:
        field: Ground field
        k: Extension degree >= 1

    Returns:
        FieldSpec of order q^k
    """
    if k < 1:
        raise ValidationError(f"extension degree must be >= 1, got {k}")
    if k == 1:
        return field
    return default_field(field.q ** k)


def parse_field_line(line: str, line_no: Optional[int] = None,
                     source: Optional[str] = None) -> FieldSpec:
    """
    Parse `p e c_0 ... c_{e-1}` (prime fields: `p 1`).

    Raises:
        ValidationError: with the line number when the line is malformed
    """
    parts = line.split()
    try:
        values: List[int] = [int(x) for x in parts]
    except ValueError:
        raise ValidationError(f"non-integer token in field line {line!r}",
                              line=line_no, source=source)
    if len(values) < 2:
        raise ValidationError("field line needs at least `p e`", line=line_no, source=source)
    try:
        return field_make(values[0], values[1], values[2:] if values[1] > 1 else None)
    except ValidationError as exc:
        raise ValidationError(str(exc), line=line_no, source=source)
