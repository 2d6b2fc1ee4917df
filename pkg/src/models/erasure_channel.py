"""Erasure channel model"""
import math
from fractions import Fraction
from typing import Optional

from src.core.field import FieldSpec
from src.utils.errors import ValidationError


class ErasureChannel:
    """A q-ary erasure channel over a finite field.

    The erasure probability is stored both linearly and as ln(epsilon);
    the logarithm is authoritative once epsilon underflows a double.
    Capacity is measured in q-ary symbols, so I(W) + Z(W) = 1.
    """

    __slots__ = ("field", "epsilon", "ln_epsilon")

    def __init__(
        self,
        field: FieldSpec,
        epsilon: Optional[float] = None,
        ln_epsilon: Optional[float] = None
    ):
        """
        Initialize an erasure channel.

        Args:
            field: Input alphabet
            epsilon: Erasure probability in [0, 1]
            ln_epsilon: Natural log of the erasure probability (<= 0), used
                instead of epsilon for doubly small channels
        """
        if (epsilon is None) == (ln_epsilon is None):
            raise ValidationError("give exactly one of epsilon and ln_epsilon")
        if epsilon is not None:
            epsilon = float(epsilon)
            if not (0.0 <= epsilon <= 1.0):
                raise ValidationError(f"epsilon must lie in [0, 1], got {epsilon}")
            ln_epsilon = math.log(epsilon) if epsilon > 0 else -math.inf
        else:
            ln_epsilon = float(ln_epsilon)
            if math.isnan(ln_epsilon) or ln_epsilon > 1e-12:
                raise ValidationError(f"ln epsilon must be <= 0, got {ln_epsilon}")
            ln_epsilon = min(ln_epsilon, 0.0)
            epsilon = math.exp(ln_epsilon)
        self.field = field
        self.epsilon = epsilon
        self.ln_epsilon = ln_epsilon

    @property
    def z_param(self) -> float:
        """Bhattacharyya parameter; equals epsilon over erasure channels."""
        return self.epsilon

    @property
    def ln_z(self) -> float:
        return self.ln_epsilon

    @property
    def capacity(self) -> float:
        """Symmetric capacity in q-ary units."""
        return 1.0 - self.epsilon

    def capacity_exact(self) -> Fraction:
        """Capacity as an exact rational of the stored double."""
        return 1 - Fraction(self.epsilon)

    @property
    def q(self) -> int:
        return self.field.q

    def to_dict(self) -> dict:
        return {
            "field": self.field.to_dict(),
            "epsilon": self.epsilon,
            "ln_epsilon": self.ln_epsilon,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ErasureChannel":
        return cls(FieldSpec.from_dict(data["field"]), ln_epsilon=data["ln_epsilon"])

    def __eq__(self, other) -> bool:
        return (isinstance(other, ErasureChannel) and self.field == other.field
                and self.ln_epsilon == other.ln_epsilon)

    def __hash__(self) -> int:
        return hash((self.field, self.ln_epsilon))

    def __repr__(self) -> str:
        if self.epsilon > 0 or self.ln_epsilon == -math.inf:
            return f"ErasureChannel(q={self.q}, epsilon={self.epsilon:.6g})"
        return f"ErasureChannel(q={self.q}, ln_epsilon={self.ln_epsilon:.6g})"
