"""Constructors and transformations of q-ary erasure channels"""
import math

import numpy as np

from src.core.field import FieldSpec, extension_field
from src.models.erasure_channel import ErasureChannel
from src.utils.errors import ValidationError
from src.utils.helpers import log1mexp

# Below this ln(epsilon), 1 - (1 - epsilon)^k is k*epsilon to double precision
_LINEAR_REGIME_LN = -40.0


def qec_make(field: FieldSpec, epsilon: float) -> ErasureChannel:
    """
    Build the q-ary erasure channel with erasure probability epsilon.

    Args:
        field: Alphabet
        epsilon: Erasure probability in [0, 1]

    Returns:
        ErasureChannel with Z = epsilon and I = 1 - epsilon
    """
    return ErasureChannel(field, epsilon=epsilon)


def power_ln_epsilon(ln_epsilon: float, k: int) -> float:
    """ln(1 - (1 - e^x)^k) evaluated without cancellation."""
    if k == 1 or ln_epsilon == -math.inf:
        return ln_epsilon
    if ln_epsilon < _LINEAR_REGIME_LN:
        return math.log(k) + ln_epsilon
    ln_keep = log1mexp(ln_epsilon)
    if ln_keep == -math.inf:
        return 0.0
    return float(log1mexp(k * ln_keep))


def power_channel(ch: ErasureChannel, k: int) -> ErasureChannel:
    """
    Package k uses of ch into one use over the degree-k extension field.

    A packaged symbol is erased iff any of its k ground symbols is erased,
    so epsilon' = 1 - (1 - epsilon)^k.

    Args:
        ch: Ground channel
        k: Packaging degree >= 1

    Returns:
        ErasureChannel over F_{q^k}
    """
    if int(k) != k or k < 1:
        raise ValidationError(f"power k must be an integer >= 1, got {k!r}")
    if k == 1:
        return ch
    field = extension_field(ch.field, k)
    return ErasureChannel(field, ln_epsilon=power_ln_epsilon(ch.ln_epsilon, int(k)))


def power_ln_epsilon_array(ln_epsilon, k: int) -> np.ndarray:
    """Vectorized power_ln_epsilon."""
    x = np.asarray(ln_epsilon, dtype=float)
    if k == 1:
        return x.copy()
    with np.errstate(invalid='ignore'):
        packaged = log1mexp(k * log1mexp(x))
        out = np.where(x < _LINEAR_REGIME_LN, math.log(k) + x, packaged)
    return np.minimum(out, 0.0)
