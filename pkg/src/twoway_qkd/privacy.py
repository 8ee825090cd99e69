"""Privacy-amplification fractions built on order-2 Renyi information."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .attacks import HALF_PI
from .errors import DomainError


def tau_lutkenhaus(e: float) -> float:
    """Bits discarded per sifted bit against an individual attack at error rate ``e``.

    ``log2(1 + 4e - 4e**2)`` below 1/2 and 1 from there on.
    """
    e = float(e)
    if not 0.0 <= e <= 1.0:
        raise DomainError(f"error rate must lie in [0, 1], got {e}")
    if e >= 0.5:
        return 1.0
    return math.log2(1 + 4 * e - 4 * e * e)


def tau_array(e) -> np.ndarray:
    """Vectorized :func:`tau_lutkenhaus` that also accepts ``e > 1`` (returns 1).

    Key-rate formulas feed it ``e / beta`` which may exceed 1.
    """
    e = np.asarray(e, dtype=float)
    clipped = np.clip(e, 0.0, 0.5)
    return np.where(e >= 0.5, 1.0, np.log2(1 + 4 * clipped - 4 * clipped * clipped))


def tau_tom(e: float) -> float:
    """Renyi gain of an intercept-resend attack on the two-way protocol: ``2e``.

    Only defined for ``e <= 1/4`` (the whole stream attacked).
    """
    e = float(e)
    if not 0.0 <= e <= 0.25:
        raise DomainError(f"two-way PA fraction is defined on [0, 0.25], got {e}")
    return 2.0 * e


def renyi_entropy_order2(distribution: Sequence[float]) -> float:
    """Collision entropy ``-log2(sum p_i**2)`` in bits."""
    p = np.asarray(distribution, dtype=float)
    if p.ndim != 1 or p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise DomainError("expected a non-empty probability vector summing to 1")
    return float(-math.log2(np.dot(p, p)))


def ir_aposteriori_entropy(x: float) -> float:
    """Eve's a-posteriori Renyi entropy of Alice's encoding after attacking a fraction ``x``.

    Weights: ``1 - x`` unattacked (uniform bit), ``x/2`` attacked in the
    wrong basis (uniform bit), ``x/2`` attacked in the right basis (known bit).
    """
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"attacked fraction must lie in [0, 1], got {x}")
    uniform = renyi_entropy_order2([0.5, 0.5])
    known = renyi_entropy_order2([1.0, 0.0])
    return (1 - x) * uniform + (x / 2) * uniform + (x / 2) * known


def two_photon_renyi_gain(alpha: float) -> float:
    """Eve's Renyi information from a two-photon pulse under coupling ``alpha``."""
    alpha = float(alpha)
    if not -1e-12 <= alpha <= HALF_PI + 1e-12:
        raise DomainError(f"alpha must lie in [0, pi/2], got {alpha}")
    s = math.sin(min(max(alpha, 0.0), HALF_PI))
    return 1 + math.log2(((1 + s) / 2) ** 2 + ((1 - s) / 2) ** 2)
