"""Poissonian photon-number statistics of a weak coherent source."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError

#: Upper end of every intensity search. Optimal weak-coherent intensities in the
#: regimes studied here stay well below this.
MU_MAX = 2.0
#: Lower end of every intensity search.
MU_MIN = 1e-4

_DIRECT_LIMIT = 20


@dataclass(frozen=True)
class SourceModel:
    """Weak coherent source emitting Poisson-distributed photon numbers.

    Attributes:
        mu: Mean photon number per pulse. ``mu == 0`` is the degenerate
            vacuum source.
    """

    mu: float

    def __post_init__(self) -> None:
        if not (self.mu >= 0.0 and math.isfinite(self.mu)):
            raise DomainError(f"mean photon number must be finite and >= 0, got {self.mu}")


def _as_mu(source: SourceModel | float) -> float:
    if isinstance(source, SourceModel):
        return source.mu
    return SourceModel(float(source)).mu


def pulse_probability(source: SourceModel | float, n: int) -> float:
    """Probability that a pulse carries exactly ``n`` photons.

    Small ``n`` is evaluated directly; beyond that the factorial is
    accumulated in log-space so large photon numbers do not overflow.

    >>> round(pulse_probability(0.1, 1), 7)
    0.0904837
    """
    mu = _as_mu(source)
    if n < 0 or int(n) != n:
        raise DomainError(f"photon count must be a non-negative integer, got {n}")
    n = int(n)
    if mu == 0.0:
        return 1.0 if n == 0 else 0.0
    if n <= _DIRECT_LIMIT:
        return mu**n * math.exp(-mu) / math.factorial(n)
    log_p = n * math.log(mu) - mu - math.fsum(math.log(k) for k in range(2, n + 1))
    return math.exp(log_p)


def multiphoton_tail(source: SourceModel | float | np.ndarray, threshold: int):
    """Probability that a pulse carries at least ``threshold`` photons.

    Equals ``1 - sum(P_i for i < threshold)``; it is evaluated through the
    regularized lower incomplete gamma function, which keeps full relative
    precision for tiny tails at small ``mu`` where the direct subtraction
    cancels. Accepts a scalar or an array of intensities.
    """
    if threshold < 0 or int(threshold) != threshold:
        raise DomainError(f"threshold must be a non-negative integer, got {threshold}")
    if isinstance(source, SourceModel):
        mu = source.mu
    else:
        mu = np.asarray(source, dtype=float)
        if np.any(mu < 0):
            raise DomainError("mean photon number must be >= 0")
    if threshold == 0:
        return np.ones_like(mu) if np.ndim(mu) else 1.0
    tail = special.gammainc(int(threshold), mu)
    return float(tail) if np.ndim(tail) == 0 else tail
