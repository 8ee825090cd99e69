"""Independent ancilla attacks on the two-way toy protocol.

Eve couples a fresh two-dimensional ancilla to the travelling qubit on each
path: with strength ``alpha`` on the forward (Bob to Alice) path and ``beta``
on the backward path. On a single path the legitimate state fidelity is
``(1 + cos theta) / 2`` and Eve's guessing fidelity is ``(1 + sin theta) / 2``;
these single-path values are taken as given, not re-derived from the unitary.

Alice's encoding is the XOR of the forward and backward bit values, so Eve
guesses it correctly exactly when she is right on both paths or wrong on both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError

HALF_PI = math.pi / 2
_ANGLE_SLACK = 1e-12


def _check_angle(name: str, value: float) -> float:
    value = float(value)
    if not (-_ANGLE_SLACK <= value <= HALF_PI + _ANGLE_SLACK):
        raise DomainError(f"{name} must lie in [0, pi/2], got {value}")
    return min(max(value, 0.0), HALF_PI)


@dataclass(frozen=True)
class AttackAngles:
    """Interaction strengths of Eve's forward and backward ancillas (radians)."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", _check_angle("alpha", self.alpha))
        object.__setattr__(self, "beta", _check_angle("beta", self.beta))

    @classmethod
    def symmetric(cls, angle: float) -> "AttackAngles":
        return cls(angle, angle)


@dataclass(frozen=True)
class PathFidelities:
    """Single-path fidelities for an ancilla coupling of strength ``theta``."""

    bob_fidelity: float
    eve_fidelity: float

    @classmethod
    def from_angle(cls, theta: float) -> "PathFidelities":
        theta = _check_angle("theta", theta)
        return cls((1 + math.cos(theta)) / 2, (1 + math.sin(theta)) / 2)


def eve_fidelity_two_way(angles: AttackAngles) -> float:
    """Probability that Eve guesses Alice's transformation correctly."""
    return (1 + math.sin(angles.alpha) * math.sin(angles.beta)) / 2


def ab_fidelity_two_way(angles: AttackAngles) -> float:
    """Probability that Alice and Bob share the bit; ``1 -`` this is the disturbance."""
    return (1 + math.cos(angles.alpha) * math.cos(angles.beta)) / 2


def disturbance_two_way(angles: AttackAngles) -> float:
    return 1.0 - ab_fidelity_two_way(angles)


@dataclass(frozen=True)
class OptimalityReport:
    """Outcome of a grid search over equal-disturbance attack pairs."""

    phi: float
    max_fidelity: float
    argmax: tuple[float, float]
    equal_angle_fidelity: float
    grid_step: float
    n_feasible: int

    @property
    def argmax_distance(self) -> float:
        """Largest coordinate offset of the argmax from ``(phi, phi)``."""
        return max(abs(self.argmax[0] - self.phi), abs(self.argmax[1] - self.phi))

    @property
    def holds(self) -> bool:
        return (
            self.argmax_distance <= self.grid_step + 1e-12
            and abs(self.max_fidelity - self.equal_angle_fidelity) <= self.grid_step
            and self.max_fidelity <= self.equal_angle_fidelity + 1e-12
        )


def verify_equal_angle_optimality(phi: float, resolution: int = 1000) -> OptimalityReport:
    """Search all attack pairs with disturbance ``sin(phi)**2 / 2`` for Eve's best.

    The forward angle runs over a uniform grid of ``resolution + 1`` points on
    ``[0, pi/2]``; for each one the backward angle is solved exactly from
    ``cos(alpha) * cos(beta) = cos(phi)**2``. Pairs with no solution are skipped.
    """
    phi = _check_angle("phi", phi)
    if resolution < 100:
        raise DomainError(f"resolution must be >= 100, got {resolution}")
    step = HALF_PI / resolution
    target = math.cos(phi) ** 2
    alphas = np.linspace(0.0, HALF_PI, resolution + 1)
    cos_a = np.cos(alphas)
    cos_a[-1] = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(cos_a > 0, target / cos_a, np.where(target <= 1e-15, 0.0, np.inf))
    # round-off at the end points of the feasible range
    ratio = np.where((ratio > 1.0) & (ratio < 1.0 + 1e-12), 1.0, ratio)
    feasible = ratio <= 1.0
    betas = np.arccos(np.clip(ratio[feasible], 0.0, 1.0))
    alphas = alphas[feasible]
    fidelities = (1 + np.sin(alphas) * np.sin(betas)) / 2
    best = int(np.argmax(fidelities))
    return OptimalityReport(
        phi=phi,
        max_fidelity=float(fidelities[best]),
        argmax=(float(alphas[best]), float(betas[best])),
        equal_angle_fidelity=(1 + math.sin(phi) ** 2) / 2,
        grid_step=step,
        n_feasible=int(feasible.sum()),
    )


def binary_entropy(p: float) -> float:
    """Shannon entropy of a biased coin in bits, with ``0 log 0 = 0``."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability must lie in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


@dataclass(frozen=True)
class InfoCurves:
    """Mutual informations at one disturbance level. ``i_ir`` is None past e = 1/4."""

    e: float
    i_ab: float
    i_tom: float
    i_ir: Optional[float]
    i_bb84: float


def mutual_info_curves(e: float) -> InfoCurves:
    """Alice-Bob and Alice-Eve informations as functions of the disturbance ``e``.

    The Eve curves follow from the guessing fidelities at matched disturbance:

    * two-way ancilla attack with equal angles: ``e = sin(a)**2 / 2`` and Eve's
      fidelity is ``(1 + 2e) / 2``, so her error is ``(1 - 2e) / 2``;
    * one-way BB84 ancilla attack: ``e = (1 - cos a) / 2`` gives
      ``sin a = 2 sqrt(e (1 - e))`` and error ``(1 - sin a) / 2``;
    * intercept-resend on a fraction ``x = 4e`` with full knowledge of the
      attacked fraction, defined only while ``x <= 1``.
    """
    e = float(e)
    if not 0.0 <= e <= 0.5:
        raise DomainError(f"disturbance must lie in [0, 1/2], got {e}")
    i_ab = 1.0 - binary_entropy(e)
    i_tom = 1.0 - binary_entropy((1 - 2 * e) / 2)
    i_bb84 = 1.0 - binary_entropy((1 - 2 * math.sqrt(e * (1 - e))) / 2)
    i_ir = 4 * e if e <= 0.25 else None
    return InfoCurves(e=e, i_ab=i_ab, i_tom=i_tom, i_ir=i_ir, i_bb84=i_bb84)
