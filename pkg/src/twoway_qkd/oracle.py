"""Brute-force cross-checks of the analytic formulas and the optimizer.

Each check compares an analytic value against an independent route to the
same number: explicit enumeration of joint outcomes, Monte-Carlo sampling of
an intercept-resend attack, or a dense grid scan over intensities.

Monte-Carlo sampling uses numpy's Philox counter-based generator. A run with
``(seed, samples)`` is split into fixed-size batches; batch ``j`` draws from
the stream ``SeedSequence(seed).spawn(n_batches)[j]``, so results are
bit-reproducible and independent of how batches are scheduled.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .attacks import AttackAngles, PathFidelities, ab_fidelity_two_way, eve_fidelity_two_way
from .channel import ChannelParams, Protocol
from .keyrate import RateMode, rate_curve
from .optimize import optimize_mu
from .photon_stats import MU_MAX, MU_MIN

ENUMERATION_TOL = 1e-12
MC_SIGMAS = 3.0
MC_BATCH = 1 << 16
DENSE_POINTS = 100_000
DENSE_REL_TOL = 1e-3


@dataclass(frozen=True)
class OracleReport:
    check: str
    analytic: float
    oracle: float
    tolerance: float
    samples: Optional[int] = None
    std_error: Optional[float] = None

    @property
    def deviation(self) -> float:
        return abs(self.analytic - self.oracle)

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance


def _agreement(a: PathFidelities, b: PathFidelities, attr: str) -> float:
    """Probability that both path guesses are right or both wrong."""
    total = 0.0
    pa, pb = getattr(a, attr), getattr(b, attr)
    for right_a, right_b in itertools.product((True, False), repeat=2):
        prob = (pa if right_a else 1 - pa) * (pb if right_b else 1 - pb)
        if right_a == right_b:
            total += prob
    return total


def enumerate_two_path_fidelity(angles: AttackAngles) -> list[OracleReport]:
    """Sum the four joint (forward, backward) guess outcomes for Eve and for Bob."""
    fwd = PathFidelities.from_angle(angles.alpha)
    bwd = PathFidelities.from_angle(angles.beta)
    tag = f"alpha={angles.alpha:.6g},beta={angles.beta:.6g}"
    return [
        OracleReport(f"eve_fidelity[{tag}]", eve_fidelity_two_way(angles), _agreement(fwd, bwd, "eve_fidelity"), ENUMERATION_TOL),
        OracleReport(f"ab_fidelity[{tag}]", ab_fidelity_two_way(angles), _agreement(fwd, bwd, "bob_fidelity"), ENUMERATION_TOL),
    ]


def _measure(rng: np.random.Generator, state_basis, state_bit, basis):
    """Projective measurement of a basis eigenstate: exact if bases match, a fair coin otherwise."""
    coin = rng.integers(0, 2, size=state_bit.shape, dtype=np.int8)
    return np.where(state_basis == basis, state_bit, coin)


def _ir_batch(rng: np.random.Generator, n: int, x: float):
    bob_basis = rng.integers(0, 2, n, dtype=np.int8)
    bob_bit = rng.integers(0, 2, n, dtype=np.int8)
    alice_basis = rng.integers(0, 2, n, dtype=np.int8)
    alice_flip = rng.integers(0, 2, n, dtype=np.int8)
    attacked = rng.random(n) < x
    eve_basis = rng.integers(0, 2, n, dtype=np.int8)

    # forward path; Eve measures in her basis and resends her outcome
    eve_fwd = _measure(rng, bob_basis, bob_bit, eve_basis)
    basis = np.where(attacked, eve_basis, bob_basis)
    bit = np.where(attacked, eve_fwd, bob_bit)
    alice_bit = _measure(rng, basis, bit, alice_basis)

    # Alice resends her outcome, flipped by her key bit; Eve attacks again in the same basis
    out_bit = alice_bit ^ alice_flip
    eve_bwd = _measure(rng, alice_basis, out_bit, eve_basis)
    basis = np.where(attacked, eve_basis, alice_basis)
    bit = np.where(attacked, eve_bwd, out_bit)
    bob_out = _measure(rng, basis, bit, bob_basis)

    sifted = alice_basis == bob_basis
    decoded = bob_out ^ bob_bit
    errors = (decoded != alice_flip) & sifted
    hit = attacked & sifted
    conclusive = hit & (eve_basis == bob_basis)
    eve_right = conclusive & ((eve_fwd ^ eve_bwd) == alice_flip)
    return int(sifted.sum()), int(errors.sum()), int(hit.sum()), int(conclusive.sum()), int(eve_right.sum())


def monte_carlo_ir(x: float, samples: int = 1_000_000, seed: int = 42) -> list[OracleReport]:
    """Simulate intercept-resend on both paths of the two-way protocol.

    Bob sends a random basis state; Alice measures in a random basis, flips by
    her key bit and resends; Bob decodes in his basis. On a fraction ``x`` of
    pulses Eve measures both paths in one random basis and resends what she
    saw. Over sifted pulses three quantities are compared with their analytic
    values within three standard errors:

    * the error rate, expected ``x / 4``;
    * the attacked fraction, expected ``x``;
    * the fraction Eve decodes conclusively (her basis matched), expected
      ``x / 2``, the order-2 Renyi gain ``2e``.

    A fourth, exact check confirms Eve's XOR guess is right on every
    conclusive pulse.
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"attacked fraction must lie in [0, 1], got {x}")
    if samples < 10_000:
        raise ValueError(f"need at least 10^4 samples, got {samples}")
    n_batches = -(-samples // MC_BATCH)
    streams = np.random.SeedSequence(seed).spawn(n_batches)
    totals = np.zeros(5, dtype=np.int64)
    for j, stream in enumerate(streams):
        n = min(MC_BATCH, samples - j * MC_BATCH)
        totals += _ir_batch(np.random.Generator(np.random.Philox(stream)), n, x)
    sifted, errors, hit, conclusive, eve_right = (int(v) for v in totals)

    def report(name: str, count: int, expected: float) -> OracleReport:
        p = count / sifted
        se = math.sqrt(max(expected * (1 - expected), 0.0) / sifted)
        return OracleReport(
            f"{name}[x={x:g}]", expected, p, MC_SIGMAS * se if se > 0 else 0.0, samples=sifted, std_error=se
        )

    return [
        report("ir_error_rate", errors, x / 4),
        report("ir_attacked_fraction", hit, x),
        report("ir_conclusive_fraction", conclusive, x / 2),
        OracleReport(f"ir_conclusive_guess_errors[x={x:g}]", 0.0, float(conclusive - eve_right), 0.0, samples=conclusive),
    ]


def dense_grid_mu_check(
    params: ChannelParams,
    distance: float,
    protocol: Protocol | str,
    mode: RateMode | str = RateMode.PESSIMISTIC,
    points: int = DENSE_POINTS,
) -> OracleReport:
    """Compare the optimizer's best rate with a dense log-spaced mu scan.

    When neither route finds a positive rate both report "no key" and the
    check passes.
    """
    protocol, mode = Protocol(protocol), RateMode(mode)
    link = params.at(distance)
    grid = np.geomspace(MU_MIN, MU_MAX, points)
    scan = float(np.max(rate_curve(link, grid, protocol, mode)))
    best = optimize_mu(params, distance, protocol, mode).rate_opt
    name = f"dense_mu[{protocol}/{mode}@{distance:g}km]"
    if scan <= 0 and best <= 0:
        return OracleReport(name + ":no-key", 0.0, 0.0, DENSE_REL_TOL)
    return OracleReport(name, best, scan, DENSE_REL_TOL * abs(scan))
