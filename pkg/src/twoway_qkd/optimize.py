"""Per-distance intensity optimization, distance sweeps and the k-ratio condition."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .channel import ChannelParams, Protocol
from .errors import DomainError
from .keyrate import RateMode, RatePoint, key_rate, rate_curve
from .photon_stats import MU_MAX, MU_MIN

COARSE_POINTS = 200
MU_TOL = 1e-6
DISTANCE_TOL = 0.01
INV_PHI = (math.sqrt(5) - 1) / 2


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float = MU_TOL) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[lo, hi]`` until the bracket is narrower than ``tol``."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


@dataclass(frozen=True)
class Optimum:
    """Best intensity at one distance. ``positive`` is False when no mu yields key."""

    mu_opt: float
    rate_opt: float
    point: RatePoint

    @property
    def positive(self) -> bool:
        return self.rate_opt > 0


def optimize_mu(
    params: ChannelParams,
    distance: float,
    protocol: Protocol | str,
    mode: RateMode | str = RateMode.PESSIMISTIC,
    mu_bounds: tuple[float, float] = (MU_MIN, MU_MAX),
) -> Optimum:
    """Maximize the key rate over mu.

    A log-spaced coarse scan brackets the best grid point (the rate need not
    be unimodal over the whole range), then golden-section search refines it
    inside the neighbouring grid cells.
    """
    protocol, mode = Protocol(protocol), RateMode(mode)
    link = params.at(distance)
    lo, hi = mu_bounds
    grid = np.geomspace(lo, hi, COARSE_POINTS)
    rates = rate_curve(link, grid, protocol, mode)
    i = int(np.nanargmax(rates))
    left, right = grid[max(i - 1, 0)], grid[min(i + 1, COARSE_POINTS - 1)]

    def f(mu: float) -> float:
        return float(rate_curve(link, np.array([mu]), protocol, mode)[0])

    mu_best, rate_best = golden_section_max(f, left, right)
    if rates[i] > rate_best:
        mu_best, rate_best = float(grid[i]), float(rates[i])
    point = key_rate(link, mu_best, protocol, mode)
    return Optimum(mu_opt=float(mu_best), rate_opt=point.rate, point=point)


@dataclass(frozen=True)
class SufficientCondition:
    threshold: float
    k: float

    @property
    def holds(self) -> bool:
        return self.k > self.threshold


def check_sufficient_condition(params: ChannelParams, distance: float, k: float) -> SufficientCondition:
    """Threshold ``10**(gamma l / 10) / eta_alice`` on the optimal-intensity ratio.

    ``k = mu_opt(ToM) / mu_opt(BB84)`` above it guarantees ToM's gain exceeds
    BB84's, which in turn makes ToM's rate the larger one.
    """
    if not k > 0:
        raise DomainError(f"k must be > 0, got {k}")
    threshold = 10.0 ** (params.gamma * distance / 10.0) / params.eta_alice
    return SufficientCondition(threshold=threshold, k=float(k))


@dataclass
class SweepResult:
    """Optimized rate curves over a distance grid.

    ``points`` maps each protocol to its per-distance optimum in grid order.
    ``max_distance`` holds the zero crossing of each optimized rate (None if
    the rate never changes sign on the grid). ``ratio_k`` and ``crossover``
    are filled only when both protocols were swept.
    """

    params: ChannelParams
    mode: RateMode
    distances: list[float]
    points: dict[Protocol, list[RatePoint]] = field(default_factory=dict)
    max_distance: dict[Protocol, Optional[float]] = field(default_factory=dict)
    ratio_k: list[Optional[float]] = field(default_factory=list)
    crossover: Optional[float] = None

    def rates(self, protocol: Protocol | str) -> np.ndarray:
        return np.array([p.rate for p in self.points[Protocol(protocol)]])

    def mus(self, protocol: Protocol | str) -> np.ndarray:
        return np.array([p.mu for p in self.points[Protocol(protocol)]])

    @property
    def has_positive_rate(self) -> bool:
        return any(p.rate > 0 for pts in self.points.values() for p in pts)


def _bisect(f: Callable[[float], float], a: float, b: float, tol: float = DISTANCE_TOL) -> float:
    fa = f(a)
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _optimize_row(args) -> list[RatePoint]:
    params, distance, protocols, mode = args
    return [optimize_mu(params, distance, p, mode).point for p in protocols]


def sweep(
    params: ChannelParams,
    distances: Iterable[float],
    protocols: Sequence[Protocol | str] = (Protocol.BB84, Protocol.TOM),
    mode: RateMode | str = RateMode.PESSIMISTIC,
    workers: int = 1,
) -> SweepResult:
    """Optimize mu at every grid distance for each protocol.

    Distances are independent; with ``workers > 1`` they are evaluated in a
    process pool and reassembled in grid order, so results do not depend on
    the worker count.
    """
    grid = [float(d) for d in distances]
    if not grid:
        raise DomainError("distance grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("distance grid must be strictly increasing")
    protocols = [Protocol(p) for p in protocols]
    mode = RateMode(mode)
    jobs = [(params, d, protocols, mode) for d in grid]
    if workers > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_optimize_row, jobs, chunksize=max(1, len(grid) // (4 * workers))))
    else:
        rows = [_optimize_row(job) for job in jobs]

    result = SweepResult(params=params, mode=mode, distances=grid)
    for j, protocol in enumerate(protocols):
        result.points[protocol] = [row[j] for row in rows]

    for protocol in protocols:
        rates = result.rates(protocol)
        result.max_distance[protocol] = None
        for i in range(len(grid) - 1):
            if rates[i] > 0 >= rates[i + 1]:
                result.max_distance[protocol] = _bisect(
                    lambda d: optimize_mu(params, d, protocol, mode).rate_opt, grid[i], grid[i + 1]
                )

    if Protocol.BB84 in protocols and Protocol.TOM in protocols:
        for b, t in zip(result.points[Protocol.BB84], result.points[Protocol.TOM]):
            result.ratio_k.append(t.mu / b.mu)
        result.crossover = find_crossover(result)
    return result


def _rate_gap(params: ChannelParams, distance: float, mode: RateMode) -> float:
    return optimize_mu(params, distance, Protocol.TOM, mode).rate_opt - optimize_mu(
        params, distance, Protocol.BB84, mode
    ).rate_opt


def find_crossover(result: SweepResult) -> Optional[float]:
    """First distance where the sign of ``R_ToM - R_BB84`` flips, bisected to 0.01 km."""
    gap = result.rates(Protocol.TOM) - result.rates(Protocol.BB84)
    for i in range(len(gap) - 1):
        if (gap[i] > 0) != (gap[i + 1] > 0):
            return _bisect(
                lambda d: _rate_gap(result.params, d, result.mode),
                result.distances[i],
                result.distances[i + 1],
            )
    return None


def sign_changes(values: Sequence[float]) -> int:
    signs = [v > 0 for v in values]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def distance_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive grid ``start, start + step, ..., stop`` free of accumulated round-off."""
    if not (step > 0 and stop > start):
        raise DomainError("distance grid needs start < stop and step > 0")
    n = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 10) for i in range(n + 1)]
