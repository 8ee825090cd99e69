"""Secure key rates for BB84 and the two-way toy protocol (ToM).

Two rate modes are provided:

``pessimistic``
    Only pulses that are safe from photon-number splitting contribute to the
    key: single-photon pulses for BB84 and pulses with at most two photons for
    ToM (three or more photons always allow Eve a conclusive measurement after
    basis revelation). The secure fraction ``beta`` is computed by assuming
    every multiphoton pulse is detected.

``resolved``
    Alice and Bob know the contributing photon numbers (infinite-decoy
    limit), so one-photon and, for ToM, two-photon yields are used directly.

All rates are per emitted pulse and include the 1/2 sifting factor. Negative
values mean no secure key and are returned as-is so that sweeps can locate
the maximum secure distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import ChannelParams, Protocol, _gain_qber_arrays, effective_transmission
from .errors import DomainError, UndefinedRateError
from .photon_stats import SourceModel, multiphoton_tail
from .privacy import tau_array


class RateMode(str, Enum):
    PESSIMISTIC = "pessimistic"
    RESOLVED = "resolved"

    def __str__(self) -> str:
        return self.value


#: Smallest photon number a PNS attack can exploit, per protocol.
UNSAFE_PHOTON_NUMBER = {Protocol.BB84: 2, Protocol.TOM: 3}


@dataclass(frozen=True)
class RatePoint:
    """One evaluated (distance, mu) operating point.

    ``beta`` is the secure fraction of detections: the PNS-safe fraction in
    pessimistic mode, ``(p_1 [+ p_2]) / gain`` in resolved mode.
    """

    distance: float
    mu: float
    gain: float
    qber: float
    beta: float
    rate: float
    protocol: Protocol = Protocol.BB84
    mode: RateMode = RateMode.PESSIMISTIC


def _h(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, 1.0)
    inner = (p > 0) & (p < 1)
    safe = np.where(inner, p, 0.5)
    return np.where(inner, -safe * np.log2(safe) - (1 - safe) * np.log2(1 - safe), 0.0)


def beta_fraction(gain: float, source: SourceModel | float, protocol: Protocol | str) -> float:
    """Fraction of detections attributable to PNS-safe pulses.

    ``(gain - P(n >= n_unsafe)) / gain``; may be negative when the multiphoton
    tail exceeds the gain, in which case no key can be distilled.
    """
    if not gain > 0:
        raise DomainError(f"gain must be > 0, got {gain}")
    protocol = Protocol(protocol)
    tail = multiphoton_tail(source, UNSAFE_PHOTON_NUMBER[protocol])
    return (gain - tail) / gain


def _pessimistic_arrays(params: ChannelParams, mu: np.ndarray, protocol: Protocol):
    T = effective_transmission(params, protocol)
    gain, qber = _gain_qber_arrays(params, mu, T)
    tail = multiphoton_tail(mu, UNSAFE_PHOTON_NUMBER[protocol])
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = (gain - tail) / gain
        ratio = np.where(beta > 0, qber / np.where(beta > 0, beta, 1.0), 1.0)
    secure = np.where(beta > 0, beta * (1 - tau_array(ratio)), 0.0)
    rate = 0.5 * gain * (-params.f_ec * _h(qber) + secure)
    return gain, qber, beta, rate


def _yield_arrays(params: ChannelParams, T: float, i: int):
    eta_i = -math.expm1(i * math.log1p(-T)) if T < 1 else 1.0
    y = params.p_dark + eta_i - params.p_dark * eta_i
    e = (params.e0 * params.p_dark + params.e_det * eta_i) / y
    return y, e


def _resolved_arrays(params: ChannelParams, mu: np.ndarray, protocol: Protocol):
    mu = np.asarray(mu, dtype=float)
    T = effective_transmission(params, protocol)
    gain, qber = _gain_qber_arrays(params, mu, T)
    poisson = np.exp(-mu)
    y1, e1 = _yield_arrays(params, T, 1)
    p1 = y1 * mu * poisson
    ec_cost = -gain * params.f_ec * _h(qber)
    if protocol is Protocol.BB84:
        secure = p1 * (1 - tau_array(e1))
        safe = p1
    else:
        y2, e2 = _yield_arrays(params, T, 2)
        p2 = y2 * mu * mu / 2 * poisson
        # two-way PA fraction 2e only exists up to e = 1/4
        single = p1 * (1 - 2 * e1) if e1 <= 0.25 else 0.0 * p1
        secure = single + p2 * (1 - tau_array(e2))
        safe = p1 + p2
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = safe / gain
    rate = 0.5 * (ec_cost + secure)
    return gain, qber, beta, rate


def rate_arrays(params: ChannelParams, mu, protocol: Protocol | str, mode: RateMode | str = RateMode.PESSIMISTIC):
    """Vectorized ``(gain, qber, beta, rate)`` over an array of intensities."""
    protocol, mode = Protocol(protocol), RateMode(mode)
    mu = np.asarray(mu, dtype=float)
    if mode is RateMode.PESSIMISTIC:
        return _pessimistic_arrays(params, mu, protocol)
    return _resolved_arrays(params, mu, protocol)


def rate_curve(params: ChannelParams, mu, protocol: Protocol | str, mode: RateMode | str = RateMode.PESSIMISTIC) -> np.ndarray:
    return rate_arrays(params, mu, protocol, mode)[3]


def key_rate(
    params: ChannelParams,
    mu: float,
    protocol: Protocol | str,
    mode: RateMode | str = RateMode.PESSIMISTIC,
) -> RatePoint:
    protocol, mode = Protocol(protocol), RateMode(mode)
    if not mu > 0:
        raise DomainError(f"mu must be > 0, got {mu}")
    gain, qber, beta, rate = (float(np.ravel(v)[0]) for v in rate_arrays(params, np.array([mu]), protocol, mode))
    if not gain > 0:
        raise UndefinedRateError("zero detection probability at this distance")
    return RatePoint(params.distance, float(mu), gain, qber, beta, rate, protocol, mode)


def key_rate_pessimistic(params: ChannelParams, mu: float, protocol: Protocol | str) -> RatePoint:
    """``G = p/2 [-f h(e) + beta (1 - tau(e / beta))]`` with the beta term floored at 0."""
    return key_rate(params, mu, protocol, RateMode.PESSIMISTIC)


def key_rate_photon_resolved(params: ChannelParams, mu: float, protocol: Protocol | str) -> RatePoint:
    """Photon-number-resolved rate.

    BB84: ``R = 1/2 {-p f h(e) + p_1 [1 - tau(e_1)]}``.
    ToM: ``R = 1/2 {-p f h(e) + p_1 [1 - 2 e_1] + p_2 [1 - tau(e_2)]}``, the
    one-photon term dropping out when ``e_1 > 1/4``.
    Here ``p_i = y_i mu**i exp(-mu) / i!``.
    """
    return key_rate(params, mu, protocol, RateMode.RESOLVED)

