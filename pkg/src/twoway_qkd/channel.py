"""Fiber channel: transmittance, detection gain and QBER for one- and two-way links.

For BB84 a photon crosses the Alice-Bob fiber once. In the two-way toy
protocol it crosses it twice (Bob to Alice and back) and passes Alice's
optics once, so its end-to-end transmission is ``eta * eta_alice * t(d)**2``.
Transmittance uses the dB convention ``t(l) = 10 ** (-gamma * l / 10)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Union

import numpy as np

from .errors import DomainError, PresetError, UndefinedRateError

PRESET_KEYS = ("gamma_db_per_km", "eta_bob", "eta_alice", "p_dark", "e_det", "e0", "f_ec")
BUILTIN_PRESETS = ("gys", "kth")


class Protocol(str, Enum):
    BB84 = "bb84"
    TOM = "tom"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ChannelParams:
    """Link and detector parameters.

    Attributes:
        gamma: Fiber loss in dB/km.
        distance: Alice-Bob separation in km.
        eta: Bob-side efficiency (internal optics times detector efficiency).
        eta_alice: Alice-side transmitivity in the two-way protocol.
        p_dark: Dark-count probability per pulse.
        e_det: Misalignment / stability error probability.
        e0: Error probability of a dark count.
        f_ec: Error-correction inefficiency factor.
    """

    gamma: float
    distance: float = 0.0
    eta: float = 1.0
    eta_alice: float = 1.0
    p_dark: float = 0.0
    e_det: float = 0.0
    e0: float = 0.5
    f_ec: float = 1.22

    def __post_init__(self) -> None:
        if not self.gamma >= 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")
        if not self.distance >= 0:
            raise DomainError(f"distance must be >= 0, got {self.distance}")
        if not 0 < self.eta <= 1:
            raise DomainError(f"eta must lie in (0, 1], got {self.eta}")
        if not 0 < self.eta_alice <= 1:
            raise DomainError(f"eta_alice must lie in (0, 1], got {self.eta_alice}")
        if not 0 <= self.p_dark < 1:
            raise DomainError(f"p_dark must lie in [0, 1), got {self.p_dark}")
        if not 0 <= self.e_det <= 0.5:
            raise DomainError(f"e_det must lie in [0, 0.5], got {self.e_det}")
        if self.e0 != 0.5:
            raise DomainError(f"e0 is fixed at 0.5, got {self.e0}")
        if not self.f_ec >= 1:
            raise DomainError(f"f_ec must be >= 1, got {self.f_ec}")

    def at(self, distance: float) -> "ChannelParams":
        return replace(self, distance=float(distance))

    def with_eta_alice(self, eta_alice: float) -> "ChannelParams":
        return replace(self, eta_alice=float(eta_alice))


def transmittance(params: ChannelParams, path_length: float) -> float:
    """Fiber survival probability over ``path_length`` km."""
    if path_length < 0:
        raise DomainError(f"path length must be >= 0, got {path_length}")
    return 10.0 ** (-params.gamma * path_length / 10.0)


def effective_transmission(params: ChannelParams, protocol: Protocol | str) -> float:
    """End-to-end single-photon transmission of ``protocol`` at ``params.distance``."""
    protocol = Protocol(protocol)
    t = transmittance(params, params.distance)
    if protocol is Protocol.BB84:
        return params.eta * t
    return params.eta * params.eta_alice * t * t


@dataclass(frozen=True)
class GainAndError:
    gain: float
    qber: float


def _gain_qber_arrays(params: ChannelParams, mu, transmission: float):
    signal = -np.expm1(-np.asarray(mu, dtype=float) * transmission)
    gain = params.p_dark + signal
    with np.errstate(divide="ignore", invalid="ignore"):
        qber = (params.e0 * params.p_dark + params.e_det * signal) / gain
    return gain, qber


def gain_and_qber(params: ChannelParams, mu: float, protocol: Protocol | str) -> GainAndError:
    """Overall detection probability per pulse and error rate among detections.

    Dark counts enter additively, without a coincidence correction.
    """
    if not mu >= 0:
        raise DomainError(f"mu must be >= 0, got {mu}")
    T = effective_transmission(params, protocol)
    signal = -math.expm1(-mu * T)
    gain = params.p_dark + signal
    if gain <= 0:
        raise UndefinedRateError("zero detection probability: QBER is undefined")
    qber = (params.e0 * params.p_dark + params.e_det * signal) / gain
    return GainAndError(gain=gain, qber=qber)


@dataclass(frozen=True)
class PhotonYield:
    """Detection probability and error rate of an ``i``-photon pulse."""

    i: int
    y: float
    e: float
    eta_i: float


def photon_number_yield(params: ChannelParams, i: int, protocol: Protocol | str) -> PhotonYield:
    """Yield and error rate conditioned on ``i`` photons being emitted.

    ``eta_i = 1 - (1 - T)**i`` with ``T`` the protocol's full per-photon
    transmission, so the two-way loss is included for the toy protocol.
    """
    if i < 0 or int(i) != i:
        raise DomainError(f"photon count must be a non-negative integer, got {i}")
    T = effective_transmission(params, protocol)
    eta_i = -math.expm1(int(i) * math.log1p(-T)) if T < 1 else (1.0 if i > 0 else 0.0)
    y = params.p_dark + eta_i - params.p_dark * eta_i
    if y <= 0:
        raise UndefinedRateError(f"zero yield for {i}-photon pulses: error rate undefined")
    e = (params.e0 * params.p_dark + params.e_det * eta_i) / y
    return PhotonYield(i=int(i), y=y, e=e, eta_i=eta_i)


def _parse_preset(text: str, source: str) -> dict[str, float]:
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, _, value = line.partition(":")
        key, value = key.strip(), value.strip()
        if key not in PRESET_KEYS:
            raise PresetError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise PresetError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = float(value)
        except ValueError:
            raise PresetError(f"{source}:{lineno}: {key} is not a number: {value!r}") from None
    missing = [k for k in PRESET_KEYS if k not in values]
    if missing:
        raise PresetError(f"{source}: missing keys {', '.join(missing)}")
    return values


def load_preset(path: Union[str, Path]) -> ChannelParams:
    """Read a preset file, or a bundled preset by name (``"gys"``, ``"kth"``).

    The format is one ``key = value`` pair per line; ``#`` starts a comment.
    All keys in :data:`PRESET_KEYS` are required and no others are allowed.
    """
    name = str(path)
    if name.lower() in BUILTIN_PRESETS and not Path(name).exists():
        text = resources.files("twoway_qkd").joinpath("presets", f"{name.lower()}.txt").read_text()
        source = f"<preset {name.lower()}>"
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise PresetError(f"cannot read preset {name}: {exc}") from exc
        source = name
    v = _parse_preset(text, source)
    try:
        return ChannelParams(
            gamma=v["gamma_db_per_km"],
            eta=v["eta_bob"],
            eta_alice=v["eta_alice"],
            p_dark=v["p_dark"],
            e_det=v["e_det"],
            e0=v["e0"],
            f_ec=v["f_ec"],
        )
    except DomainError as exc:
        raise PresetError(f"{source}: {exc}") from exc
