"""Secure key rates of a two-way QKD toy model against BB84 with weak coherent sources."""

from .attacks import (
    AttackAngles,
    PathFidelities,
    ab_fidelity_two_way,
    binary_entropy,
    eve_fidelity_two_way,
    mutual_info_curves,
    verify_equal_angle_optimality,
)
from .channel import (
    ChannelParams,
    GainAndError,
    Protocol,
    effective_transmission,
    gain_and_qber,
    load_preset,
    photon_number_yield,
    transmittance,
)
from .errors import DomainError, PresetError, UndefinedRateError
from .keyrate import (
    RateMode,
    RatePoint,
    beta_fraction,
    key_rate,
    key_rate_photon_resolved,
    key_rate_pessimistic,
)
from .optimize import SweepResult, check_sufficient_condition, optimize_mu, sweep
from .photon_stats import SourceModel, multiphoton_tail, pulse_probability
from .privacy import renyi_entropy_order2, tau_lutkenhaus, tau_tom, two_photon_renyi_gain

__version__ = "0.1.0"
