import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twoway_qkd import (
    ChannelParams,
    DomainError,
    Protocol,
    RateMode,
    beta_fraction,
    key_rate_pessimistic,
    key_rate_photon_resolved,
)
from twoway_qkd.optimize import optimize_mu


def h(p):
    return 0.0 if p in (0.0, 1.0) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def tau(e):
    return 1.0 if e >= 0.5 else math.log2(1 + 4 * e - 4 * e * e)


def ref_transmission(p, protocol):
    t = 10 ** (-p.gamma * p.distance / 10)
    return p.eta * t if protocol == "bb84" else p.eta * p.eta_alice * t * t


def ref_pessimistic(p, mu, protocol):
    T = ref_transmission(p, protocol)
    s = 1 - math.exp(-mu * T)
    gain = p.p_dark + s
    e = (0.5 * p.p_dark + p.e_det * s) / gain
    safe = 2 if protocol == "bb84" else 3
    tail = 1 - math.exp(-mu) * sum(mu**i / math.factorial(i) for i in range(safe))
    beta = (gain - tail) / gain
    secure = beta * (1 - tau(e / beta)) if beta > 0 else 0.0
    return 0.5 * gain * (-p.f_ec * h(e) + secure)


def close(value, reference, gain):
    # the rate is a difference of terms of order gain; allow for 1 - exp round-off
    return value == pytest.approx(reference, rel=1e-9, abs=1e-9 * gain)


def ref_resolved(p, mu, protocol):
    T = ref_transmission(p, protocol)
    s = 1 - math.exp(-mu * T)
    gain = p.p_dark + s
    e = (0.5 * p.p_dark + p.e_det * s) / gain

    def ye(i):
        eta_i = 1 - (1 - T) ** i
        y = p.p_dark + eta_i - p.p_dark * eta_i
        return y, (0.5 * p.p_dark + p.e_det * eta_i) / y

    y1, e1 = ye(1)
    p1 = y1 * mu * math.exp(-mu)
    r = -gain * p.f_ec * h(e)
    if protocol == "bb84":
        r += p1 * (1 - tau(e1))
    else:
        y2, e2 = ye(2)
        p2 = y2 * mu**2 / 2 * math.exp(-mu)
        r += (p1 * (1 - 2 * e1) if e1 <= 0.25 else 0.0) + p2 * (1 - tau(e2))
    return 0.5 * r


links = st.builds(
    ChannelParams,
    gamma=st.sampled_from([0.2, 0.21]),
    distance=st.floats(0, 120),
    eta=st.floats(0.01, 1.0),
    eta_alice=st.floats(0.05, 1.0),
    p_dark=st.floats(1e-7, 1e-3),
    e_det=st.floats(0.0, 0.1),
)
protocols = st.sampled_from(["bb84", "tom"])
mus = st.floats(1e-4, 2.0)


@settings(max_examples=300)
@given(links, mus, protocols)
def test_pessimistic_matches_reference(p, mu, protocol):
    pt = key_rate_pessimistic(p, mu, protocol)
    assert close(pt.rate, ref_pessimistic(p, mu, protocol), pt.gain)


@settings(max_examples=300)
@given(links, mus, protocols)
def test_resolved_matches_reference(p, mu, protocol):
    pt = key_rate_photon_resolved(p, mu, protocol)
    assert close(pt.rate, ref_resolved(p, mu, protocol), pt.gain)


@given(links, mus, protocols, st.sampled_from(list(RateMode)))
def test_rate_bounded_by_sifted_gain(p, mu, protocol, mode):
    from twoway_qkd import key_rate

    pt = key_rate(p, mu, protocol, mode)
    assert pt.rate <= pt.gain / 2


def test_beta_examples():
    assert beta_fraction(1.0, 1e-9, "bb84") == pytest.approx(1.0)
    assert beta_fraction(1.0, 1e-9, "tom") == pytest.approx(1.0)
    b = beta_fraction(0.01, 0.1, "bb84")
    assert b == pytest.approx((0.01 - (1 - math.exp(-0.1) * 1.1)) / 0.01, rel=1e-12)
    assert round(b, 4) == 0.5321
    assert beta_fraction(0.01, 0.5, "tom") < 0


def test_beta_requires_positive_gain():
    with pytest.raises(DomainError):
        beta_fraction(0.0, 0.1, "bb84")


def test_pessimistic_beta_field_matches(gys):
    pt = key_rate_pessimistic(gys.at(10), 0.05, "tom")
    assert pt.beta == pytest.approx(beta_fraction(pt.gain, 0.05, "tom"), rel=1e-12)


def test_perfect_channel_limit():
    p = ChannelParams(gamma=0.0, eta=1.0, p_dark=0.0, e_det=0.0)
    for mu in (1e-3, 1e-5, 1e-7):
        pt = key_rate_pessimistic(p, mu, "bb84")
        assert pt.qber == 0.0
        assert pt.rate == pytest.approx(0.5 * pt.gain * pt.beta, rel=1e-12)
    assert pt.rate / (0.5 * pt.gain) == pytest.approx(1.0, abs=1e-6)


def test_negative_beta_leaves_only_ec_cost(kth):
    p = kth.at(60)
    pt = key_rate_pessimistic(p, 0.5, "bb84")
    assert pt.beta <= 0
    assert pt.rate == pytest.approx(-0.5 * pt.gain * 1.22 * h(pt.qber), rel=1e-12)
    assert pt.rate < 0


def test_frozen_gys_20km_bb84(gys):
    # frozen from an independent scratch implementation (bounded Brent in log mu)
    opt = optimize_mu(gys, 20.0, "bb84")
    assert opt.rate_opt > 0
    assert opt.rate_opt == pytest.approx(2.1011244357902798e-05, rel=1e-8)
    assert opt.mu_opt == pytest.approx(0.01015199873526136, rel=1e-3)


def test_resolved_no_signal_limit(gys):
    assert key_rate_photon_resolved(gys.at(20), 1e-9, "bb84").rate <= 0
    assert key_rate_photon_resolved(gys.at(20), 1e-9, "tom").rate <= 0


def test_resolved_single_photon_limit():
    p = ChannelParams(gamma=0.2, distance=10, eta=0.5, p_dark=0.0, e_det=0.0)
    mu = 0.3
    T = 0.5 * 10 ** -0.2
    pt = key_rate_photon_resolved(p, mu, "bb84")
    assert pt.rate == pytest.approx(0.5 * T * mu * math.exp(-mu), rel=1e-12)


def test_resolved_tom_drops_single_photon_term_when_too_noisy(kth):
    p = kth.at(70)
    T = kth.eta * 10 ** (-kth.gamma * 140 / 10)
    e1 = (0.5 * kth.p_dark + kth.e_det * T) / (kth.p_dark + T - kth.p_dark * T)
    assert e1 > 0.25
    assert key_rate_photon_resolved(p, 0.5, "tom").rate == pytest.approx(ref_resolved(p, 0.5, "tom"), rel=1e-12)


def test_resolved_bb84_wins_at_25km(gys):
    bb84 = optimize_mu(gys, 25.0, "bb84", "resolved")
    tom = optimize_mu(gys, 25.0, "tom", "resolved")
    assert bb84.rate_opt > tom.rate_opt


@pytest.mark.parametrize("mode", list(RateMode))
@pytest.mark.parametrize("protocol", list(Protocol))
def test_rates_continuous_in_mu(gys, mode, protocol):
    from twoway_qkd.keyrate import rate_curve

    grid = np.linspace(1e-4, 2.0, 200_001)
    r = rate_curve(gys.at(15), grid, protocol, mode)
    scale = np.max(np.abs(r))
    # no jumps: neighbouring points differ by far less than the curve's range
    assert np.max(np.abs(np.diff(r))) < 1e-3 * scale


def test_invalid_mu(gys):
    with pytest.raises(DomainError):
        key_rate_pessimistic(gys, 0.0, "bb84")
