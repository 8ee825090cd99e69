import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twoway_qkd import (
    AttackAngles,
    DomainError,
    PathFidelities,
    ab_fidelity_two_way,
    binary_entropy,
    eve_fidelity_two_way,
    mutual_info_curves,
    verify_equal_angle_optimality,
)

angles = st.floats(min_value=0.0, max_value=math.pi / 2)


def joint_agreement(p, q):
    # both right or both wrong, out of the four joint outcomes
    return p * q + (1 - p) * (1 - q)


def test_fidelity_corners():
    assert eve_fidelity_two_way(AttackAngles(0, 0)) == 0.5
    assert eve_fidelity_two_way(AttackAngles(math.pi / 2, math.pi / 2)) == pytest.approx(1.0, abs=1e-15)
    assert ab_fidelity_two_way(AttackAngles(0, 0)) == 1.0
    assert ab_fidelity_two_way(AttackAngles(math.pi / 2, math.pi / 2)) == pytest.approx(0.5, abs=1e-15)


def test_fidelity_derived_examples():
    a = math.asin(0.6)
    expected_eve = joint_agreement(1.6 / 2, 1.6 / 2)
    assert expected_eve == pytest.approx(0.68)
    assert eve_fidelity_two_way(AttackAngles(a, a)) == pytest.approx(expected_eve, abs=1e-12)
    b = math.acos(0.8)
    expected_ab = joint_agreement(1.8 / 2, 1.8 / 2)
    assert expected_ab == pytest.approx(0.82)
    assert ab_fidelity_two_way(AttackAngles(b, b)) == pytest.approx(expected_ab, abs=1e-12)


def test_angle_domain():
    with pytest.raises(DomainError):
        AttackAngles(-0.1, 0.2)
    with pytest.raises(DomainError):
        AttackAngles(0.2, 1.6)


def test_path_fidelities():
    f = PathFidelities.from_angle(math.pi / 3)
    assert f.bob_fidelity == pytest.approx(0.75)
    assert f.eve_fidelity == pytest.approx((1 + math.sqrt(3) / 2) / 2)


def test_equal_angle_reduction_on_grid():
    for a in np.linspace(0, math.pi / 2, 1000):
        ang = AttackAngles.symmetric(a)
        assert eve_fidelity_two_way(ang) == pytest.approx((1 + math.sin(a) ** 2) / 2, abs=1e-15)
        assert ab_fidelity_two_way(ang) == pytest.approx((1 + math.cos(a) ** 2) / 2, abs=1e-15)


@given(angles, angles)
def test_closed_forms_match_enumeration(a, b):
    pa, pb = PathFidelities.from_angle(a), PathFidelities.from_angle(b)
    ang = AttackAngles(a, b)
    assert eve_fidelity_two_way(ang) == pytest.approx(joint_agreement(pa.eve_fidelity, pb.eve_fidelity), abs=1e-12)
    assert ab_fidelity_two_way(ang) == pytest.approx(joint_agreement(pa.bob_fidelity, pb.bob_fidelity), abs=1e-12)


@given(angles, angles)
def test_no_pair_beats_equal_angles_at_same_disturbance(a, b):
    # the equal-angle attack with the same disturbance is at least as good for Eve
    phi = math.acos(math.sqrt(math.cos(a) * math.cos(b)))
    assert eve_fidelity_two_way(AttackAngles(a, b)) <= eve_fidelity_two_way(AttackAngles.symmetric(phi)) + 1e-12


def test_optimality_corners():
    r0 = verify_equal_angle_optimality(0.0, 1000)
    assert r0.max_fidelity == pytest.approx(0.5, abs=1e-15)
    assert r0.argmax == (0.0, 0.0)
    r1 = verify_equal_angle_optimality(math.pi / 2, 1000)
    assert r1.max_fidelity == pytest.approx(1.0, abs=1e-12)
    assert r1.argmax == pytest.approx((math.pi / 2, math.pi / 2), abs=1e-12)


def test_optimality_quarter_pi():
    r = verify_equal_angle_optimality(math.pi / 4, 1000)
    assert r.holds
    assert r.max_fidelity == pytest.approx(0.75, abs=r.grid_step)
    assert r.argmax_distance <= r.grid_step


def test_optimality_resolution_precondition():
    with pytest.raises(DomainError):
        verify_equal_angle_optimality(0.3, 50)


@pytest.mark.parametrize("p, expected", [(0.5, 1.0), (0.0, 0.0), (1.0, 0.0), (0.25, 0.811278)])
def test_binary_entropy(p, expected):
    assert binary_entropy(p) == pytest.approx(expected, abs=5e-7)


def test_binary_entropy_domain():
    with pytest.raises(DomainError):
        binary_entropy(1.2)


def test_info_curves_no_attack():
    c = mutual_info_curves(0.0)
    assert (c.i_ab, c.i_tom, c.i_ir, c.i_bb84) == (1.0, 0.0, 0.0, 0.0)


def test_info_curves_values():
    assert mutual_info_curves(0.25).i_ir == 1.0
    c = mutual_info_curves(0.1)
    h = lambda p: -p * math.log2(p) - (1 - p) * math.log2(1 - p)
    assert c.i_tom == pytest.approx(1 - h(0.4), abs=1e-12)
    assert c.i_bb84 == pytest.approx(1 - h(0.2), abs=1e-12)
    assert round(c.i_tom, 6) == 0.029049
    assert round(c.i_bb84, 6) == 0.278072
    assert mutual_info_curves(0.3).i_ir is None


def test_info_curves_match_fidelities():
    # Eve's curve is 1 - h(1 - F_E) with F_E from the attack at matched disturbance
    for e in np.linspace(0.01, 0.49, 25):
        a = math.asin(math.sqrt(2 * e))
        ang = AttackAngles.symmetric(a)
        assert 1 - ab_fidelity_two_way(ang) == pytest.approx(e, abs=1e-12)
        f = eve_fidelity_two_way(ang)
        assert mutual_info_curves(e).i_tom == pytest.approx(1 - binary_entropy(f), abs=1e-12)
        a1 = math.acos(1 - 2 * e)
        f1 = PathFidelities.from_angle(a1).eve_fidelity
        assert mutual_info_curves(e).i_bb84 == pytest.approx(1 - binary_entropy(f1), abs=1e-12)


def test_info_curves_domain():
    with pytest.raises(DomainError):
        mutual_info_curves(0.6)


def test_fig1_ordering():
    for e in np.linspace(0.001, 0.249, 500):
        c = mutual_info_curves(e)
        assert c.i_ir >= c.i_tom and c.i_ir >= c.i_bb84
    for e in np.linspace(0.001, 0.499, 500):
        c = mutual_info_curves(e)
        assert c.i_tom <= c.i_bb84
        assert all(0.0 <= v <= 1.0 for v in (c.i_ab, c.i_tom, c.i_bb84))
