from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.errors import InvalidMultiWeight, InvalidTwist
from src.higgs.realforms import eigen_data_from_phases, elliptic_check, translation_length
from src.weights.multiweight import (MultiWeight, ParabolicLine, certificate, degree_vectors, holonomy,
                                     line_hom_degree, line_power, line_tensor, torsion_line, torsion_twist, validate)

EXAMPLE = MultiWeight.constant(1, 2, [Q(4, 15)] * 5, [Q(11, 30)] * 5)


@st.composite
def multiweights(draw, denominator=6):
    p = draw(st.integers(1, 3))
    q = draw(st.integers(1, 3))
    s = draw(st.integers(1, 4))
    alpha, beta = [], []
    for _ in range(s):
        nums = draw(st.lists(st.integers(0, denominator - 1), min_size=p + q - 1, max_size=p + q - 1))
        nums.append(-sum(nums) % denominator)
        alpha.append(sorted(Q(x, denominator) for x in nums[:p]))
        beta.append(sorted(Q(x, denominator) for x in nums[p:]))
    return MultiWeight.build(p, q, alpha, beta)


def test_zero_weights_are_valid():
    assert validate(MultiWeight.constant(1, 1, [0] * 3, [0] * 3)) == []


def test_constant_example_is_valid():
    assert validate(EXAMPLE) == []


def test_non_integral_sum_reported_per_puncture():
    mw = MultiWeight.build(1, 2, [[Q(4, 15)]] * 5, [[Q(11, 30), Q(12, 30)]] * 5)
    bad = validate(mw)
    assert [v.rule for v in bad] == ["integrality"] * 5
    assert [v.puncture for v in bad] == list(range(5))


def test_range_and_order_violations():
    mw = MultiWeight.build(2, 1, [[Q(1, 2), Q(1, 4)]], [[Q(1, 4)]])
    assert [v.rule for v in validate(mw)] == ["order"]
    mw = MultiWeight.build(1, 1, [[1]], [[0]])
    assert "range" in [v.rule for v in validate(mw)]


def test_certificate_example():
    cert = certificate(EXAMPLE, 3)
    assert cert.passed
    assert cert.epsilon == Q(1, 2)
    assert (cert.j_low, cert.j_high) == (Q(7, 3), Q(23, 6))
    assert (cert.deg_u, cert.deg_v) == (-1, -4)
    assert cert.toledo == Q(-2, 3)
    assert cert.margins["ordering"] == Q(1, 10)


def test_certificate_degenerate_zero_weights():
    cert = certificate(MultiWeight.constant(1, 1, [0] * 3, [0] * 3), 0)
    assert not cert.passed
    assert cert.epsilon == 0
    assert (cert.j_low, cert.j_high) == (0, 2)
    assert cert.conditions == {"ordering": False, "epsilon_below_two": True, "d_in_interval": False}


@pytest.mark.parametrize("d", range(-2, 5))
def test_certificate_fails_without_integer_in_interval(d):
    mw = MultiWeight.constant(1, 1, [Q(2, 5)] * 5, [Q(3, 5)] * 5)
    cert = certificate(mw, d)
    assert (cert.j_low, cert.j_high) == (1, 2)
    assert cert.epsilon == 1
    assert not cert.conditions["d_in_interval"]


def test_certificate_rejects_invalid_weights():
    with pytest.raises(InvalidMultiWeight):
        certificate(MultiWeight.build(1, 1, [[Q(1, 3)]], [[Q(1, 3)]]), 0)


@given(multiweights(), st.integers(-5, 5))
@settings(max_examples=80)
def test_degree_bookkeeping(mw, d):
    cert = certificate(mw, d)
    assert cert.deg_u + cert.deg_v + mw.norm_alpha + mw.norm_beta == 0
    assert cert.toledo == mw.norm_beta - mw.norm_alpha - d


@given(multiweights())
@settings(max_examples=80)
def test_holonomy_phase_sums_are_integers(mw):
    for phases in holonomy(mw):
        assert sum(phases).denominator == 1


@given(multiweights())
@settings(max_examples=80)
def test_holonomy_phases_are_elliptic(mw):
    for phases in holonomy(mw):
        e = eigen_data_from_phases(phases)
        assert elliptic_check(e)
        assert translation_length(e) == pytest.approx(0.0, abs=1e-12)


def test_holonomy_examples():
    assert holonomy(EXAMPLE)[0] == (Q(4, 15), Q(11, 30), Q(11, 30))
    sp = MultiWeight.constant(2, 2, [Q(9, 20)] * 5, [Q(11, 20)] * 5)
    assert holonomy(sp)[2] == (Q(9, 20), Q(9, 20), Q(11, 20), Q(11, 20))


def test_degree_vectors_of_constant_construction():
    assert degree_vectors(EXAMPLE, 3) == ((-1,), (-2, -2))


def test_line_tensor_carries():
    a = ParabolicLine(-2, (Q(1, 3), Q(1, 2)))
    b = ParabolicLine(0, (Q(1, 4), Q(3, 4)))
    assert line_tensor(a, b) == ParabolicLine(-1, (Q(7, 12), Q(1, 4)))
    assert line_tensor(a, ParabolicLine.trivial(2)) == a
    assert line_tensor(a, b) == line_tensor(b, a)


def test_cube_of_torsion_line_is_trivial():
    line = ParabolicLine(-1, (Q(1, 3),) * 3)
    assert line_power(line, 3) == ParabolicLine.trivial(3)


def test_line_hom_degree():
    a = ParabolicLine(-2, (Q(1, 3), Q(1, 2)))
    b = ParabolicLine(0, (Q(1, 4), Q(3, 4)))
    assert line_hom_degree(a, b) == 1
    assert line_hom_degree(a, a) == -2
    # zero weights tie at every puncture
    assert line_hom_degree(ParabolicLine.trivial(3), ParabolicLine.trivial(3)) == -3
    assert line_hom_degree(ParabolicLine.trivial(0), ParabolicLine.trivial(0)) == 0


def test_parabolic_weights_must_be_in_unit_interval():
    with pytest.raises(ValueError):
        ParabolicLine(0, (Q(1),))


def test_torsion_line():
    line, hat = torsion_line([1, 1, 1], 3)
    assert line == ParabolicLine(-1, (Q(1, 3),) * 3)
    assert hat == (1, 1, 1)
    with pytest.raises(InvalidTwist):
        torsion_line([1, 0, 0], 3)


def test_zero_twist_is_identity():
    line, mw, d = torsion_twist([0] * 5, EXAMPLE, 3)
    assert line == ParabolicLine.trivial(5)
    assert (mw, d) == (EXAMPLE, 3)


def test_twist_shifts_and_keeps_toledo():
    line, mw, d = torsion_twist([1, 1, 1, 0, 0], EXAMPLE, 3)
    assert line.degree == -1
    assert mw.alpha[0] == (Q(3, 5),) and mw.beta[0] == (Q(7, 10), Q(7, 10))
    assert mw.alpha[4] == EXAMPLE.alpha[4]
    assert validate(mw) == []
    assert certificate(mw, d).toledo == certificate(EXAMPLE, 3).toledo


@pytest.mark.parametrize("p, q, s", [(1, 1, 3), (1, 2, 3), (2, 2, 5), (2, 3, 5), (1, 1, 5)])
def test_twist_has_order_p_plus_q(p, q, s):
    n = p + q
    mw = MultiWeight.constant(p, q, [Q(1, 2 * n)] * s, [Q(1, 1) - Q(p, 2 * n * q)] * s)
    assert validate(mw) == []
    phi = [1, n - 1] + [0] * (s - 2)
    cur, d = mw, 0
    line = ParabolicLine.trivial(s)
    for _ in range(n):
        step, cur, d = torsion_twist(phi, cur, d)
        line = line_tensor(line, step)
    assert (cur, d) == (mw, 0)
    assert line == ParabolicLine.trivial(s)


def test_twists_compose():
    phi1, phi2 = [1, 2, 0, 0, 0], [2, 2, 2, 0, 0]
    l1, m1, d1 = torsion_twist(phi1, EXAMPLE, 3)
    l2, m2, d2 = torsion_twist(phi2, m1, d1)
    l12, m12, d12 = torsion_twist([a + b for a, b in zip(phi1, phi2)], EXAMPLE, 3)
    assert (m2, d2) == (m12, d12)
    assert line_tensor(l1, l2) == l12


def test_twist_needs_one_residue_per_puncture():
    with pytest.raises(InvalidTwist):
        torsion_twist([0, 0], EXAMPLE, 3)
