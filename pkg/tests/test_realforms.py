import math

import numpy as np
import pytest

from src.algebra.exactlin import QQ, Matrix
from src.errors import DimensionMismatch, SingularElement
from src.higgs.realforms import (EigenData, SymmetryClass, congruence, cross_product_generators,
                                 eigen_data_from_matrix, eigen_data_from_phases, elliptic_check, realform_check,
                                 semistability_certificate, sostar_construct, sostar_even, sp_generate,
                                 translation_length)
from src.stability.kronecker import MatrixTuple, Status, king_bruteforce


def test_cross_product_generators_are_antisymmetric():
    A = cross_product_generators()
    assert realform_check(A, SymmetryClass.ANTISYMMETRIC)
    assert not realform_check(A, SymmetryClass.SYMMETRIC)


def test_realform_check_needs_square_matrices():
    with pytest.raises(DimensionMismatch):
        realform_check(MatrixTuple.build(QQ, [[[1], [0]]]), SymmetryClass.SYMMETRIC)


def test_sostar_three_uses_cross_product():
    result = sostar_construct(3)
    assert result.tuple == cross_product_generators()
    assert result.attempts == 1
    assert result.kind is SymmetryClass.ANTISYMMETRIC
    assert set(result.certificates) == {5, 7}


def assert_certified(result):
    assert set(result.certificates) == {5, 7}
    assert all(c.startswith("blowup:") or c in ("Stable", "StrictlySemistable")
               for c in result.certificates.values())


@pytest.mark.parametrize("p", [3, pytest.param(5, marks=pytest.mark.slow), pytest.param(7, marks=pytest.mark.slow)])
def test_sostar_is_antisymmetric_and_semistable(p):
    result = sostar_construct(p, seed=1)
    assert (result.tuple.p, result.tuple.q, result.tuple.r) == (p, p, 3)
    assert realform_check(result.tuple, SymmetryClass.ANTISYMMETRIC)
    assert_certified(result)
    # odd antisymmetric matrices are singular, so no 1 x 1 blow-up exists
    assert "blowup:1" not in result.certificates.values()


@pytest.mark.parametrize("p", [1, 2, 4])
def test_sostar_needs_odd_p(p):
    with pytest.raises(DimensionMismatch):
        sostar_construct(p)


def test_sostar_even():
    result = sostar_even(4, seed=3)
    A = result.tuple
    assert realform_check(A, SymmetryClass.ANTISYMMETRIC)
    assert A.mats[0][0, 1] == 1 and A.mats[0][1, 0] == -1
    assert all(c.startswith("blowup:") or c in ("Stable", "StrictlySemistable")
               for c in result.certificates.values())


def test_sp_generate():
    result = sp_generate(2, 5, seed=0)
    A = result.tuple
    assert A.r == 3
    assert A.mats[0] == Matrix.identity(QQ, 2)
    assert realform_check(A, SymmetryClass.SYMMETRIC)
    assert result.kind is SymmetryClass.SYMMETRIC


@pytest.mark.parametrize("p", [1, 2, 3])
@pytest.mark.parametrize("s", [5, 7])
def test_sp_generate_is_never_unstable(p, s):
    result = sp_generate(p, s, seed=p + s)
    A = result.tuple
    assert (A.p, A.r) == (p, s - 2)
    assert realform_check(A, SymmetryClass.SYMMETRIC)
    assert_certified(result)
    for ell in (5, 7):
        assert king_bruteforce(A.reduce(ell)).status is not Status.UNSTABLE


@pytest.mark.parametrize("s", [3, 4, 6])
def test_sp_generate_needs_odd_s(s):
    with pytest.raises(DimensionMismatch):
        sp_generate(2, s)


def test_congruence_preserves_symmetry():
    A = sp_generate(2, 5, seed=0).tuple
    g = Matrix.from_rows(QQ, [[1, 2], [0, 1]])
    assert realform_check(congruence(g, A), SymmetryClass.SYMMETRIC)
    B = cross_product_generators()
    h = Matrix.from_rows(QQ, [[2, 0, 1], [0, 1, 0], [1, 0, 1]])
    assert realform_check(congruence(h, B), SymmetryClass.ANTISYMMETRIC)


def test_semistability_certificate_for_identity_and_zero():
    eye = MatrixTuple.build(QQ, [[[1, 0], [0, 1]]])
    assert semistability_certificate(eye, 5) == "blowup:1"
    zero = MatrixTuple.build(QQ, [[[0, 0], [0, 0]]])
    assert semistability_certificate(zero, 5) is None


# -- eigenvalue diagnostics -----------------------------------------------------

def test_phases_give_an_elliptic_element():
    e = eigen_data_from_phases([0.25, 0.75])
    assert elliptic_check(e)
    assert translation_length(e) == pytest.approx(0.0, abs=1e-12)


def test_hyperbolic_translation_length():
    e = eigen_data_from_matrix(np.diag([2.0, 0.5]))
    assert not elliptic_check(e)
    assert translation_length(e) == pytest.approx(math.sqrt(2) * math.log(2))


def test_translation_length_of_a_diagonal_spectrum():
    e = EigenData((math.e, math.e, math.e ** -2))
    assert translation_length(e) == pytest.approx(math.sqrt(6))


CONJUGATED = np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 1.0]])
LOXODROMIC = CONJUGATED @ np.diag([2.0, 3.0, 1 / 6]) @ np.linalg.inv(CONJUGATED)


def test_translation_length_of_the_inverse():
    expected = math.sqrt(math.log(2) ** 2 + math.log(3) ** 2 + math.log(6) ** 2)
    forward = translation_length(eigen_data_from_matrix(LOXODROMIC))
    backward = translation_length(eigen_data_from_matrix(np.linalg.inv(LOXODROMIC)))
    assert forward == pytest.approx(expected)
    assert backward == pytest.approx(forward)


@pytest.mark.parametrize("phase", [0.0, 0.3, 1.7, math.pi])
def test_translation_length_ignores_unit_scalars(phase):
    scaled = np.exp(1j * phase) * LOXODROMIC
    assert translation_length(eigen_data_from_matrix(scaled)) == pytest.approx(
        translation_length(eigen_data_from_matrix(LOXODROMIC)))


def test_eigenvalues_must_have_unit_product():
    with pytest.raises(SingularElement):
        EigenData((2.0, 1.0))
