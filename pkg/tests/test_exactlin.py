from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.algebra.exactlin import (QQ, Matrix, PrimeField, Subspace, check_budget, count_subspaces, determinant,
                                  enumerate_all, enumerate_subspaces, enumerate_superspaces, field_from_tag,
                                  flag_meet_dims, gaussian_binomial, image_span, intersect, inverse, is_prime,
                                  kernel, lift, preimage, rank, reduce_mod, solve, standard_flag, subspace_sum)
from src.errors import BudgetExceeded, DimensionMismatch, FieldMismatch, FlagNotNested

F5 = PrimeField(5)

small_ints = st.integers(min_value=-4, max_value=4)


def square(n):
    return st.lists(st.lists(small_ints, min_size=n, max_size=n), min_size=n, max_size=n)


@pytest.mark.parametrize("n, expected", [(2, True), (5, True), (9, False), (1, False), (7919, True)])
def test_is_prime(n, expected):
    assert is_prime(n) is expected


def test_prime_field_rejects_composite():
    with pytest.raises(FieldMismatch):
        PrimeField(6)


def test_field_tags():
    assert field_from_tag("ql") == QQ
    assert field_from_tag("f7") == PrimeField(7)
    assert F5.tag == "f5"
    with pytest.raises(FieldMismatch):
        field_from_tag("r3")


def test_prime_field_coerces_fractions():
    assert F5.coerce(Fraction(1, 2)) == 3
    with pytest.raises(FieldMismatch):
        F5.coerce(Fraction(1, 5))


def test_rank_over_rationals_and_mod_p():
    m = Matrix.from_rows(QQ, [[1, 2], [2, 4]])
    assert rank(m) == 1
    assert rank(Matrix.from_rows(QQ, [[1, 2], [3, 4]])) == 2
    # det = -5
    assert rank(Matrix.from_rows(F5, [[1, 2], [3, 1]])) == 1


def test_determinant_examples():
    assert determinant(Matrix.from_rows(QQ, [[1, 2], [3, 4]])) == -2
    assert determinant(Matrix.from_rows(QQ, [[Fraction(1, 2), 0], [0, 4]])) == 2
    assert determinant(Matrix.from_rows(F5, [[1, 2], [3, 4]])) == 3
    assert determinant(Matrix.from_rows(QQ, [[0, 1], [1, 0]])) == -1


@given(square(3))
@settings(max_examples=60)
def test_determinant_matches_cofactor_expansion(rows):
    (a, b, c), (d, e, f), (g, h, i) = rows
    expected = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    assert determinant(Matrix.from_rows(QQ, rows)) == expected
    assert determinant(Matrix.from_rows(F5, rows)) == expected % 5


@given(square(3))
@settings(max_examples=60)
def test_rank_nullity(rows):
    m = Matrix.from_rows(QQ, rows)
    assert rank(m) + kernel(m).dim == 3
    for v in kernel(m).rows:
        assert all(x == 0 for x in m.apply(v))


@given(square(3))
@settings(max_examples=40)
def test_inverse_round_trip(rows):
    m = Matrix.from_rows(QQ, rows)
    if determinant(m) == 0:
        with pytest.raises(ZeroDivisionError):
            inverse(m)
    else:
        assert (m @ inverse(m)) == Matrix.identity(QQ, 3)


def test_solve():
    m = Matrix.from_rows(QQ, [[2, 1], [1, 3]])
    assert solve(m, [3, 5]) == (Fraction(4, 5), Fraction(7, 5))


def test_subspace_canonical_form():
    u = Subspace.span(QQ, 3, [[1, 1, 0], [2, 2, 0], [0, 1, 1]])
    v = Subspace.span(QQ, 3, [[1, 0, -1], [0, 1, 1]])
    assert u == v
    assert u.dim == 2


def test_sum_and_intersection():
    u = Subspace.span(QQ, 3, [[1, 0, 0], [0, 1, 0]])
    v = Subspace.span(QQ, 3, [[0, 1, 0], [0, 0, 1]])
    assert subspace_sum(u, v) == Subspace.full(QQ, 3)
    assert intersect(u, v) == Subspace.span(QQ, 3, [[0, 1, 0]])


def test_mixed_fields_rejected():
    with pytest.raises(FieldMismatch):
        subspace_sum(Subspace.full(QQ, 2), Subspace.full(F5, 2))


def test_image_and_preimage():
    a = Matrix.from_rows(QQ, [[0, 1], [0, 0]])
    e1 = Subspace.span(QQ, 2, [[1, 0]])
    assert image_span([a], e1).dim == 0
    assert image_span([a], Subspace.full(QQ, 2)) == e1
    assert preimage([a], Subspace.zero(QQ, 2)) == e1


@pytest.mark.parametrize("n, d, ell, expected", [(2, 1, 5, 6), (3, 1, 5, 31), (3, 2, 2, 7), (4, 2, 2, 35)])
def test_gaussian_binomial(n, d, ell, expected):
    assert gaussian_binomial(n, d, ell) == expected


def test_enumeration_counts():
    assert sum(1 for _ in enumerate_subspaces(F5, 2, 1)) == 6
    subspaces = list(enumerate_all(PrimeField(2), 3))
    assert len(subspaces) == count_subspaces(3, 2) == 16
    assert len(set(subspaces)) == 16


def test_enumeration_respects_budget():
    with pytest.raises(BudgetExceeded) as exc:
        list(enumerate_subspaces(F5, 4, 2, budget=10))
    assert exc.value.requested == gaussian_binomial(4, 2, 5)
    assert check_budget(5, budget=10) == 10


def test_superspaces_of_a_line():
    w = Subspace.span(PrimeField(3), 3, [[1, 1, 0]])
    supers = list(enumerate_superspaces(w))
    # subspaces of F_3^3 / w: 1 + 4 + 1
    assert len(supers) == 6
    assert all(w <= v for v in supers)


def test_standard_flag_meets():
    flag = standard_flag(QQ, 3)
    assert [f.dim for f in flag] == [3, 2, 1, 0]
    u = Subspace.span(QQ, 3, [[0, 0, 1]])
    assert flag_meet_dims(u, flag) == (1, 0, 0, 0)


def test_flag_must_be_nested():
    bad = (Subspace.full(QQ, 2), Subspace.span(QQ, 2, [[1, 0]]), Subspace.span(QQ, 2, [[0, 1]]))
    with pytest.raises(FlagNotNested):
        flag_meet_dims(Subspace.full(QQ, 2), bad)


def test_reduce_and_lift():
    m = Matrix.from_rows(QQ, [[-1, 2], [Fraction(1, 2), 7]])
    r = reduce_mod(m, 5)
    assert r.as_rows() == [[4, 2], [3, 2]]
    assert lift(r).as_rows() == [[-1, 2], [-2, 2]]
    with pytest.raises(FieldMismatch):
        reduce_mod(Matrix.from_rows(QQ, [[Fraction(1, 5)]]), 5)


def test_shape_errors():
    with pytest.raises(DimensionMismatch):
        Matrix.from_rows(QQ, [[1, 2], [3]])
    with pytest.raises(DimensionMismatch):
        Matrix.from_rows(QQ, [[1, 2]]) @ Matrix.from_rows(QQ, [[1, 2]])
