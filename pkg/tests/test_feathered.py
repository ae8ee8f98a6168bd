from fractions import Fraction as Q

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.algebra.exactlin import PrimeField, Subspace, enumerate_all, enumerate_superspaces, image_span, standard_flag
from src.errors import BudgetExceeded, DimensionMismatch, FieldMismatch, FlagNotNested
from src.stability.feathered import (FeatherWeights, FlagConfiguration, feathered_verdict, flag_correction,
                                     flag_weight_sum, mu_flag_configuration, mu_grassmannian, mu_pair,
                                     perturbation_threshold, small_perturbation_check)
from src.stability.kronecker import (INFINITY, MatrixTuple, OneParamSubgroup, Status, act, king_bruteforce,
                                     projector_subgroup, random_invertible, random_tuple)

F3, F5 = PrimeField(3), PrimeField(5)


def standard_config(field, s, p, q):
    return FlagConfiguration(s, (standard_flag(field, p),) * s, (standard_flag(field, q),) * s)


def random_config(field, s, p, q, rng):
    base = standard_config(field, s, p, q)
    flags_p = tuple(base.act(random_invertible(field, p, rng), random_invertible(field, q, rng)).p_flags[0]
                    for _ in range(s))
    flags_q = tuple(base.act(random_invertible(field, p, rng), random_invertible(field, q, rng)).q_flags[0]
                    for _ in range(s))
    return FlagConfiguration(s, flags_p, flags_q)


def increasing(n, rng):
    steps = rng.integers(1, 4, size=n)
    start = Q(int(rng.integers(-3, 1)), 2)
    return [start + Q(int(x), 3) for x in np.cumsum(steps) - steps[0]]


def random_feathers(s, p, q, rng):
    return FeatherWeights.build([increasing(p, rng) for _ in range(s)], [increasing(q, rng) for _ in range(s)])


def instances():
    return st.tuples(st.integers(1, 2), st.integers(1, 2), st.integers(1, 2), st.integers(1, 2),
                     st.integers(0, 10_000))


# -- weights of flags ------------------------------------------------------------

def test_flag_weight_sum_examples():
    flag = standard_flag(F5, 2)
    w = (Q(1, 3), Q(2, 3))
    assert flag_weight_sum(Subspace.zero(F5, 2), flag, w) == 0
    assert flag_weight_sum(Subspace.full(F5, 2), flag, w) == 1
    # dims along the flag are (1, 1, 0), so only the last step counts
    assert flag_weight_sum(flag[1], flag, w) == Q(2, 3)


def test_flag_weight_sum_length_checked():
    with pytest.raises(DimensionMismatch):
        flag_weight_sum(Subspace.full(F5, 2), standard_flag(F5, 2), (1,))


def test_mu_grassmannian_examples():
    e1 = Subspace.span(F5, 2, [[1, 0]])
    e2 = Subspace.span(F5, 2, [[0, 1]])
    grading = ((1, e1), (0, e2))
    assert mu_grassmannian(grading, e1, 1, 2) == -1
    assert mu_grassmannian(grading, e2, 1, 2) == 1
    assert mu_grassmannian(((0, Subspace.full(F5, 2)),), e1, 1, 2) == 0
    with pytest.raises(DimensionMismatch):
        mu_grassmannian(grading, e1, 2, 2)


def test_mu_pair_examples():
    h = Q(2, 7)
    cfg = standard_config(F5, 1, 1, 1)
    fw = FeatherWeights.build([[h]], [[-h]])
    zero, full = Subspace.zero(F5, 1), Subspace.full(F5, 1)
    assert mu_pair(zero, zero, cfg, fw) == 0
    assert mu_pair(full, full, cfg, fw) == 0
    assert mu_pair(zero, full, cfg, fw) == 1


def test_feather_weights_must_increase():
    with pytest.raises(DimensionMismatch):
        FeatherWeights.build([[1, 0]], [[0]])
    assert FeatherWeights.zero(2, 2, 3).is_zero()


def test_flags_must_be_complete():
    n = 3
    skipping = (Subspace.full(F5, n), Subspace.span(F5, n, [[1, 0, 0]]), Subspace.zero(F5, n))
    with pytest.raises(FlagNotNested):
        FlagConfiguration(1, (skipping,), (standard_flag(F5, 1),))


@settings(max_examples=30, deadline=None)
@given(instances())
def test_full_and_zero_pairs_vanish(case):
    p, q, s, r, seed = case
    rng = np.random.default_rng(seed)
    cfg, fw = random_config(F3, s, p, q, rng), random_feathers(s, p, q, rng)
    assert mu_pair(Subspace.zero(F3, p), Subspace.zero(F3, q), cfg, fw) == 0
    assert mu_pair(Subspace.full(F3, p), Subspace.full(F3, q), cfg, fw) == 0


@settings(max_examples=30, deadline=None)
@given(instances())
def test_projector_weight_splits_into_kronecker_and_flag_terms(case):
    p, q, s, r, seed = case
    rng = np.random.default_rng(seed)
    A = random_tuple(p, q, r, F3, rng)
    cfg, fw = random_config(F3, s, p, q, rng), random_feathers(s, p, q, rng)
    for u in enumerate_all(F3, p):
        for v in enumerate_superspaces(image_span(A.mats, u)):
            lam = projector_subgroup(u, v)
            assert mu_flag_configuration(lam, A, cfg, fw) == mu_pair(u, v, cfg, fw)


def test_flag_configuration_weight_is_infinite_without_limit():
    A = MatrixTuple.build(F5, [[[1]]])
    full = Subspace.full(F5, 1)
    lam = OneParamSubgroup(((2, full),), ((1, full),))
    cfg = standard_config(F5, 1, 1, 1)
    assert mu_flag_configuration(lam, A, cfg, FeatherWeights.zero(1, 1, 1)) == INFINITY


# -- verdicts --------------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(instances())
def test_zero_feathers_reduce_to_king(case):
    p, q, s, r, seed = case
    rng = np.random.default_rng(seed)
    A = random_tuple(p, q, r, F3, rng)
    cfg = random_config(F3, s, p, q, rng)
    verdict = feathered_verdict(A, cfg, FeatherWeights.zero(s, p, q))
    assert verdict.status is king_bruteforce(A).status
    assert small_perturbation_check(A, cfg, FeatherWeights.zero(s, p, q)).status is verdict.status


@settings(max_examples=30, deadline=None)
@given(instances())
def test_small_feathers_follow_the_perturbation_criterion(case):
    p, q, s, r, seed = case
    rng = np.random.default_rng(seed)
    A = random_tuple(p, q, r, F3, rng)
    cfg, fw = random_config(F3, s, p, q, rng), random_feathers(s, p, q, rng)
    t = perturbation_threshold(A, cfg, fw)
    scaled = fw if t == INFINITY else fw.scaled(t / 2)
    assert feathered_verdict(A, cfg, scaled).status is small_perturbation_check(A, cfg, fw).status


@settings(max_examples=20, deadline=None)
@given(instances())
def test_feathered_verdict_is_invariant_under_the_group(case):
    p, q, s, r, seed = case
    rng = np.random.default_rng(seed)
    A = random_tuple(p, q, r, F3, rng)
    cfg, fw = random_config(F3, s, p, q, rng), random_feathers(s, p, q, rng)
    g, h = random_invertible(F3, p, rng), random_invertible(F3, q, rng)
    moved = feathered_verdict(act(g, h, A), cfg.act(g, h), fw)
    assert moved.status is feathered_verdict(A, cfg, fw).status


def test_scaling_feathers_scales_mu_pair():
    cfg = standard_config(F5, 1, 2, 2)
    fw = FeatherWeights.build([[0, 1]], [[Q(-1, 2), Q(1, 2)]])
    u = Subspace.span(F5, 2, [[1, 0]])
    v = Subspace.span(F5, 2, [[0, 1]])
    assert flag_correction(u, v, cfg, fw.scaled(3)) == 3 * flag_correction(u, v, cfg, fw)


def test_coprime_stable_point_is_stable_for_small_feathers():
    A = MatrixTuple.build(F3, [[[1], [0]], [[0], [1]], [[1], [1]]])
    rng = np.random.default_rng(4)
    cfg, fw = random_config(F3, 2, 1, 2, rng), random_feathers(2, 1, 2, rng)
    assert small_perturbation_check(A, cfg, fw).status is Status.STABLE
    t = perturbation_threshold(A, cfg, fw)
    scaled = fw if t == INFINITY else fw.scaled(t / 2)
    assert feathered_verdict(A, cfg, scaled).status is Status.STABLE


def test_scalar_tuple_with_opposite_feathers():
    A = MatrixTuple.build(F5, [[[1]]])
    fw = FeatherWeights.build([[Q(1, 3)]], [[Q(-1, 3)]])
    verdict = feathered_verdict(A, standard_config(F5, 1, 1, 1), fw)
    # every invariant pair other than (0, 0) and (C, C) has positive weight
    assert verdict.status is Status.STABLE


def test_identity_pencil_tie_broken_by_flags():
    A = MatrixTuple.build(F5, [[[1, 0], [0, 1]]])
    cfg = standard_config(F5, 1, 2, 2)
    # U = V = span(e1) meets both flags at their first step
    fw = FeatherWeights.build([[0, 1]], [[0, 1]])
    u = Subspace.span(F5, 2, [[1, 0]])
    assert flag_correction(u, u, cfg, fw) == -1
    verdict = small_perturbation_check(A, cfg, fw)
    assert verdict.status is Status.UNSTABLE
    assert verdict.witness == (u, u)


def test_feathered_needs_prime_field_and_matching_shapes():
    from src.algebra.exactlin import QQ
    with pytest.raises(FieldMismatch):
        feathered_verdict(MatrixTuple.build(QQ, [[[1]]]), standard_config(QQ, 1, 1, 1),
                          FeatherWeights.zero(1, 1, 1))
    with pytest.raises(DimensionMismatch):
        feathered_verdict(MatrixTuple.build(F5, [[[1]]]), standard_config(F5, 2, 1, 1),
                          FeatherWeights.zero(1, 1, 1))


def test_feathered_respects_budget():
    A = MatrixTuple.build(F5, [[[0] * 3] * 3])
    with pytest.raises(BudgetExceeded):
        feathered_verdict(A, standard_config(F5, 1, 3, 3), FeatherWeights.zero(1, 3, 3), budget=100)
