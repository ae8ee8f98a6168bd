"""Flag-decorated Kronecker data and its (eta, zeta)-stability.

For an invariant pair (U, V) the slope function is

    mu(U, V) = (|eta|/p - q) dim U - |eta(U n F)| + (|zeta|/q + p) dim V - |zeta(V n H)|

where |eta(U n F)| sums, over the punctures, the weights eta_i of the steps of
the flag where U loses a dimension. With eta = zeta = 0 this is King's
p dim V - q dim U.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from joblib import Parallel, delayed

from src.algebra.exactlin import (
    PrimeField, Subspace, check_budget, check_flag, count_subspaces, enumerate_all,
    enumerate_superspaces, flag_meet_dims, image_span, meet_dim, subspace_sum,
)
from src.config import get_settings
from src.errors import DimensionMismatch, FieldMismatch
from src.logs import get_logger
from src.stability.kronecker import (
    INFINITY, MatrixTuple, OneParamSubgroup, Status, StabilityVerdict, endomorphism_dim,
    mu_chi,
)

log = get_logger("feathered")


@dataclass(frozen=True)
class FlagConfiguration:
    s: int
    p_flags: tuple  # s complete flags (F_0 = C^p, ..., F_p = 0)
    q_flags: tuple

    def __post_init__(self):
        if len(self.p_flags) != self.s or len(self.q_flags) != self.s:
            raise DimensionMismatch(f"expected {self.s} flags on each side")
        for flag in self.p_flags:
            check_flag(flag, flag[0].ambient_dim, complete=True)
        for flag in self.q_flags:
            check_flag(flag, flag[0].ambient_dim, complete=True)

    @property
    def p(self) -> int:
        return self.p_flags[0][0].ambient_dim

    @property
    def q(self) -> int:
        return self.q_flags[0][0].ambient_dim

    def act(self, g, h) -> "FlagConfiguration":
        """Push every flag forward by (g, h)."""
        def move(m, flag):
            return tuple(Subspace.span(m.field, m.rows, [m.apply(r) for r in f.rows]) for f in flag)
        return FlagConfiguration(self.s, tuple(move(g, f) for f in self.p_flags),
                                 tuple(move(h, f) for f in self.q_flags))


@dataclass(frozen=True)
class FeatherWeights:
    eta: tuple  # s rows of p rationals, strictly increasing
    zeta: tuple  # s rows of q rationals, strictly increasing

    def __post_init__(self):
        if self.is_zero():
            return
        for row in self.eta + self.zeta:
            if any(a >= b for a, b in zip(row, row[1:])):
                raise DimensionMismatch(f"feather weights must be strictly increasing: {row}")

    @classmethod
    def build(cls, eta: Sequence[Sequence], zeta: Sequence[Sequence]) -> "FeatherWeights":
        return cls(tuple(tuple(Fraction(x) for x in r) for r in eta),
                   tuple(tuple(Fraction(x) for x in r) for r in zeta))

    @classmethod
    def zero(cls, s: int, p: int, q: int) -> "FeatherWeights":
        return cls(tuple((Fraction(0),) * p for _ in range(s)),
                   tuple((Fraction(0),) * q for _ in range(s)))

    @property
    def norm_eta(self) -> Fraction:
        return sum((x for r in self.eta for x in r), Fraction(0))

    @property
    def norm_zeta(self) -> Fraction:
        return sum((x for r in self.zeta for x in r), Fraction(0))

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.eta + self.zeta for x in r)

    def scaled(self, t) -> "FeatherWeights":
        t = Fraction(t)
        return FeatherWeights(tuple(tuple(t * x for x in r) for r in self.eta),
                              tuple(tuple(t * x for x in r) for r in self.zeta))


def flag_weight_sum(u: Subspace, flag: Sequence[Subspace], w: Sequence) -> Fraction:
    """sum_i w_i (dim U n F_{i-1} - dim U n F_i)."""
    dims = flag_meet_dims(u, flag)
    if len(w) != len(dims) - 1:
        raise DimensionMismatch(f"{len(w)} weights for a flag of length {len(dims) - 1}")
    return sum((Fraction(x) * (a - b) for x, a, b in zip(w, dims, dims[1:])), Fraction(0))


def mu_grassmannian(lam_grading: Sequence, F: Subspace, i: int, p: int) -> Fraction:
    """sum_n [i dim U_n - p dim(U_n n F)] for F in Gr_i(C^p), i.e. dim F = i."""
    if F.dim != i or F.ambient_dim != p:
        raise DimensionMismatch(f"F has dim {F.dim} in C^{F.ambient_dim}, expected Gr_{i}(C^{p})")
    weights = [w for w, _ in lam_grading]
    total = 0
    for n in range(min(weights), max(weights) + 1):
        u = Subspace.zero(F.field, p)
        for w, piece in lam_grading:
            if w >= n:
                u = subspace_sum(u, piece)
        meet = meet_dim(u, F)
        total += i * u.dim - p * meet
    return Fraction(total)


def _flag_terms(u: Subspace, v: Subspace, cfg: FlagConfiguration, fw: FeatherWeights) -> tuple[Fraction, Fraction]:
    eta_u = sum((flag_weight_sum(u, f, w) for f, w in zip(cfg.p_flags, fw.eta)), Fraction(0))
    zeta_v = sum((flag_weight_sum(v, f, w) for f, w in zip(cfg.q_flags, fw.zeta)), Fraction(0))
    return eta_u, zeta_v


def mu_pair(u: Subspace, v: Subspace, cfg: FlagConfiguration, fw: FeatherWeights) -> Fraction:
    p, q = cfg.p, cfg.q
    if u.ambient_dim != p or v.ambient_dim != q:
        raise DimensionMismatch("pair does not live in (C^p, C^q)")
    eta_u, zeta_v = _flag_terms(u, v, cfg, fw)
    return ((fw.norm_eta / p - q) * u.dim - eta_u
            + (fw.norm_zeta / q + p) * v.dim - zeta_v)


def flag_correction(u: Subspace, v: Subspace, cfg: FlagConfiguration, fw: FeatherWeights) -> Fraction:
    """phi(U, V) with mu_pair = (p dim V - q dim U) + phi."""
    eta_u, zeta_v = _flag_terms(u, v, cfg, fw)
    return (fw.norm_eta * u.dim / cfg.p - eta_u) + (fw.norm_zeta * v.dim / cfg.q - zeta_v)


def mu_flag_configuration(lam: OneParamSubgroup, A: MatrixTuple, cfg: FlagConfiguration,
                          fw: FeatherWeights):
    """Total weight: gcd * mu_chi plus the Grassmannian terms weighted by the feather gaps."""
    base = mu_chi(lam, A)
    if base == INFINITY:
        return INFINITY
    p, q = A.p, A.q
    total = math.gcd(p, q) * base
    for flag, w in zip(cfg.p_flags, fw.eta):
        for i in range(1, p):
            total += (w[i] - w[i - 1]) * mu_grassmannian(lam.grading_p, flag[i], p - i, p) / p
    for flag, w in zip(cfg.q_flags, fw.zeta):
        for i in range(1, q):
            total += (w[i] - w[i - 1]) * mu_grassmannian(lam.grading_q, flag[i], q - i, q) / q
    return total


def _check(A: MatrixTuple, cfg: FlagConfiguration, fw: FeatherWeights):
    if not isinstance(A.field, PrimeField):
        raise FieldMismatch(f"feathered oracles need a prime field, got {A.field}")
    if (cfg.p, cfg.q) != (A.p, A.q) or len(fw.eta) != cfg.s or len(fw.zeta) != cfg.s:
        raise DimensionMismatch("tuple, flags and feather weights disagree on their shapes")


def _is_trivial(u: Subspace, v: Subspace, p: int, q: int) -> bool:
    return (u.dim, v.dim) in ((0, 0), (p, q))


def _scan_pairs(A, cfg, fw, d, budget):
    unstable = equality = None
    seen = 0
    for u in enumerate_all(A.field, A.p, [d], budget):
        w = image_span(A.mats, u)
        for v in enumerate_superspaces(w, budget):
            seen += 1
            mu = mu_pair(u, v, cfg, fw)
            if mu < 0:
                return (u, v, mu), equality, seen
            if mu == 0 and equality is None and not _is_trivial(u, v, A.p, A.q):
                equality = (u, v, mu)
    return unstable, equality, seen


def _finish(A, unstable, equality, examined, use_endomorphisms) -> StabilityVerdict:
    if unstable is not None:
        u, v, mu = unstable
        return StabilityVerdict(Status.UNSTABLE, (u, v), mu, examined=examined)
    if equality is not None:
        u, v, mu = equality
        return StabilityVerdict(Status.STRICTLY_SEMISTABLE, (u, v), mu, examined=examined)
    if use_endomorphisms:
        ends = endomorphism_dim(A)
        status = Status.STRICTLY_SEMISTABLE if ends > 1 else Status.STABLE
        return StabilityVerdict(status, None, None, endomorphism_dim=ends, examined=examined)
    return StabilityVerdict(Status.STABLE, None, None, examined=examined)


def feathered_verdict(A: MatrixTuple, cfg: FlagConfiguration, fw: FeatherWeights,
                      budget: int | None = None, threads: int | None = None) -> StabilityVerdict:
    _check(A, cfg, fw)
    settings = get_settings()
    budget = settings.budget if budget is None else budget
    threads = settings.threads if threads is None else threads
    ell = A.field.ell
    check_budget(count_subspaces(A.p, ell) * count_subspaces(A.q, ell), budget, "subspace pairs")
    shards = Parallel(n_jobs=threads)(delayed(_scan_pairs)(A, cfg, fw, d, budget)
                                      for d in range(A.p + 1))
    examined = sum(s[2] for s in shards)
    unstable = next((s[0] for s in shards if s[0] is not None), None)
    equality = next((s[1] for s in shards if s[1] is not None), None)
    verdict = _finish(A, unstable, equality, examined, fw.is_zero())
    log.info("feathered verdict %s after %d pairs", verdict.status.value, examined)
    return verdict


def _invariant_pairs(A: MatrixTuple, budget: int):
    for u in enumerate_all(A.field, A.p, None, budget):
        yield u, image_span(A.mats, u)


def small_perturbation_check(A: MatrixTuple, cfg: FlagConfiguration, fw: FeatherWeights,
                             budget: int | None = None) -> StabilityVerdict:
    """Verdict for t * (eta, zeta) with t small: King first, flag terms only break King ties."""
    _check(A, cfg, fw)
    budget = get_settings().budget if budget is None else budget
    p, q = A.p, A.q
    unstable = equality = None
    examined = 0
    for u, v in _invariant_pairs(A, budget):
        examined += 1
        balance = p * v.dim - q * u.dim
        if balance < 0:
            unstable = (u, v, Fraction(balance))
            break
        if balance > 0 or _is_trivial(u, v, p, q):
            continue
        # tie: semistable iff |eta(U n F)| + |zeta(V n H)| <= (|eta| + |zeta|) dim V / q
        phi = flag_correction(u, v, cfg, fw)
        if phi < 0:
            unstable = (u, v, phi)
            break
        if phi == 0 and equality is None:
            equality = (u, v, phi)
    return _finish(A, unstable, equality, examined, fw.is_zero())


def perturbation_threshold(A: MatrixTuple, cfg: FlagConfiguration, fw: FeatherWeights,
                           budget: int | None = None):
    """t* such that scaling fw by any 0 < t < t* cannot flip the sign of a nonzero King balance."""
    _check(A, cfg, fw)
    budget = get_settings().budget if budget is None else budget
    ell = A.field.ell
    check_budget(count_subspaces(A.p, ell) * count_subspaces(A.q, ell), budget, "subspace pairs")
    p, q = A.p, A.q
    gap = None
    worst = Fraction(0)
    for u in enumerate_all(A.field, p, None, budget):
        w = image_span(A.mats, u)
        for v in enumerate_superspaces(w, budget):
            balance = abs(p * v.dim - q * u.dim)
            if balance and (gap is None or balance < gap):
                gap = balance
            worst = max(worst, abs(flag_correction(u, v, cfg, fw)))
    if worst == 0 or gap is None:
        return INFINITY
    return Fraction(gap) / worst
