"""Points of E(p,q,r), Hilbert-Mumford weights of the character chi and King stability.

A point is an r-tuple of q x p matrices. The character is
chi(g1, g2) = det(g2)^p' det(g1)^-q' with p' = p/g, q' = q/g and
g = gcd(p, q), so a one-parameter subgroup with gradings (m_i, F_i) on C^p
and (n_j, H_j) on C^q has weight

    mu = sum_n [p' dim V_n - q' dim U_n]
       = p' sum_j n_j dim H_j - q' sum_i m_i dim F_i

whenever A_j(U_n) lies in V_n for every n and j, and +inf otherwise.

``king_bruteforce`` decides stability over F_l by enumerating every subspace
U and comparing dim V against (q/p) dim U for V the span of the images.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed

from src.algebra.exactlin import (
    QQ, Matrix, PrimeField, Subspace, check_budget, count_subspaces, determinant,
    enumerate_subspaces, image_span, inverse, kernel, kron, lift_subspace, mat_mul,
    reduce_mod, solve, subspace_sum,
)
from src.config import get_settings
from src.errors import DimensionMismatch, FieldMismatch
from src.logs import get_logger

log = get_logger("kronecker")

INFINITY = math.inf


class Status(str, Enum):
    STABLE = "Stable"
    STRICTLY_SEMISTABLE = "StrictlySemistable"
    UNSTABLE = "Unstable"


class Existence(str, Enum):
    EMPTY = "Empty"
    NONEMPTY_NO_STABLE = "NonemptyNoStable"
    HAS_STABLE = "HasStable"
    SPECIAL_SQUARE = "SpecialSquare"


@dataclass(frozen=True)
class MatrixTuple:
    p: int
    q: int
    field: object
    mats: tuple

    def __post_init__(self):
        if not self.mats:
            raise DimensionMismatch("a tuple needs at least one matrix")
        for a in self.mats:
            if (a.rows, a.cols) != (self.q, self.p):
                raise DimensionMismatch(f"expected {self.q}x{self.p} matrices, got {a.rows}x{a.cols}")
            if a.field != self.field:
                raise FieldMismatch(f"{a.field} vs {self.field}")

    @classmethod
    def build(cls, field, mats: Sequence[Sequence[Sequence]]) -> "MatrixTuple":
        ms = tuple(Matrix.from_rows(field, m) for m in mats)
        return cls(ms[0].cols, ms[0].rows, field, ms)

    @property
    def r(self) -> int:
        return len(self.mats)

    def reduce(self, ell: int) -> "MatrixTuple":
        return MatrixTuple(self.p, self.q, PrimeField(ell), tuple(reduce_mod(a, ell) for a in self.mats))


@dataclass(frozen=True)
class OneParamSubgroup:
    grading_p: tuple  # ((weight, Subspace), ...) with weights strictly decreasing
    grading_q: tuple

    def __post_init__(self):
        for name, grading in (("p", self.grading_p), ("q", self.grading_q)):
            if not grading:
                raise DimensionMismatch(f"empty grading on the {name} side")
            weights = [w for w, _ in grading]
            if any(a <= b for a, b in zip(weights, weights[1:])):
                raise DimensionMismatch(f"{name}-side weights must be strictly decreasing: {weights}")
            n = grading[0][1].ambient_dim
            total = grading[0][1]
            for _, sub in grading[1:]:
                total = subspace_sum(total, sub)
            if sum(sub.dim for _, sub in grading) != n or total.dim != n:
                raise DimensionMismatch(f"{name}-side pieces must form a direct sum decomposition")

    @property
    def p(self) -> int:
        return self.grading_p[0][1].ambient_dim

    @property
    def q(self) -> int:
        return self.grading_q[0][1].ambient_dim

    @property
    def field(self):
        return self.grading_p[0][1].field

    def weights(self) -> list[int]:
        return [w for w, _ in self.grading_p] + [w for w, _ in self.grading_q]

    def shift(self, k: int) -> "OneParamSubgroup":
        """Compose with the central subgroup t -> (t^k Id_p, t^k Id_q)."""
        return OneParamSubgroup(tuple((w + k, s) for w, s in self.grading_p),
                                tuple((w + k, s) for w, s in self.grading_q))


@dataclass(frozen=True)
class StabilityVerdict:
    status: Status
    witness: tuple | None = None  # (U, V)
    mu_value: Fraction | None = None
    endomorphism_dim: int | None = None
    examined: int = 0

    @property
    def semistable(self) -> bool:
        return self.status is not Status.UNSTABLE


def coprime_weights(p: int, q: int) -> tuple[int, int]:
    g = math.gcd(p, q)
    return p // g, q // g


def _sum_of(field, n: int, pieces) -> Subspace:
    out = Subspace.zero(field, n)
    for s in pieces:
        out = subspace_sum(out, s)
    return out


def filtration(lam: OneParamSubgroup, n: int) -> tuple[Subspace, Subspace]:
    """(U_n, V_n): sums of the pieces of weight at least n."""
    u = _sum_of(lam.field, lam.p, (s for w, s in lam.grading_p if w >= n))
    v = _sum_of(lam.field, lam.q, (s for w, s in lam.grading_q if w >= n))
    return u, v


def _compatible(lam: OneParamSubgroup, A: MatrixTuple):
    if (lam.p, lam.q) != (A.p, A.q):
        raise DimensionMismatch(f"subgroup acts on ({lam.p},{lam.q}), tuple lives in ({A.p},{A.q})")
    if lam.field != A.field:
        raise FieldMismatch(f"{lam.field} vs {A.field}")


def is_limit_finite(lam: OneParamSubgroup, A: MatrixTuple) -> bool:
    # U_n, V_n only change at weight values, so those n suffice
    for n in sorted(set(lam.weights())):
        u, v = filtration(lam, n)
        if not image_span(A.mats, u) <= v:
            return False
    return True


def mu_chi(lam: OneParamSubgroup, A: MatrixTuple):
    _compatible(lam, A)
    if not is_limit_finite(lam, A):
        return INFINITY
    pp, qq = coprime_weights(A.p, A.q)
    ws = lam.weights()
    total = 0
    for n in range(min(ws), max(ws) + 1):
        u, v = filtration(lam, n)
        total += pp * v.dim - qq * u.dim
    return Fraction(total)


def mu_chi_eigen(lam: OneParamSubgroup, A: MatrixTuple):
    _compatible(lam, A)
    if not is_limit_finite(lam, A):
        return INFINITY
    pp, qq = coprime_weights(A.p, A.q)
    return Fraction(pp * sum(w * s.dim for w, s in lam.grading_q)
                    - qq * sum(w * s.dim for w, s in lam.grading_p))


def projector_subgroup(u: Subspace, v: Subspace) -> OneParamSubgroup:
    """Weight 1 on u and v, weight 0 on their coordinate complements."""
    def grading(s: Subspace):
        pieces = [(1, s), (0, s.complement())]
        return tuple((w, x) for w, x in pieces if x.dim > 0)
    return OneParamSubgroup(grading(u), grading(v))


def pair_weight(p: int, q: int, dim_u: int, dim_v: int) -> Fraction:
    pp, qq = coprime_weights(p, q)
    return Fraction(pp * dim_v - qq * dim_u)


# -- King oracle -------------------------------------------------------------

def _scan_dimension(A: MatrixTuple, d: int, budget: int):
    unstable = equality = None
    seen = 0
    for u in enumerate_subspaces(A.field, A.p, d, budget):
        seen += 1
        v = image_span(A.mats, u)
        balance = A.p * v.dim - A.q * u.dim
        if balance < 0:
            unstable = (u, v)
            break
        if balance == 0 and equality is None and not (u.dim == A.p and v.dim == A.q):
            equality = (u, v)
    return unstable, equality, seen


def endomorphism_dim(A: MatrixTuple) -> int:
    """dim of {(X, Y) : Y A_j = A_j X for all j}; at least 1 (the scalars)."""
    p, q, F = A.p, A.q, A.field
    n_unknowns = p * p + q * q
    rows = []
    for a in A.mats:
        for c in range(q):
            for b in range(p):
                row = [F.zero] * n_unknowns
                for k in range(p):
                    # -(A X)_{c,b} = -sum_k A[c,k] X[k,b]
                    row[k * p + b] = F.sub(row[k * p + b], a[c, k])
                for k in range(q):
                    # (Y A)_{c,b} = sum_k Y[c,k] A[k,b]
                    idx = p * p + c * q + k
                    row[idx] = F.add(row[idx], a[k, b])
                rows.append(row)
    return kernel(Matrix.from_rows(F, rows, n_unknowns)).dim


def king_bruteforce(A: MatrixTuple, budget: int | None = None, threads: int | None = None) -> StabilityVerdict:
    if not isinstance(A.field, PrimeField):
        raise FieldMismatch(f"king_bruteforce needs a prime field, got {A.field}")
    settings = get_settings()
    budget = settings.budget if budget is None else budget
    threads = settings.threads if threads is None else threads
    dims = range(1, A.p + 1)
    check_budget(count_subspaces(A.p, A.field.ell, dims), budget)
    shards = Parallel(n_jobs=threads)(delayed(_scan_dimension)(A, d, budget) for d in dims)
    examined = sum(s[2] for s in shards)
    found = [s[0] for s in shards if s[0] is not None]
    if found:
        # shards come back in dimension order, each with its first echelon-order hit
        u, v = found[0]
        log.info("King verdict Unstable with dim U=%d, dim V=%d", u.dim, v.dim)
        return StabilityVerdict(Status.UNSTABLE, (u, v), pair_weight(A.p, A.q, u.dim, v.dim),
                                examined=examined)
    for _, equality, _ in shards:
        if equality is not None:
            log.info("King verdict StrictlySemistable")
            return StabilityVerdict(Status.STRICTLY_SEMISTABLE, equality, Fraction(0), examined=examined)
    ends = endomorphism_dim(A)
    status = Status.STRICTLY_SEMISTABLE if ends > 1 else Status.STABLE
    log.info("King verdict %s (End dimension %d)", status.value, ends)
    return StabilityVerdict(status, None, None, endomorphism_dim=ends, examined=examined)


def is_witness(A: MatrixTuple, u: Subspace) -> bool:
    """True iff (u, image) violates dim V >= (q/p) dim U, checked exactly."""
    v = image_span(A.mats, u)
    return A.p * v.dim < A.q * u.dim


# -- blow-up certificates ------------------------------------------------------

@dataclass(frozen=True)
class BlowupCertificate:
    size: int
    blocks: tuple  # d x d matrices T_j with det(sum A_j (x) T_j) != 0


def blowup_matrix(A: MatrixTuple, blocks: Sequence[Matrix]) -> Matrix:
    out = None
    for a, t in zip(A.mats, blocks):
        term = kron(a, t)
        out = term if out is None else out + term
    return out


def blowup_certificate(A: MatrixTuple, sizes: Sequence[int] = (1, 2, 3), attempts: int = 200,
                       seed: int = 0) -> BlowupCertificate | None:
    """Search for T_j with sum A_j (x) T_j invertible; such T_j prove semistability of a square tuple."""
    if A.p != A.q:
        raise DimensionMismatch("blow-up certificates apply to square tuples")
    F = A.field
    high = F.ell if isinstance(F, PrimeField) else 7
    rng = np.random.default_rng(seed)
    for d in sizes:
        for _ in range(attempts):
            blocks = tuple(Matrix.from_rows(F, rng.integers(0, high, size=(d, d)).tolist(), d)
                           for _ in range(A.r))
            if not F.is_zero(determinant(blowup_matrix(A, blocks))):
                log.debug("blow-up certificate of size %d found", d)
                return BlowupCertificate(d, blocks)
    return None


def verify_blowup(A: MatrixTuple, cert: BlowupCertificate) -> bool:
    return not A.field.is_zero(determinant(blowup_matrix(A, cert.blocks)))


# -- existence ---------------------------------------------------------------

@dataclass(frozen=True)
class ExistenceReport:
    kind: Existence
    all_semistable_stable: bool
    moduli_dim: int | None
    ratio_sum: Fraction


def existence(p: int, q: int, r: int) -> ExistenceReport:
    """Classify R(p,q,r) by the quadratic form of the reduced dimension vector."""
    g = math.gcd(p, q)
    p0, q0 = p // g, q // g
    t0 = p0 * p0 + q0 * q0 - r * p0 * q0
    ratio = Fraction(p, q) + Fraction(q, p)
    if t0 > 1:
        kind, dim = Existence.EMPTY, None
    elif t0 < 0 or (t0 in (0, 1) and g == 1):
        kind, dim = Existence.HAS_STABLE, r * p * q - p * p - q * q + 1
    elif p == q and r in (1, 2):
        kind, dim = Existence.SPECIAL_SQUARE, (0 if r == 1 else p)
    else:
        # multiples of real or isotropic roots: only polystable points
        kind, dim = Existence.NONEMPTY_NO_STABLE, None
    return ExistenceReport(kind, g == 1, dim, ratio)


# -- pencils -----------------------------------------------------------------

@dataclass(frozen=True)
class PencilResult:
    semistable: bool
    binary_form: tuple  # coefficients of X^p, X^(p-1) Y, ..., Y^p
    raw_form: tuple


def pencil_coefficients(a1: Matrix, a2: Matrix) -> tuple:
    """Coefficients of det(X a1 + Y a2), X^p first, by interpolation at t = 0..p."""
    if a1.rows != a1.cols or (a1.rows, a1.cols) != (a2.rows, a2.cols):
        raise DimensionMismatch("pencils need two square matrices of the same size")
    if a1.field != a2.field:
        raise FieldMismatch(f"{a1.field} vs {a2.field}")
    F = a1.field
    p = a1.rows
    if isinstance(F, PrimeField) and F.ell <= p:
        raise FieldMismatch(f"interpolation of a degree-{p} form needs more than {p} points")
    values = [determinant(a1 + a2.scale(t)) for t in range(p + 1)]
    vander = Matrix.from_rows(F, [[t ** k for k in range(p + 1)] for t in range(p + 1)], p + 1)
    return solve(vander, values)


def pencil(a1: Matrix, a2: Matrix) -> PencilResult:
    raw = pencil_coefficients(a1, a2)
    F = a1.field
    lead = next((c for c in raw if not F.is_zero(c)), None)
    if lead is None:
        return PencilResult(False, tuple(F.zero for _ in raw), raw)
    inv = F.inv(lead)
    return PencilResult(True, tuple(F.mul(inv, c) for c in raw), raw)


def is_good_prime(a1: Matrix, a2: Matrix, ell: int) -> bool:
    """ell is good when it does not kill every coefficient of the integral pencil form."""
    raw = pencil_coefficients(a1, a2)
    if all(c == 0 for c in raw):
        return True
    den = math.lcm(*(Fraction(c).denominator for c in raw))
    g = math.gcd(*(int(Fraction(c) * den) for c in raw))
    return g % ell != 0


# -- group action and sampling ----------------------------------------------

def act(g: Matrix, h: Matrix, A: MatrixTuple) -> MatrixTuple:
    """(g, h) . A = (h A_j g^-1)."""
    gi = inverse(g)
    return MatrixTuple(A.p, A.q, A.field, tuple(mat_mul(mat_mul(h, a), gi) for a in A.mats))


def random_matrix(field, rows: int, cols: int, rng: np.random.Generator, bound: int = 2) -> Matrix:
    if isinstance(field, PrimeField):
        vals = rng.integers(0, field.ell, size=(rows, cols))
    else:
        vals = rng.integers(-bound, bound + 1, size=(rows, cols))
    return Matrix.from_rows(field, vals.tolist(), cols)


def random_invertible(field, n: int, rng: np.random.Generator, bound: int = 2) -> Matrix:
    while True:
        g = random_matrix(field, n, n, rng, bound)
        if not field.is_zero(determinant(g)):
            return g


def random_tuple(p: int, q: int, r: int, field, rng: np.random.Generator, bound: int = 2) -> MatrixTuple:
    return MatrixTuple(p, q, field, tuple(random_matrix(field, q, p, rng, bound) for _ in range(r)))


def search_stable(p: int, q: int, r: int, field, draws: int, seed: int = 0,
                  budget: int | None = None) -> tuple[StabilityVerdict | None, int, list[Status]]:
    """Seeded random search for a Stable point; returns (verdict, draws used, statuses seen)."""
    rng = np.random.default_rng(seed)
    seen = []
    for i in range(draws):
        verdict = king_bruteforce(random_tuple(p, q, r, field, rng), budget=budget, threads=1)
        seen.append(verdict.status)
        if verdict.status is Status.STABLE:
            return verdict, i + 1, seen
    return None, draws, seen


# -- characteristic zero -----------------------------------------------------

@dataclass(frozen=True)
class CharZeroReport:
    status: str  # "Stable", "Semistable", "Unstable", "LikelyUnstable" or "Undecided"
    per_prime: dict
    witness: tuple | None


def lift_semistable(A: MatrixTuple, primes: Sequence[int] | None = None,
                    budget: int | None = None) -> CharZeroReport:
    """Decide a rational tuple by mod-l oracles.

    A rational destabilising pair saturates to a lattice pair whose reduction
    keeps its dimensions, and dim End can only grow mod l. So a Stable or
    semistable reduction settles the rational tuple; instability is claimed
    only for a lifted witness verified over Q.
    """
    if A.field != QQ:
        raise FieldMismatch("lift_semistable needs a rational tuple")
    primes = get_settings().primes if primes is None else primes
    per_prime = {}
    for ell in primes:
        try:
            reduced = A.reduce(ell)
        except FieldMismatch:
            per_prime[ell] = "BadPrime"
            continue
        verdict = king_bruteforce(reduced, budget=budget)
        per_prime[ell] = verdict.status.value
        if verdict.status is Status.UNSTABLE:
            u = lift_subspace(verdict.witness[0])
            if is_witness(A, u):
                log.info("lifted witness from F_%d verified over Q", ell)
                return CharZeroReport("Unstable", per_prime, (u, image_span(A.mats, u)))
    seen = set(per_prime.values())
    if Status.STABLE.value in seen:
        status = "Stable"
    elif Status.STRICTLY_SEMISTABLE.value in seen:
        status = "Semistable"
    elif Status.UNSTABLE.value in seen:
        status = "LikelyUnstable"
    else:
        status = "Undecided"
    return CharZeroReport(status, per_prime, None)
