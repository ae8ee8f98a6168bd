"""Matrix tuples as parabolic SU(p,q) Higgs bundles on the punctured sphere.

With U = C^p (x) O(-a+1) and V = C^q (x) O(-a), a Higgs field gamma : U -> V (x) K(D)
is an element of Hom(C^p, C^q) (x) H^0(O(s-3)), i.e. an (s-2)-tuple of q x p
matrices in the monomial basis 1, z, ..., z^(s-3).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from src.algebra.exactlin import Matrix, PrimeField, block_matrix, check_budget, count_subspaces, \
    enumerate_all, image_span, mat_mul
from src.config import get_settings
from src.errors import DimensionMismatch, FieldMismatch, InfeasibleConstruction, InvalidMultiWeight
from src.logs import get_logger
from src.stability.kronecker import MatrixTuple, Status, StabilityVerdict, endomorphism_dim, king_bruteforce
from src.weights.multiweight import MultiWeight, certificate, require_valid
from src.weights.weightgen import a_range

log = get_logger("higgsbridge")


@dataclass(frozen=True)
class SplitBundleData:
    p: int
    q: int
    s: int
    a: int
    deg_vec_u: tuple
    deg_vec_v: tuple
    sections_dim: int

    @property
    def deg_u(self) -> int:
        return sum(self.deg_vec_u)

    @property
    def deg_v(self) -> int:
        return sum(self.deg_vec_v)

    @property
    def d(self) -> int:
        return self.deg_u - self.deg_v


@dataclass(frozen=True)
class Su11Component:
    s: int
    dim: int
    stability_threshold: Fraction
    beta_sum: Fraction
    d: int = 1


@dataclass(frozen=True)
class EquivalenceReport:
    king: StabilityVerdict
    higgs: StabilityVerdict
    equality_witnesses: tuple

    @property
    def agree(self) -> bool:
        return self.king.status is self.higgs.status


def bundle_data(p: int, q: int, s: int, a: int) -> SplitBundleData:
    low, high, ints = a_range(p, q, s)
    if a not in ints:
        raise InfeasibleConstruction("a_range", f"a={a} not an integer in [{low}, {high}]")
    return SplitBundleData(p, q, s, a, (1 - a,) * p, (-a,) * q, s - 2)


def construction_epsilon(mw: MultiWeight) -> Fraction:
    """eps = sum_j (beta^j - alpha^j) for a constant multiweight with integral p alpha^j + q beta^j."""
    if not mw.is_constant():
        raise InvalidMultiWeight(["the Higgs dictionary needs a constant multiweight"])
    for j, (a, b) in enumerate(zip(mw.alpha, mw.beta)):
        k = mw.p * a[0] + mw.q * b[0]
        if k.denominator != 1:
            raise InvalidMultiWeight([f"p alpha + q beta = {k} is not integral at puncture {j + 1}"])
    return sum((b[0] - a[0] for a, b in zip(mw.alpha, mw.beta)), Fraction(0))


def invariant_degree(mw: MultiWeight, dim_u: int, dim_v: int) -> Fraction:
    """Parabolic degree of U' (x) O(-a+1) + V' (x) O(-a) for an invariant pair of dims (dim_u, dim_v)."""
    if not (0 <= dim_u <= mw.p and 0 <= dim_v <= mw.q):
        raise DimensionMismatch(f"dims ({dim_u}, {dim_v}) outside (0..{mw.p}, 0..{mw.q})")
    eps = construction_epsilon(mw)
    return (mw.q * dim_u - mw.p * dim_v) * (1 - eps) / (mw.p + mw.q)


def component_degrees(mw: MultiWeight, d: int, a: int) -> dict:
    """Cross-check of the split degrees against the certificate bookkeeping."""
    cert = certificate(mw, d)
    data = bundle_data(mw.p, mw.q, mw.s, a)
    return {
        "deg_u": cert.deg_u, "deg_v": cert.deg_v,
        "split_deg_u": data.deg_u, "split_deg_v": data.deg_v,
        "consistent": cert.deg_u == data.deg_u and cert.deg_v == data.deg_v and d == data.d,
    }


def higgs_verdict(A: MatrixTuple, mw: MultiWeight, budget: int | None = None) -> tuple[StabilityVerdict, tuple]:
    """Sign test of invariant_degree over all split invariant pairs (U', V' = span of images)."""
    budget = get_settings().budget if budget is None else budget
    check_budget(count_subspaces(A.p, A.field.ell), budget)
    unstable = None
    equalities = []
    examined = 0
    for u in enumerate_all(A.field, A.p, None, budget):
        examined += 1
        v = image_span(A.mats, u)
        deg = invariant_degree(mw, u.dim, v.dim)
        if deg > 0 and unstable is None:
            unstable = StabilityVerdict(Status.UNSTABLE, (u, v), deg, examined=examined)
        elif deg == 0 and (u.dim, v.dim) not in ((0, 0), (A.p, A.q)):
            equalities.append((u, v))
    if unstable is not None:
        return unstable, tuple(equalities)
    if equalities:
        u, v = equalities[0]
        return StabilityVerdict(Status.STRICTLY_SEMISTABLE, (u, v), Fraction(0), examined=examined), tuple(equalities)
    # stable Higgs bundles are simple
    ends = endomorphism_dim(A)
    status = Status.STRICTLY_SEMISTABLE if ends > 1 else Status.STABLE
    return StabilityVerdict(status, None, None, endomorphism_dim=ends, examined=examined), ()


def equivalence_check(A: MatrixTuple, mw: MultiWeight, d: int, budget: int | None = None) -> EquivalenceReport:
    if not isinstance(A.field, PrimeField):
        raise FieldMismatch(f"equivalence_check needs a prime field, got {A.field}")
    require_valid(mw)
    if (A.p, A.q) != (mw.p, mw.q) or A.r != mw.s - 2:
        raise DimensionMismatch(f"tuple ({A.p},{A.q},r={A.r}) does not match weights "
                                f"({mw.p},{mw.q},s={mw.s}); need r = s - 2")
    if not certificate(mw, d).passed:
        log.warning("weights fail the compactness certificate at d=%d", d)
    king = king_bruteforce(A, budget=budget)
    higgs, equalities = higgs_verdict(A, mw, budget)
    report = EquivalenceReport(king, higgs, equalities)
    if not report.agree:
        log.warning("King (%s) and Higgs (%s) verdicts differ", king.status.value, higgs.status.value)
    return report


def su11_component(s: int, beta_profile) -> Su11Component:
    """The SU(1,1) component with alpha^i = 1 - beta^i and d = 1: a P^(s-3) when sum(beta) < (s+1)/2."""
    if s < 3 or s % 2 == 0:
        raise InfeasibleConstruction("parity", f"s={s} must be odd and at least 3")
    betas = [Fraction(b) for b in beta_profile]
    if len(betas) == 1:
        betas = betas * s
    if len(betas) != s:
        raise InfeasibleConstruction("profile_length", f"{len(betas)} values of beta for s={s}")
    if any(not Fraction(1, 2) < b < 1 for b in betas):
        raise InfeasibleConstruction("beta_range", "every beta^i must lie in (1/2, 1)")
    threshold = Fraction(s + 1, 2)
    total = sum(betas, Fraction(0))
    if total >= threshold:
        raise InfeasibleConstruction("stability_threshold", f"sum of beta {total} must be below {threshold}")
    return Su11Component(s, s - 3, threshold, total)


def higgs_field(A: MatrixTuple, z) -> Matrix:
    """The (p+q) x (p+q) field [[0, 0], [gamma(z), 0]] with gamma(z) = sum_k A_k z^k and delta = 0."""
    F = A.field
    z = F.coerce(z)
    gamma = Matrix.zeros(F, A.q, A.p)
    power = F.one
    for a in A.mats:
        gamma = gamma + a.scale(power)
        power = F.mul(power, z)
    return block_matrix(F, [[Matrix.zeros(F, A.p, A.p), Matrix.zeros(F, A.p, A.q)],
                            [gamma, Matrix.zeros(F, A.q, A.q)]])


def trace_powers(phi: Matrix) -> tuple:
    """tr(phi^k) for k = 1..n."""
    F = phi.field
    out = []
    power = phi
    for _ in range(phi.rows):
        acc = F.zero
        for i in range(phi.rows):
            acc = F.add(acc, power[i, i])
        out.append(acc)
        power = mat_mul(power, phi)
    return tuple(out)
