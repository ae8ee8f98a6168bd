"""SU(p,q)-multiweights, the compactness certificate and parabolic line bundles.

All quantities are exact ``Fraction`` values. Holonomy phases are kept as
rationals mod 1; the eigenvalue of the j-th boundary holonomy is
exp(2*pi*i*phase).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from src.errors import InvalidMultiWeight, InvalidTwist
from src.logs import get_logger

log = get_logger("multiweight")


def frac_part(x: Fraction) -> Fraction:
    return x - math.floor(x)


@dataclass(frozen=True)
class MultiWeight:
    p: int
    q: int
    s: int
    alpha: tuple  # s rows of p rationals
    beta: tuple  # s rows of q rationals

    @classmethod
    def build(cls, p: int, q: int, alpha: Sequence[Sequence], beta: Sequence[Sequence]) -> "MultiWeight":
        a = tuple(tuple(Fraction(x) for x in row) for row in alpha)
        b = tuple(tuple(Fraction(x) for x in row) for row in beta)
        return cls(p, q, len(a), a, b)

    @classmethod
    def constant(cls, p: int, q: int, alphas: Sequence, betas: Sequence) -> "MultiWeight":
        """One alpha and one beta value per puncture, repeated p resp. q times."""
        return cls.build(p, q, [[a] * p for a in alphas], [[b] * q for b in betas])

    @property
    def norm_alpha(self) -> Fraction:
        return sum((x for row in self.alpha for x in row), Fraction(0))

    @property
    def norm_beta(self) -> Fraction:
        return sum((x for row in self.beta for x in row), Fraction(0))

    def is_constant(self) -> bool:
        return all(len(set(a)) <= 1 and len(set(b)) <= 1 for a, b in zip(self.alpha, self.beta))


@dataclass(frozen=True)
class Violation:
    rule: str
    puncture: int | None
    detail: str

    def __str__(self):
        where = "" if self.puncture is None else f" at puncture {self.puncture + 1}"
        return f"{self.rule}{where}: {self.detail}"


def validate(mw: MultiWeight) -> list[Violation]:
    """Every violated membership condition of W(s,p,q); empty means valid."""
    out = []
    if mw.p < 1 or mw.q < 1 or mw.s < 1:
        out.append(Violation("shape", None, f"p={mw.p}, q={mw.q}, s={mw.s} must be positive"))
        return out
    if len(mw.alpha) != mw.s or len(mw.beta) != mw.s:
        out.append(Violation("shape", None, f"expected {mw.s} rows of alpha and beta"))
        return out
    for j, (a, b) in enumerate(zip(mw.alpha, mw.beta)):
        if len(a) != mw.p or len(b) != mw.q:
            out.append(Violation("shape", j, f"alpha needs {mw.p} entries, beta needs {mw.q}"))
            continue
        for name, row in (("alpha", a), ("beta", b)):
            if any(x < 0 or x >= 1 for x in row):
                out.append(Violation("range", j, f"{name} entries must lie in [0,1)"))
            if any(x > y for x, y in zip(row, row[1:])):
                out.append(Violation("order", j, f"{name} entries must be nondecreasing"))
        total = sum(a) + sum(b)
        if total.denominator != 1 or total < 0:
            out.append(Violation("integrality", j, f"per-puncture sum {total} is not a non-negative integer"))
    return out


def require_valid(mw: MultiWeight) -> MultiWeight:
    bad = validate(mw)
    if bad:
        raise InvalidMultiWeight([str(v) for v in bad])
    return mw


@dataclass(frozen=True)
class CompactnessCertificate:
    epsilon: Fraction
    j_low: Fraction
    j_high: Fraction
    d: int
    deg_u: Fraction
    deg_v: Fraction
    toledo: Fraction
    conditions: dict = field(default_factory=dict)
    margins: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.conditions.values())


def certificate(mw: MultiWeight, d: int) -> CompactnessCertificate:
    """Evaluate the three compactness conditions and the degree bookkeeping for (mw, d)."""
    require_valid(mw)
    na, nb = mw.norm_alpha, mw.norm_beta
    eps = sum((b[-1] - a[0] for a, b in zip(mw.alpha, mw.beta)), Fraction(0))
    low = nb - na
    high = nb - na + 2 - eps
    gaps = [b[0] - a[-1] for a, b in zip(mw.alpha, mw.beta)]
    conditions = {
        "ordering": all(g > 0 for g in gaps),
        "epsilon_below_two": eps < 2,
        "d_in_interval": low < d < high,
    }
    margins = {
        "ordering": min(gaps),
        "epsilon_below_two": 2 - eps,
        "d_in_interval": min(d - low, high - d),
    }
    cert = CompactnessCertificate(
        epsilon=eps, j_low=low, j_high=high, d=d,
        deg_u=-(na + nb - d) / 2, deg_v=-(na + nb + d) / 2,
        toledo=nb - na - d, conditions=conditions, margins=margins,
    )
    log.info("certificate d=%s epsilon=%s passed=%s", d, eps, cert.passed)
    return cert


def holonomy(mw: MultiWeight) -> tuple[tuple[Fraction, ...], ...]:
    require_valid(mw)
    return tuple(tuple(a) + tuple(b) for a, b in zip(mw.alpha, mw.beta))


def degree_vectors(mw: MultiWeight, d: int) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Even split of deg U and deg V over the p resp. q summands.

    For weights from the constant construction these are the integer degree
    vectors (-a+1, ..., -a+1) and (-a, ..., -a).
    """
    cert = certificate(mw, d)
    return (cert.deg_u / mw.p,) * mw.p, (cert.deg_v / mw.q,) * mw.q


@dataclass(frozen=True)
class ParabolicLine:
    degree: int
    weights: tuple

    def __post_init__(self):
        if any(w < 0 or w >= 1 for w in self.weights):
            raise ValueError(f"parabolic weights must lie in [0,1): {self.weights}")

    @classmethod
    def trivial(cls, s: int) -> "ParabolicLine":
        return cls(0, (Fraction(0),) * s)

    @property
    def parabolic_degree(self) -> Fraction:
        return self.degree + sum(self.weights, Fraction(0))


def _same_s(a: ParabolicLine, b: ParabolicLine):
    if len(a.weights) != len(b.weights):
        raise ValueError(f"line bundles over {len(a.weights)} and {len(b.weights)} punctures")


def line_tensor(a: ParabolicLine, b: ParabolicLine) -> ParabolicLine:
    _same_s(a, b)
    sums = [x + y for x, y in zip(a.weights, b.weights)]
    carries = sum(math.floor(x) for x in sums)
    return ParabolicLine(a.degree + b.degree + carries, tuple(frac_part(x) for x in sums))


def line_power(a: ParabolicLine, n: int) -> ParabolicLine:
    out = ParabolicLine.trivial(len(a.weights))
    for _ in range(n):
        out = line_tensor(out, a)
    return out


def line_hom_degree(a: ParabolicLine, b: ParabolicLine) -> int:
    # Hom(O(l + sum a_j x_j), O(m + sum b_j x_j)) = O(m - l - k), k = #{j : a_j >= b_j}
    _same_s(a, b)
    k = sum(1 for x, y in zip(a.weights, b.weights) if x >= y)
    return b.degree - a.degree - k


def torsion_line(phi: Sequence[int], n: int) -> tuple[ParabolicLine, tuple[int, ...]]:
    hat = tuple(int(x) % n for x in phi)
    if sum(hat) % n:
        raise InvalidTwist(f"residues {tuple(phi)} do not sum to 0 mod {n}")
    return ParabolicLine(-sum(hat) // n, tuple(Fraction(h, n) for h in hat)), hat


def torsion_twist(phi: Sequence[int], mw: MultiWeight, d: int) -> tuple[ParabolicLine, MultiWeight, int]:
    """Tensor by the (p+q)-torsion line bundle of phi; returns (L, shifted weights, new d)."""
    require_valid(mw)
    if len(phi) != mw.s:
        raise InvalidTwist(f"need {mw.s} residues, got {len(phi)}")
    n = mw.p + mw.q
    line, hat = torsion_line(phi, n)
    alpha = tuple(tuple(sorted(frac_part(x + Fraction(h, n)) for x in row)) for row, h in zip(mw.alpha, hat))
    beta = tuple(tuple(sorted(frac_part(x + Fraction(h, n)) for x in row)) for row, h in zip(mw.beta, hat))
    out = MultiWeight(mw.p, mw.q, mw.s, alpha, beta)
    # the Toledo invariant nb - na - d is preserved
    shift = (mw.norm_alpha - out.norm_alpha) - (mw.norm_beta - out.norm_beta)
    if shift.denominator != 1:
        raise InvalidTwist(f"non-integral degree shift {shift}")
    return line, require_valid(out), d + int(shift)
