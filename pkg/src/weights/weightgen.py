"""Constructors for multiweights whose components are compact.

``construct_constant`` builds constant weights from an integer ``a`` and an
epsilon profile, ``construct_sp`` specialises it to the self-dual Sp(2p,R)
case and ``perturb`` moves a constant weight along a feather perturbation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from src.errors import InfeasibleConstruction, InvalidMultiWeight
from src.logs import get_logger
from src.weights.multiweight import MultiWeight, certificate, validate

log = get_logger("weightgen")


@dataclass(frozen=True)
class ConstructionInput:
    p: int
    q: int
    s: int
    a: int
    epsilon_profile: tuple

    def __post_init__(self):
        if self.s < 3:
            raise InfeasibleConstruction("punctures", f"s={self.s} but at least 3 punctures are needed")
        if len(self.epsilon_profile) != self.s:
            raise InfeasibleConstruction("profile_length", f"{len(self.epsilon_profile)} values for s={self.s}")
        if any(Fraction(e) <= 0 for e in self.epsilon_profile):
            raise InfeasibleConstruction("profile_positive", "every epsilon^j must be positive")


@dataclass(frozen=True)
class Construction:
    mw: MultiWeight
    d: int
    a: int
    k: int
    r: int
    k_profile: tuple
    epsilon_profile: tuple

    @property
    def epsilon(self) -> Fraction:
        return sum(self.epsilon_profile, Fraction(0))


@dataclass(frozen=True)
class FeatherPerturbation:
    eta: tuple  # s rows of p rationals
    zeta: tuple  # s rows of q rationals

    @classmethod
    def build(cls, eta: Sequence[Sequence], zeta: Sequence[Sequence]) -> "FeatherPerturbation":
        return cls(tuple(tuple(Fraction(x) for x in r) for r in eta),
                   tuple(tuple(Fraction(x) for x in r) for r in zeta))

    def violations(self) -> list[str]:
        out = []
        for j, (e, z) in enumerate(zip(self.eta, self.zeta)):
            if any(x >= y for x, y in zip(e, e[1:])) or any(x >= y for x, y in zip(z, z[1:])):
                out.append(f"puncture {j + 1}: eta and zeta must be strictly increasing")
            if sum(e) + sum(z) != 0:
                out.append(f"puncture {j + 1}: eta and zeta must sum to zero")
        return out


def a_range(p: int, q: int, s: int) -> tuple[Fraction, Fraction, tuple[int, ...]]:
    low = Fraction(s + p, p + q)
    high = Fraction((p + q - 1) * s + p, p + q)
    return low, high, tuple(range(math.ceil(low), math.floor(high) + 1))


def _split(p: int, q: int, s: int, a: int) -> tuple[int, int, tuple[int, ...]]:
    k, r = divmod((p + q) * a - p, s)
    return k, r, tuple(k + 1 if j < r else k for j in range(s))


def epsilon_bounds(p: int, q: int, k_profile: Sequence[int]) -> tuple[tuple[Fraction, ...], Fraction]:
    """Per-puncture upper bounds and the lower bound on sum(epsilon^j); the upper bound is 1."""
    caps = tuple(min(Fraction(k, q), Fraction(p + q - k, p)) for k in k_profile)
    den = 2 * p * q - p - q
    low = Fraction(2 * p * q - 2 * p - 2 * q, den) if den > 0 else Fraction(0)
    return caps, max(low, Fraction(0))


def default_profile(p: int, q: int, s: int, a: int) -> tuple[Fraction, ...]:
    _, _, ks = _split(p, q, s, a)
    caps, low = epsilon_bounds(p, q, ks)
    mid = (low + 1) / 2
    total = sum(caps, Fraction(0))
    if total <= 0:
        raise InfeasibleConstruction("per_puncture_bound", f"k profile {ks} leaves no room for epsilon")
    return tuple(c * mid / total for c in caps)


def construct_constant(inp: ConstructionInput) -> Construction:
    p, q, s, a = inp.p, inp.q, inp.s, inp.a
    low_a, high_a, _ = a_range(p, q, s)
    if Fraction(a).denominator != 1 or not low_a <= a <= high_a:
        raise InfeasibleConstruction("a_range", f"a={a} not an integer in [{low_a}, {high_a}]")
    k, r, ks = _split(p, q, s, a)
    eps = tuple(Fraction(e) for e in inp.epsilon_profile)
    caps, low = epsilon_bounds(p, q, ks)
    for j, (e, c) in enumerate(zip(eps, caps)):
        if e >= c:
            raise InfeasibleConstruction("per_puncture_bound",
                                         f"epsilon^{j + 1}={e} must be below {c}")
    total = sum(eps, Fraction(0))
    if total <= low:
        raise InfeasibleConstruction("sum_lower", f"sum of epsilon {total} must exceed {low}")
    if total >= 1:
        raise InfeasibleConstruction("sum_upper", f"sum of epsilon {total} must be below 1")
    alphas = [(kj - q * e) / (p + q) for kj, e in zip(ks, eps)]
    betas = [(kj + p * e) / (p + q) for kj, e in zip(ks, eps)]
    mw = MultiWeight.constant(p, q, alphas, betas)
    d = (q - p) * a + p
    bad = validate(mw)
    cert = certificate(mw, d) if not bad else None
    if bad or not cert.passed:
        raise InfeasibleConstruction("certificate", "constructed weights fail the compactness certificate")
    log.info("constructed (p,q,s,a)=(%d,%d,%d,%d) with k=%d r=%d d=%d", p, q, s, a, k, r, d)
    return Construction(mw, d, a, k, r, ks, eps)


def construct_sp(p: int, s: int, epsilon_profile: Sequence | None = None) -> Construction:
    """Self-dual SU(p,p) weights alpha^j = (1-eps^j)/2, beta^j = (1+eps^j)/2 with d = p."""
    if s < 5 or s % 2 == 0:
        raise InfeasibleConstruction("parity", f"s={s} must be odd and at least 5")
    a = (s + 1) // 2
    if epsilon_profile is None:
        epsilon_profile = default_profile(p, p, s, a)
    return construct_constant(ConstructionInput(p, p, s, a, tuple(epsilon_profile)))


def feather_profile(p: int, q: int, s: int, t) -> FeatherPerturbation:
    """eta_i = (2i-p-1)t and zeta_i = (2i-q-1)t at every puncture."""
    t = Fraction(t)
    eta = [[(2 * i - p - 1) * t for i in range(1, p + 1)] for _ in range(s)]
    zeta = [[(2 * i - q - 1) * t for i in range(1, q + 1)] for _ in range(s)]
    return FeatherPerturbation.build(eta, zeta)


def perturb(mw: MultiWeight, f: FeatherPerturbation, scale) -> MultiWeight:
    scale = Fraction(scale)
    if not mw.is_constant():
        raise InvalidMultiWeight(["perturbation needs a constant multiweight"])
    if scale < 0:
        raise InvalidMultiWeight([f"scale {scale} must be non-negative"])
    bad = f.violations()
    if bad:
        raise InvalidMultiWeight(bad)
    if len(f.eta) != mw.s or any(len(e) != mw.p for e in f.eta) or any(len(z) != mw.q for z in f.zeta):
        raise InvalidMultiWeight(["perturbation shape does not match the multiweight"])
    alpha = [[x + scale * e for x, e in zip(row, er)] for row, er in zip(mw.alpha, f.eta)]
    beta = [[x + scale * z for x, z in zip(row, zr)] for row, zr in zip(mw.beta, f.zeta)]
    out = MultiWeight.build(mw.p, mw.q, alpha, beta)
    bad = [str(v) for v in validate(out)]
    for j, (a, b) in enumerate(zip(out.alpha, out.beta)):
        if a[-1] >= b[0]:
            bad.append(f"ordering at puncture {j + 1}: alpha_p={a[-1]} is not below beta_1={b[0]}")
    if bad:
        raise InvalidMultiWeight(bad)
    return out
