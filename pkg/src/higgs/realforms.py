"""Sp(2p,R) and SO*(2p) tuples, plus the floating-point eigenvalue diagnostics."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from src.algebra.exactlin import QQ, Matrix, check_budget, count_subspaces, determinant
from src.config import get_settings
from src.errors import BudgetExceeded, DimensionMismatch, SearchExhausted, SingularElement
from src.logs import get_logger
from src.stability.kronecker import MatrixTuple, Status, blowup_certificate, king_bruteforce

log = get_logger("realforms")


class SymmetryClass(str, Enum):
    SYMMETRIC = "Symmetric"
    ANTISYMMETRIC = "Antisymmetric"


@dataclass(frozen=True)
class EigenData:
    eigenvalues: tuple  # complex

    def __post_init__(self):
        prod = abs(complex(np.prod(np.array(self.eigenvalues, dtype=complex))))
        if not math.isclose(prod, 1.0, rel_tol=1e-9, abs_tol=1e-9):
            raise SingularElement(f"eigenvalue product has modulus {prod}, expected 1")


@dataclass(frozen=True)
class RealFormTuple:
    tuple: MatrixTuple
    kind: SymmetryClass
    seed: int
    attempts: int
    certificates: dict  # prime -> "blowup:<size>" | King status


def realform_check(A: MatrixTuple, kind: SymmetryClass) -> bool:
    if A.p != A.q:
        raise DimensionMismatch(f"real-form checks need square matrices, got {A.q}x{A.p}")
    sign = A.field.one if kind is SymmetryClass.SYMMETRIC else A.field.neg(A.field.one)
    return all(a.transpose() == a.scale(sign) for a in A.mats)


def semistability_certificate(A: MatrixTuple, ell: int, seed: int = 0, budget: int | None = None) -> str | None:
    """Proof of semistability of the mod-ell reduction, or None when it is Unstable or undecided."""
    reduced = A.reduce(ell) if A.field == QQ else A
    cert = blowup_certificate(reduced, seed=seed)
    if cert is not None:
        return f"blowup:{cert.size}"
    try:
        check_budget(count_subspaces(A.p, ell, range(1, A.p + 1)), budget)
    except BudgetExceeded:
        log.info("no blow-up certificate mod %d and enumeration is over budget", ell)
        return None
    verdict = king_bruteforce(reduced, budget=budget)
    return None if verdict.status is Status.UNSTABLE else verdict.status.value


def _certify(A: MatrixTuple, primes: Sequence[int], seed: int) -> dict | None:
    out = {}
    for ell in primes:
        c = semistability_certificate(A, ell, seed)
        if c is None:
            return None
        out[ell] = c
    return out


def _antisymmetric(rng: np.random.Generator, n: int, bound: int) -> list[list[int]]:
    m = np.zeros((n, n), dtype=int)
    iu = np.triu_indices(n, 1)
    m[iu] = rng.integers(-bound, bound + 1, size=len(iu[0]))
    return (m - m.T).tolist()


def cross_product_generators() -> MatrixTuple:
    """L_x, L_y, L_z with L_v(w) = v x w."""
    return MatrixTuple.build(QQ, [
        [[0, 0, 0], [0, 0, -1], [0, 1, 0]],
        [[0, 0, 1], [0, 0, 0], [-1, 0, 0]],
        [[0, -1, 0], [1, 0, 0], [0, 0, 0]],
    ])


def _generic(block: list[list[int]], half: int) -> bool:
    # for every nonempty I, A'(span e_{2i-1}) must leave span(e_{2i}), i in I (1-based inside the block)
    for size in range(1, half + 1):
        for idx in itertools.combinations(range(1, half + 1), size):
            allowed = {2 * i - 1 for i in idx}  # 0-based rows of e_{2i}
            if not any(block[r][2 * i - 2] for i in idx for r in range(2 * half) if r not in allowed):
                return False
    return True


def _sostar_triple(block: list[list[int]], half: int) -> MatrixTuple:
    n = 2 * half + 1
    a1 = [[0] * n for _ in range(n)]
    a2 = [[0] * n for _ in range(n)]
    a3 = [[0] * n for _ in range(n)]
    for k in range(1, half + 1):
        odd, even = 2 * k - 1, 2 * k
        a1[even][odd], a1[odd][even] = 1, -1
        a2[even][odd], a2[odd][even] = k, -k
        a3[even][0], a3[0][even] = -1, 1
    for i in range(2 * half):
        for j in range(2 * half):
            a3[i + 1][j + 1] = block[i][j]
    return MatrixTuple.build(QQ, [a1, a2, a3])


def sostar_construct(p: int, seed: int = 0, primes: Sequence[int] = (5, 7), bound: int = 3,
                     attempts: int | None = None) -> RealFormTuple:
    """Three antisymmetric p x p matrices (p odd) giving a semistable point of E(p,p,3)."""
    if p < 3 or p % 2 == 0:
        raise DimensionMismatch(f"p={p} must be odd and at least 3; use sostar_even for even p")
    attempts = get_settings().search_attempts if attempts is None else attempts
    half = (p - 1) // 2
    rng = np.random.default_rng(seed)
    for attempt in range(1, attempts + 1):
        if half == 1:
            # the genericity condition cannot hold for a 2 x 2 block
            if attempt == 1:
                A = cross_product_generators()
            else:
                A = MatrixTuple.build(QQ, [_antisymmetric(rng, 3, bound) for _ in range(3)])
        else:
            block = _antisymmetric(rng, 2 * half, bound)
            if determinant(Matrix.from_rows(QQ, block)) == 0 or not _generic(block, half):
                continue
            A = _sostar_triple(block, half)
        certs = _certify(A, primes, seed)
        if certs is not None:
            log.info("SO*(2*%d) tuple found after %d attempts", p, attempt)
            return RealFormTuple(A, SymmetryClass.ANTISYMMETRIC, seed, attempt, certs)
        log.info("attempt %d rejected by the mod-l oracle", attempt)
    raise SearchExhausted("sostar_construct", attempts)


def sostar_even(p: int, seed: int = 0, primes: Sequence[int] = (5, 7), bound: int = 3) -> RealFormTuple:
    """For even p any antisymmetric triple with A_1 invertible; A_1 is the standard symplectic form."""
    if p < 2 or p % 2:
        raise DimensionMismatch(f"p={p} must be even")
    rng = np.random.default_rng(seed)
    j = [[0] * p for _ in range(p)]
    for k in range(0, p, 2):
        j[k][k + 1], j[k + 1][k] = 1, -1
    A = MatrixTuple.build(QQ, [j] + [_antisymmetric(rng, p, bound) for _ in range(2)])
    certs = _certify(A, primes, seed)
    if certs is None:
        raise SearchExhausted("sostar_even", 1)
    return RealFormTuple(A, SymmetryClass.ANTISYMMETRIC, seed, 1, certs)


def sp_generate(p: int, s: int, seed: int = 0, primes: Sequence[int] = (5, 7), bound: int = 3) -> RealFormTuple:
    """s-2 symmetric integer matrices with A_1 = Id."""
    if p < 1:
        raise DimensionMismatch(f"p={p} must be positive")
    if s < 5 or s % 2 == 0:
        raise DimensionMismatch(f"s={s} must be odd and at least 5")
    rng = np.random.default_rng(seed)
    mats = [[[1 if i == k else 0 for k in range(p)] for i in range(p)]]
    for _ in range(s - 3):
        m = rng.integers(-bound, bound + 1, size=(p, p))
        mats.append(np.triu(m).tolist() if p == 1 else (np.triu(m) + np.triu(m, 1).T).tolist())
    A = MatrixTuple.build(QQ, mats)
    certs = _certify(A, primes, seed)
    if certs is None:
        raise SearchExhausted("sp_generate", 1)
    return RealFormTuple(A, SymmetryClass.SYMMETRIC, seed, 1, certs)


def congruence(g: Matrix, A: MatrixTuple) -> MatrixTuple:
    """g . A = (g A_j g^T), the action preserving (anti)symmetry."""
    gt = g.transpose()
    return MatrixTuple(A.p, A.q, A.field, tuple(g @ a @ gt for a in A.mats))


# -- diagnostics ---------------------------------------------------------------

def eigen_data_from_phases(phases: Sequence) -> EigenData:
    return EigenData(tuple(complex(np.exp(2j * np.pi * float(t))) for t in phases))


def eigen_data_from_matrix(g: np.ndarray) -> EigenData:
    return EigenData(tuple(complex(x) for x in np.linalg.eigvals(np.asarray(g, dtype=complex))))


def translation_length(e: EigenData) -> float:
    mods = np.abs(np.array(e.eigenvalues, dtype=complex))
    if np.any(mods == 0):
        raise SingularElement("translation length is undefined with a zero eigenvalue")
    return float(np.sqrt(np.sum(np.log(mods) ** 2)))


def elliptic_check(e: EigenData, tol: float = 1e-12) -> bool:
    mods = np.abs(np.array(e.eigenvalues, dtype=complex))
    return bool(np.all((mods >= 1 - tol) & (mods <= 1 + tol)))
