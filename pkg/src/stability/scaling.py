"""Operator scaling as a numeric semistability tester for rational tuples.

Alternately normalises B_j = H A_j G so that sum B_j B_j^T = (p/q) Id_q and
sum B_j^T B_j = Id_p. Convergence of the residual suggests semistability but
never proves it; a stalled or singular normalisation triggers a search for a
destabilising subspace that is then verified exactly over Q.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from src.algebra.exactlin import QQ, Matrix, Subspace, image_span, kernel, perp, preimage
from src.config import get_settings
from src.errors import FieldMismatch
from src.logs import get_logger
from src.stability.kronecker import MatrixTuple, is_witness

log = get_logger("scaling")

MAX_DENOMINATOR = 1000


class Outcome(str, Enum):
    LIKELY_SEMISTABLE = "LikelySemistable"
    LIKELY_UNSTABLE = "LikelyUnstable"
    INCONCLUSIVE = "Inconclusive"
    UNSTABLE = "Unstable"


@dataclass(frozen=True)
class ScalingVerdict:
    outcome: Outcome
    residual: float
    iterations: int
    log_capacity: float | None
    witness: tuple | None = None

    @property
    def capacity(self) -> float | None:
        return None if self.log_capacity is None else math.exp(self.log_capacity)


def _to_numpy(A: MatrixTuple) -> np.ndarray:
    return np.array([[[float(a[i, j]) for j in range(A.p)] for i in range(A.q)] for a in A.mats])


def _inv_sqrt(m: np.ndarray):
    w, v = np.linalg.eigh(m)
    if w.min() <= 1e-12 * max(1.0, w.max()):
        return None, None
    return (v / np.sqrt(w)) @ v.T, float(np.sum(np.log(w)))


def _residual(B: np.ndarray, p: int, q: int) -> float:
    left = np.einsum("jik,jlk->il", B, B) - (p / q) * np.eye(q)
    right = np.einsum("jki,jkl->il", B, B) - np.eye(p)
    return float(np.linalg.norm(left) + np.linalg.norm(right))


def king_scaling(A: MatrixTuple, iters: int | None = None, tol: float | None = None,
                 floor: float | None = None) -> ScalingVerdict:
    if A.field != QQ:
        raise FieldMismatch("king_scaling works on rational tuples")
    settings = get_settings()
    iters = settings.scaling_iters if iters is None else iters
    tol = settings.scaling_tol if tol is None else tol
    floor = settings.scaling_floor if floor is None else floor
    p, q = A.p, A.q
    B = _to_numpy(A)
    # log capacity = -(1/q) log det(H^T H) - (1/p) log det(G^T G), accumulated per step
    log_cap = 0.0
    residual = _residual(B, p, q)
    it = 0
    while it < iters and residual >= tol:
        R = np.einsum("jik,jlk->il", B, B)
        h, logdet_r = _inv_sqrt(R)
        if h is None:
            return _unstable_or_likely(A, residual, it, "left normaliser is singular")
        B = math.sqrt(p / q) * np.einsum("il,jlk->jik", h, B)
        log_cap -= (q * math.log(p / q) - logdet_r) / q
        C = np.einsum("jki,jkl->il", B, B)
        g, logdet_c = _inv_sqrt(C)
        if g is None:
            return _unstable_or_likely(A, residual, it, "right normaliser is singular")
        B = np.einsum("jik,kl->jil", B, g)
        log_cap += logdet_c / p
        it += 1
        residual = _residual(B, p, q)
    if residual < tol:
        log.info("scaling converged after %d iterations (residual %.3g)", it, residual)
        return ScalingVerdict(Outcome.LIKELY_SEMISTABLE, residual, it, log_cap)
    if residual >= floor:
        return _unstable_or_likely(A, residual, it, "residual stalled above the floor")
    log.info("scaling inconclusive after %d iterations (residual %.3g)", it, residual)
    return ScalingVerdict(Outcome.INCONCLUSIVE, residual, it, None)


def _rationalize(vec: np.ndarray) -> list[Fraction]:
    scale = np.max(np.abs(vec))
    if scale == 0:
        return [Fraction(0)] * len(vec)
    return [Fraction(float(x / scale)).limit_denominator(MAX_DENOMINATOR) for x in vec]


def witness_candidates(A: MatrixTuple):
    """Full space, common kernel, single kernels, then near-kernel spans from singular vectors."""
    p, q = A.p, A.q
    yield Subspace.full(QQ, p)
    stacked = Matrix.from_rows(QQ, [a.row(i) for a in A.mats for i in range(q)], p)
    yield kernel(stacked)
    for a in A.mats:
        yield kernel(a)
    arr = _to_numpy(A)
    _, _, vt = np.linalg.svd(arr.reshape(-1, p))
    for k in range(1, p):
        yield Subspace.span(QQ, p, [_rationalize(v) for v in vt[p - k:]])
    wide = np.concatenate(list(arr), axis=1)
    u, _, _ = np.linalg.svd(wide)
    for k in range(1, q):
        left = Subspace.span(QQ, q, [_rationalize(w) for w in u[:, q - k:].T])
        yield preimage(A.mats, perp(left))


def _unstable_or_likely(A: MatrixTuple, residual: float, it: int, reason: str) -> ScalingVerdict:
    log.info("scaling suggests instability: %s", reason)
    for u in witness_candidates(A):
        if u.dim and is_witness(A, u):
            v = image_span(A.mats, u)
            log.info("exact witness with dim U=%d, dim V=%d", u.dim, v.dim)
            return ScalingVerdict(Outcome.UNSTABLE, residual, it, None, (u, v))
    return ScalingVerdict(Outcome.LIKELY_UNSTABLE, residual, it, None)
