"""Deterministic sweeps of the epsilon-profile box for constant multiweights.

Sample i uses the Halton point of index i+1 (exact rationals): its first
coordinate places sum(eps) inside the allowed interval, the remaining s
coordinates spread it over the punctures in proportion to the per-puncture
caps. Rows that still break a constraint are kept and flagged.
"""
from __future__ import annotations

from fractions import Fraction

from joblib import Parallel, delayed

from src.algebra.exactlin import PrimeField, is_prime
from src.config import get_settings
from src.errors import BudgetExceeded, InfeasibleConstruction
from src.logs import get_logger
from src.stability.kronecker import search_stable
from src.weights.multiweight import certificate
from src.weights.weightgen import ConstructionInput, _split, a_range, construct_constant, epsilon_bounds

log = get_logger("sweep")


def _bases(n: int) -> list[int]:
    out, k = [], 2
    while len(out) < n:
        if is_prime(k):
            out.append(k)
        k += 1
    return out


def radical_inverse(i: int, base: int) -> Fraction:
    out, f = Fraction(0), Fraction(1, base)
    while i > 0:
        i, digit = divmod(i, base)
        out += digit * f
        f /= base
    return out


def halton(i: int, dim: int) -> tuple[Fraction, ...]:
    return tuple(radical_inverse(i, b) for b in _bases(dim))


def sample_profile(p: int, q: int, s: int, a: int, index: int) -> tuple[Fraction, ...]:
    _, _, ks = _split(p, q, s, a)
    caps, low = epsilon_bounds(p, q, ks)
    h = halton(index, s + 1)
    target = low + (1 - low) * h[0]
    raw = [c * x for c, x in zip(caps, h[1:])]
    total = sum(raw, Fraction(0))
    if total == 0:
        return tuple(target / s for _ in range(s))
    return tuple(x * target / total for x in raw)


def _fmt(x) -> str | None:
    return None if x is None else str(Fraction(x))


def sweep_row(p: int, q: int, s: int, a: int | None, sample: int, search_draws: int = 0,
              search_prime: int = 5, seed: int = 0, budget: int | None = None) -> dict:
    row = {"sample": sample, "p": p, "q": q, "s": s, "a": a, "epsilon_profile": None, "epsilon": None,
           "feasible": False, "violation": None, "d": None, "certificate_passed": None,
           "j_low": None, "j_high": None, "margin_ordering": None, "margin_epsilon": None,
           "margin_interval": None, "search_status": None, "search_draws": None}
    if a is None:
        row["violation"] = "a_range"
        return row
    eps = sample_profile(p, q, s, a, sample + 1)
    row["epsilon_profile"] = ";".join(str(e) for e in eps)
    row["epsilon"] = str(sum(eps, Fraction(0)))
    try:
        built = construct_constant(ConstructionInput(p, q, s, a, eps))
    except InfeasibleConstruction as e:
        row["violation"] = e.constraint
        return row
    cert = certificate(built.mw, built.d)
    row.update(feasible=True, d=built.d, certificate_passed=cert.passed,
               j_low=_fmt(cert.j_low), j_high=_fmt(cert.j_high),
               margin_ordering=_fmt(cert.margins["ordering"]),
               margin_epsilon=_fmt(cert.margins["epsilon_below_two"]),
               margin_interval=_fmt(cert.margins["d_in_interval"]))
    if search_draws > 0:
        try:
            found, used, _ = search_stable(p, q, s - 2, PrimeField(search_prime), search_draws,
                                           seed=seed + sample, budget=budget)
            row["search_status"] = "Stable" if found is not None else "NotFound"
            row["search_draws"] = used
        except BudgetExceeded:
            row["search_status"] = "BudgetExceeded"
    return row


def sweep(p: int, q: int, s: int, grid: int, a: int | None = None, search_draws: int = 0,
          search_prime: int = 5, seed: int = 0, threads: int | None = None,
          budget: int | None = None) -> list[dict]:
    """Exactly ``grid`` rows; without ``a`` the samples cycle through the admissible integers."""
    settings = get_settings()
    threads = settings.threads if threads is None else threads
    budget = settings.budget if budget is None else budget
    if a is None:
        _, _, ints = a_range(p, q, s)
        choices = [ints[i % len(ints)] if ints else None for i in range(grid)]
    else:
        choices = [a] * grid
    log.info("sweeping (p,q,s)=(%d,%d,%d) over %d samples with %d workers", p, q, s, grid, threads)
    rows = Parallel(n_jobs=threads)(
        delayed(sweep_row)(p, q, s, choices[i], i, search_draws, search_prime, seed, budget)
        for i in range(grid)
    )
    feasible = sum(r["feasible"] for r in rows)
    log.info("%d of %d samples feasible", feasible, grid)
    return rows
