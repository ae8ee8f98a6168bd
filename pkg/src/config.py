import os
from dataclasses import dataclass, replace
from functools import lru_cache

from dotenv import load_dotenv

load_dotenv()

DEFAULT_BUDGET = 2_000_000
DEFAULT_PRIMES = (5, 7, 11)


@dataclass(frozen=True)
class Settings:
    budget: int = DEFAULT_BUDGET
    threads: int = 1
    log_level: str = "WARNING"
    primes: tuple = DEFAULT_PRIMES
    scaling_tol: float = 1e-9
    scaling_floor: float = 1e-3
    scaling_iters: int = 2000
    search_attempts: int = 50
    db_path: str = ":memory:"


def _primes(raw):
    if not raw:
        return DEFAULT_PRIMES
    return tuple(int(x) for x in raw.split(",") if x.strip())


def load_settings():
    return Settings(
        budget=int(os.getenv("KRONECKER_BUDGET", DEFAULT_BUDGET)),
        threads=int(os.getenv("KRONECKER_THREADS", 1)),
        log_level=os.getenv("KRONECKER_LOG_LEVEL", "WARNING").upper(),
        primes=_primes(os.getenv("KRONECKER_PRIMES")),
        scaling_tol=float(os.getenv("KRONECKER_SCALING_TOL", 1e-9)),
        scaling_floor=float(os.getenv("KRONECKER_SCALING_FLOOR", 1e-3)),
        scaling_iters=int(os.getenv("KRONECKER_SCALING_ITERS", 2000)),
        search_attempts=int(os.getenv("KRONECKER_SEARCH_ATTEMPTS", 50)),
        db_path=os.getenv("KRONECKER_DB", ":memory:"),
    )


_overrides = {}


@lru_cache(maxsize=1)
def _cached():
    return load_settings()


def get_settings():
    base = _cached()
    return replace(base, **_overrides) if _overrides else base


def override(**kwargs):
    """Apply CLI flag overrides on top of the environment (None values are ignored)."""
    _overrides.update({k: v for k, v in kwargs.items() if v is not None})


def reset_overrides():
    _overrides.clear()
