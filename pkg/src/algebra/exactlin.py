"""Exact linear algebra over Q and small prime fields.

Scalars are ``fractions.Fraction`` over Q and plain ints (residues) over F_l.
Subspaces are stored as the row-reduced echelon rows of a spanning set, so two
equal subspaces always compare equal; ``Subspace.basis`` hands the same data
back as columns, i.e. in reduced column-echelon form.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterator, Sequence

from src.config import get_settings
from src.errors import BudgetExceeded, DimensionMismatch, FieldMismatch, FlagNotNested
from src.logs import get_logger

log = get_logger("exactlin")

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    # deterministic Miller-Rabin, exact for n < 3.3e24
    if n < 2:
        return False
    for b in _MR_BASES:
        if n % b == 0:
            return n == b
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for b in _MR_BASES:
        x = pow(b, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class RationalField:
    @property
    def tag(self) -> str:
        return "ql"

    @property
    def characteristic(self) -> int:
        return 0

    zero = Fraction(0)
    one = Fraction(1)

    def coerce(self, x) -> Fraction:
        return Fraction(x)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return 1 / a

    def is_zero(self, a) -> bool:
        return a == 0

    def __str__(self):
        return "Q"


@dataclass(frozen=True)
class PrimeField:
    ell: int

    def __post_init__(self):
        if not is_prime(self.ell) or self.ell >= 2**64:
            raise FieldMismatch(f"{self.ell} is not a prime below 2**64")

    @property
    def tag(self) -> str:
        return f"f{self.ell}"

    @property
    def characteristic(self) -> int:
        return self.ell

    @property
    def zero(self) -> int:
        return 0

    @property
    def one(self) -> int:
        return 1

    def coerce(self, x) -> int:
        if isinstance(x, (Fraction, str)):
            x = Fraction(x)
            if x.denominator % self.ell == 0:
                raise FieldMismatch(f"denominator of {x} vanishes mod {self.ell}")
            return x.numerator * pow(x.denominator, -1, self.ell) % self.ell
        return int(x) % self.ell

    def add(self, a, b):
        return (a + b) % self.ell

    def sub(self, a, b):
        return (a - b) % self.ell

    def mul(self, a, b):
        return a * b % self.ell

    def neg(self, a):
        return -a % self.ell

    def inv(self, a):
        if a % self.ell == 0:
            raise ZeroDivisionError("zero has no inverse")
        return pow(a, -1, self.ell)

    def is_zero(self, a) -> bool:
        return a % self.ell == 0

    def elements(self) -> range:
        return range(self.ell)

    def symmetric(self, a) -> int:
        a %= self.ell
        return a - self.ell if a > self.ell // 2 else a

    def __str__(self):
        return f"F_{self.ell}"


QQ = RationalField()


def field_from_tag(tag: str):
    if tag == "ql":
        return QQ
    if tag.startswith("f") and tag[1:].isdigit():
        return PrimeField(int(tag[1:]))
    raise FieldMismatch(f"unknown field tag {tag!r}")


@dataclass(frozen=True)
class Matrix:
    field: object
    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise DimensionMismatch(
                f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix"
            )

    @classmethod
    def from_rows(cls, field, rows: Sequence[Sequence], cols: int | None = None) -> "Matrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise DimensionMismatch("ragged rows")
        entries = tuple(field.coerce(x) for r in rows for x in r)
        return cls(field, len(rows), cols, entries)

    @classmethod
    def from_columns(cls, field, columns: Sequence[Sequence], rows: int) -> "Matrix":
        cols = list(columns)
        return cls.from_rows(field, [[c[i] for c in cols] for i in range(rows)], len(cols))

    @classmethod
    def zeros(cls, field, rows: int, cols: int) -> "Matrix":
        return cls(field, rows, cols, (field.zero,) * (rows * cols))

    @classmethod
    def identity(cls, field, n: int) -> "Matrix":
        return cls.from_rows(field, [[1 if i == j else 0 for j in range(n)] for i in range(n)], n)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> tuple:
        return self.entries[j::self.cols] if self.cols else ()

    def as_rows(self) -> list[list]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "Matrix":
        return Matrix(self.field, self.cols, self.rows,
                      tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)))

    def apply(self, v: Sequence) -> tuple:
        if len(v) != self.cols:
            raise DimensionMismatch(f"vector of length {len(v)} for {self.cols} columns")
        F = self.field
        out = []
        for i in range(self.rows):
            acc = F.zero
            for a, x in zip(self.row(i), v):
                if a and x:
                    acc = F.add(acc, F.mul(a, x))
            out.append(acc)
        return tuple(out)

    def scale(self, c) -> "Matrix":
        F = self.field
        c = F.coerce(c)
        return Matrix(F, self.rows, self.cols, tuple(F.mul(c, x) for x in self.entries))

    def __add__(self, other: "Matrix") -> "Matrix":
        _same_shape(self, other)
        F = self.field
        return Matrix(F, self.rows, self.cols,
                      tuple(F.add(a, b) for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "Matrix") -> "Matrix":
        _same_shape(self, other)
        F = self.field
        return Matrix(F, self.rows, self.cols,
                      tuple(F.sub(a, b) for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "Matrix":
        return Matrix(self.field, self.rows, self.cols, tuple(self.field.neg(a) for a in self.entries))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return mat_mul(self, other)

    def is_zero(self) -> bool:
        return all(self.field.is_zero(x) for x in self.entries)


def _same_shape(a: Matrix, b: Matrix):
    if a.field != b.field:
        raise FieldMismatch(f"{a.field} vs {b.field}")
    if (a.rows, a.cols) != (b.rows, b.cols):
        raise DimensionMismatch(f"{a.rows}x{a.cols} vs {b.rows}x{b.cols}")


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if a.field != b.field:
        raise FieldMismatch(f"{a.field} vs {b.field}")
    if a.cols != b.rows:
        raise DimensionMismatch(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    F = a.field
    bt = [b.column(j) for j in range(b.cols)]
    out = []
    for i in range(a.rows):
        r = a.row(i)
        for c in bt:
            acc = F.zero
            for x, y in zip(r, c):
                if x and y:
                    acc = F.add(acc, F.mul(x, y))
            out.append(acc)
    return Matrix(F, a.rows, b.cols, tuple(out))


def kron(a: Matrix, b: Matrix) -> Matrix:
    if a.field != b.field:
        raise FieldMismatch(f"{a.field} vs {b.field}")
    F = a.field
    rows = []
    for i in range(a.rows):
        for k in range(b.rows):
            rows.append([F.mul(a[i, j], b[k, l]) for j in range(a.cols) for l in range(b.cols)])
    return Matrix(F, a.rows * b.rows, a.cols * b.cols, tuple(x for r in rows for x in r))


def block_matrix(field, blocks: Sequence[Sequence[Matrix]]) -> Matrix:
    rows = []
    for band in blocks:
        for i in range(band[0].rows):
            rows.append([x for blk in band for x in blk.row(i)])
    return Matrix.from_rows(field, rows)


# -- elimination -------------------------------------------------------------

def _integer_rows(m: Matrix) -> list[list[int]]:
    # clears denominators row by row; rank and the sign of det are unchanged
    out = []
    for i in range(m.rows):
        r = m.row(i)
        den = reduce(math.lcm, (x.denominator for x in r), 1)
        out.append([int(x * den) for x in r])
    return out


def _bareiss(rows: list[list[int]]) -> tuple[int, int]:
    """Fraction-free elimination in place. Returns (rank, signed last pivot)."""
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    prev = 1
    rank = 0
    sign = 1
    for col in range(n_cols):
        if rank == n_rows:
            break
        pivot = next((i for i in range(rank, n_rows) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        if pivot != rank:
            rows[rank], rows[pivot] = rows[pivot], rows[rank]
            sign = -sign
        p = rows[rank][col]
        for i in range(rank + 1, n_rows):
            a = rows[i][col]
            ri = rows[i]
            rr = rows[rank]
            for j in range(col + 1, n_cols):
                ri[j] = (p * ri[j] - a * rr[j]) // prev
            ri[col] = 0
        prev = p
        rank += 1
    return rank, sign * prev


def _rref(field, vectors: Sequence[Sequence], n: int) -> tuple[tuple, ...]:
    """Reduced row echelon form of the span of ``vectors`` (nonzero rows only)."""
    F = field
    rows = [list(v) for v in vectors if any(not F.is_zero(x) for x in v)]
    r = 0
    for col in range(n):
        if r == len(rows):
            break
        pivot = next((i for i in range(r, len(rows)) if not F.is_zero(rows[i][col])), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = F.inv(rows[r][col])
        rows[r] = [F.mul(inv, x) for x in rows[r]]
        pr = rows[r]
        for i in range(len(rows)):
            if i != r and not F.is_zero(rows[i][col]):
                c = rows[i][col]
                rows[i] = [F.sub(x, F.mul(c, y)) for x, y in zip(rows[i], pr)]
        r += 1
    out = [tuple(row) for row in rows[:r]]
    return tuple(out)


def rank(m: Matrix) -> int:
    """Exact rank; Bareiss over Q, Gaussian elimination over F_l."""
    if m.rows == 0 or m.cols == 0:
        return 0
    if m.field == QQ:
        return _bareiss(_integer_rows(m))[0]
    return len(_rref(m.field, m.as_rows(), m.cols))


def determinant(m: Matrix):
    if m.rows != m.cols:
        raise DimensionMismatch(f"determinant of a {m.rows}x{m.cols} matrix")
    F = m.field
    if m.rows == 0:
        return F.one
    if F == QQ:
        rows = m.as_rows()
        scale = Fraction(1)
        for r in rows:
            den = reduce(math.lcm, (x.denominator for x in r), 1)
            scale /= den
        rk, last = _bareiss(_integer_rows(m))
        return Fraction(0) if rk < m.rows else last * scale
    rows = m.as_rows()
    det = 1
    n = m.rows
    for col in range(n):
        pivot = next((i for i in range(col, n) if rows[i][col] % F.ell), None)
        if pivot is None:
            return 0
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            det = -det
        p = rows[col][col]
        det = det * p % F.ell
        inv = F.inv(p)
        for i in range(col + 1, n):
            c = rows[i][col] * inv % F.ell
            if c:
                rows[i] = [(x - c * y) % F.ell for x, y in zip(rows[i], rows[col])]
    return det % F.ell


# -- subspaces ---------------------------------------------------------------

@dataclass(frozen=True)
class Subspace:
    field: object
    ambient_dim: int
    rows: tuple

    @classmethod
    def span(cls, field, n: int, vectors: Sequence[Sequence]) -> "Subspace":
        vecs = [tuple(field.coerce(x) for x in v) for v in vectors]
        if any(len(v) != n for v in vecs):
            raise DimensionMismatch(f"vectors must have length {n}")
        return cls(field, n, _rref(field, vecs, n))

    @classmethod
    def zero(cls, field, n: int) -> "Subspace":
        return cls(field, n, ())

    @classmethod
    def full(cls, field, n: int) -> "Subspace":
        return cls.span(field, n, Matrix.identity(field, n).as_rows())

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def basis(self) -> Matrix:
        """Columns form the reduced column-echelon basis."""
        return Matrix.from_columns(self.field, self.rows, self.ambient_dim) if self.rows else \
            Matrix(self.field, self.ambient_dim, 0, ())

    @property
    def pivots(self) -> tuple[int, ...]:
        F = self.field
        return tuple(next(j for j, x in enumerate(r) if not F.is_zero(x)) for r in self.rows)

    def contains(self, v: Sequence) -> bool:
        return Subspace.span(self.field, self.ambient_dim, list(self.rows) + [v]).dim == self.dim

    def __le__(self, other: "Subspace") -> bool:
        _check_same(self, other)
        return subspace_sum(self, other).dim == other.dim

    def complement(self) -> "Subspace":
        """Coordinate complement spanned by the non-pivot standard vectors."""
        piv = set(self.pivots)
        n = self.ambient_dim
        return Subspace.span(self.field, n, [[1 if k == j else 0 for k in range(n)]
                                             for j in range(n) if j not in piv])


def _check_same(u: Subspace, v: Subspace):
    if u.field != v.field:
        raise FieldMismatch(f"{u.field} vs {v.field}")
    if u.ambient_dim != v.ambient_dim:
        raise DimensionMismatch(f"ambient {u.ambient_dim} vs {v.ambient_dim}")


def subspace_sum(u: Subspace, v: Subspace) -> Subspace:
    _check_same(u, v)
    return Subspace(u.field, u.ambient_dim, _rref(u.field, list(u.rows) + list(v.rows), u.ambient_dim))


def kernel(m: Matrix) -> Subspace:
    F = m.field
    n = m.cols
    red = _rref(F, m.as_rows(), n)
    piv = [next(j for j, x in enumerate(r) if not F.is_zero(x)) for r in red]
    free = [j for j in range(n) if j not in piv]
    basis = []
    for f in free:
        v = [F.zero] * n
        v[f] = F.one
        for r, pc in zip(red, piv):
            v[pc] = F.neg(r[f])
        basis.append(v)
    return Subspace(F, n, _rref(F, basis, n))


def perp(u: Subspace) -> Subspace:
    if u.dim == 0:
        return Subspace.full(u.field, u.ambient_dim)
    return kernel(Matrix.from_rows(u.field, u.rows, u.ambient_dim))


def intersect(u: Subspace, v: Subspace) -> Subspace:
    _check_same(u, v)
    return perp(subspace_sum(perp(u), perp(v)))


def meet_dim(u: Subspace, v: Subspace) -> int:
    return u.dim + v.dim - subspace_sum(u, v).dim


def image_span(mats: Sequence[Matrix], u: Subspace) -> Subspace:
    """Smallest subspace V with A_j(u) contained in V for every j."""
    if not mats:
        raise DimensionMismatch("empty tuple")
    q, p = mats[0].rows, mats[0].cols
    for a in mats:
        if (a.rows, a.cols) != (q, p):
            raise DimensionMismatch("tuple matrices must share their shape")
        if a.field != u.field:
            raise FieldMismatch(f"{a.field} vs {u.field}")
    if u.ambient_dim != p:
        raise DimensionMismatch(f"subspace of dim-{u.ambient_dim} space for maps from dim {p}")
    images = [a.apply(b) for b in u.rows for a in mats]
    return Subspace(u.field, q, _rref(u.field, images, q))


def preimage(mats: Sequence[Matrix], v: Subspace) -> Subspace:
    """Largest U with A_j(U) inside v for every j."""
    F = v.field
    p = mats[0].cols
    ann = perp(v)
    constraints = [mat_mul(Matrix.from_rows(F, [w], v.ambient_dim), a).row(0)
                   for w in ann.rows for a in mats]
    if not constraints:
        return Subspace.full(F, p)
    return kernel(Matrix.from_rows(F, constraints, p))


# -- enumeration -------------------------------------------------------------

def gaussian_binomial(n: int, d: int, ell: int) -> int:
    if d < 0 or d > n:
        return 0
    num = den = 1
    for i in range(d):
        num *= ell ** (n - i) - 1
        den *= ell ** (i + 1) - 1
    return num // den


def count_subspaces(n: int, ell: int, dims: Sequence[int] | None = None) -> int:
    dims = range(n + 1) if dims is None else dims
    return sum(gaussian_binomial(n, d, ell) for d in dims)


def check_budget(requested: int, budget: int | None = None, what="subspaces") -> int:
    budget = get_settings().budget if budget is None else budget
    if requested > budget:
        raise BudgetExceeded(requested, budget, what)
    return budget


def _require_prime(field) -> PrimeField:
    if not isinstance(field, PrimeField):
        raise FieldMismatch(f"enumeration needs a prime field, got {field}")
    return field


def enumerate_subspaces(field, n: int, d: int, budget: int | None = None) -> Iterator[Subspace]:
    """Every d-dimensional subspace of F_l^n once, in canonical echelon order."""
    F = _require_prime(field)
    if not 0 <= d <= n:
        raise DimensionMismatch(f"no {d}-dimensional subspaces of a {n}-dimensional space")
    total = gaussian_binomial(n, d, F.ell)
    check_budget(total, budget)
    log.debug("enumerating %d subspaces of dim %d in F_%d^%d", total, d, F.ell, n)
    return _echelon_forms(F, n, d)


def _echelon_forms(F: PrimeField, n: int, d: int) -> Iterator[Subspace]:
    for piv in itertools.combinations(range(n), d):
        pivset = set(piv)
        free = [(i, j) for i, c in enumerate(piv) for j in range(c + 1, n) if j not in pivset]
        for values in itertools.product(F.elements(), repeat=len(free)):
            rows = [[0] * n for _ in range(d)]
            for i, c in enumerate(piv):
                rows[i][c] = 1
            for (i, j), x in zip(free, values):
                rows[i][j] = x
            yield Subspace(F, n, tuple(tuple(r) for r in rows))


def enumerate_all(field, n: int, dims: Sequence[int] | None = None,
                  budget: int | None = None) -> Iterator[Subspace]:
    F = _require_prime(field)
    dims = list(range(n + 1)) if dims is None else list(dims)
    check_budget(count_subspaces(n, F.ell, dims), budget)
    for d in dims:
        yield from _echelon_forms(F, n, d)


def enumerate_superspaces(w: Subspace, budget: int | None = None) -> Iterator[Subspace]:
    """Every subspace V containing w, through V = w + S with S inside the coordinate complement."""
    F = _require_prime(w.field)
    c = w.complement()
    m = c.dim
    check_budget(count_subspaces(m, F.ell), budget)
    cols = c.rows
    for d in range(m + 1):
        for s in _echelon_forms(F, m, d):
            vecs = [tuple(F.add(0, sum(x * v[k] for x, v in zip(srow, cols)))
                          for k in range(w.ambient_dim)) for srow in s.rows]
            yield Subspace(F, w.ambient_dim, _rref(F, list(w.rows) + vecs, w.ambient_dim))


# -- flags -------------------------------------------------------------------

def standard_flag(field, n: int) -> tuple[Subspace, ...]:
    """F_i = span(e_1, ..., e_{n-i}) for i = 0..n."""
    eye = Matrix.identity(field, n).as_rows()
    return tuple(Subspace.span(field, n, eye[:n - i]) for i in range(n + 1))


def check_flag(flag: Sequence[Subspace], n: int, complete: bool = False):
    if not flag or flag[0].dim != n or flag[-1].dim != 0:
        raise FlagNotNested("flag must run from the ambient space down to zero")
    for big, small in zip(flag, flag[1:]):
        if big.ambient_dim != n or small.ambient_dim != n:
            raise DimensionMismatch("flag members live in different spaces")
        if small.dim >= big.dim or not small <= big:
            raise FlagNotNested(f"step of dims {big.dim} -> {small.dim} is not a strict inclusion")
        if complete and big.dim - small.dim != 1:
            raise FlagNotNested("complete flags drop dimension by one per step")


def flag_meet_dims(u: Subspace, flag: Sequence[Subspace]) -> tuple[int, ...]:
    check_flag(flag, u.ambient_dim)
    return tuple(meet_dim(u, f) for f in flag)


# -- field changes -----------------------------------------------------------

def reduce_mod(m: Matrix, ell: int) -> Matrix:
    if m.field != QQ:
        raise FieldMismatch(f"reduction needs a rational matrix, got {m.field}")
    F = PrimeField(ell)
    return Matrix(F, m.rows, m.cols, tuple(F.coerce(x) for x in m.entries))


def lift(m: Matrix) -> Matrix:
    """Rational matrix with the symmetric residues of an F_l matrix."""
    F = m.field
    if not isinstance(F, PrimeField):
        raise FieldMismatch(f"lift needs a prime-field matrix, got {F}")
    return Matrix(QQ, m.rows, m.cols, tuple(Fraction(F.symmetric(x)) for x in m.entries))


def lift_subspace(u: Subspace) -> Subspace:
    F = u.field
    return Subspace.span(QQ, u.ambient_dim, [[F.symmetric(x) for x in r] for r in u.rows])


def solve(m: Matrix, b: Sequence) -> tuple:
    """Unique solution x of m x = b for square invertible m."""
    if m.rows != m.cols or len(b) != m.rows:
        raise DimensionMismatch("solve needs a square system")
    F = m.field
    aug = [list(m.row(i)) + [F.coerce(b[i])] for i in range(m.rows)]
    red = _rref(F, aug, m.cols + 1)
    if len(red) != m.rows or any(F.is_zero(red[i][i]) for i in range(m.rows)):
        raise ZeroDivisionError("singular system")
    return tuple(r[-1] for r in red)


def inverse(m: Matrix) -> Matrix:
    if m.rows != m.cols:
        raise DimensionMismatch("only square matrices are invertible")
    F = m.field
    n = m.rows
    eye = Matrix.identity(F, n)
    aug = [list(m.row(i)) + list(eye.row(i)) for i in range(n)]
    red = _rref(F, aug, 2 * n)
    if len(red) < n or any(F.is_zero(red[i][i]) for i in range(n)):
        raise ZeroDivisionError("singular matrix")
    return Matrix.from_rows(F, [r[n:] for r in red], n)
