"""Exact arithmetic and linear algebra over GF(p)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from ._validation import Params, UsageError, check_vector


def inv_mod(a: int, p: int) -> int:
    """Inverse of ``a`` modulo ``p`` via the extended Euclidean algorithm."""
    a %= p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse mod {p}")
    old_r, r = a, p
    old_s, s = 1, 0
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
    if old_r != 1:
        raise ZeroDivisionError(f"{a} is not invertible mod {p}")
    return old_s % p


def dot_mod(x: Sequence[int], u: Sequence[int], params: Params) -> int:
    """Return ``sum(x_i * u_i) mod p``."""
    x = check_vector(x, params, "x")
    u = check_vector(u, params, "u")
    return sum(a * b for a, b in zip(x, u)) % params.p


@dataclass(frozen=True)
class FieldMatrix:
    """Rows over GF(p), optionally with an augmented right-hand column."""

    rows: tuple[tuple[int, ...], ...]
    aug: tuple[int, ...] | None = None
    width: int = field(default=-1)

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        widths = {len(r) for r in rows}
        if len(widths) > 1:
            raise UsageError("rows have unequal lengths")
        if self.width < 0:
            if not rows:
                raise UsageError("width is required for a matrix with no rows")
            object.__setattr__(self, "width", widths.pop())
        elif rows and widths.pop() != self.width:
            raise UsageError("row length disagrees with width")
        if self.aug is not None:
            aug = tuple(int(v) for v in self.aug)
            if len(aug) != len(rows):
                raise UsageError("augmented column length must equal row count")
            object.__setattr__(self, "aug", aug)

    @classmethod
    def from_equations(cls, equations, width: int):
        """Build from ``[(row, rhs), ...]``."""
        equations = list(equations)
        return cls(tuple(r for r, _ in equations), tuple(b for _, b in equations), width)

    def with_row(self, row, rhs=None) -> "FieldMatrix":
        if (rhs is None) != (self.aug is None):
            raise UsageError("rhs must be given iff the matrix is augmented")
        aug = None if self.aug is None else self.aug + (int(rhs),)
        return FieldMatrix(self.rows + (tuple(row),), aug, self.width)


class RrefResult(NamedTuple):
    matrix: FieldMatrix
    rank: int
    consistent: bool


def rref_mod(m: FieldMatrix, params: Params) -> RrefResult:
    """Reduced row echelon form of ``m`` over GF(p).

    ``rank`` counts pivots among coefficient columns only. ``consistent`` is
    False when some reduced row is zero on the coefficients but nonzero in the
    augmented column. Zero rows are kept at the bottom so the row count is
    preserved.
    """
    p = params.p
    augmented = m.aug is not None
    work = [
        [v % p for v in row] + ([m.aug[i] % p] if augmented else [])
        for i, row in enumerate(m.rows)
    ]
    rank = 0
    consistent = True
    for col in range(m.width + augmented):
        pivot = next((r for r in range(rank, len(work)) if work[r][col]), None)
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        inv = inv_mod(work[rank][col], p)
        work[rank] = [(v * inv) % p for v in work[rank]]
        for r in range(len(work)):
            if r != rank and work[r][col]:
                f = work[r][col]
                work[r] = [(a - f * b) % p for a, b in zip(work[r], work[rank])]
        if col == m.width:
            consistent = False
        else:
            rank += 1
    if augmented:
        rows = tuple(tuple(row[:-1]) for row in work)
        aug = tuple(row[-1] for row in work)
    else:
        rows = tuple(tuple(row) for row in work)
        aug = None
    return RrefResult(FieldMatrix(rows, aug, m.width), rank, consistent)


def solution_count(m: FieldMatrix, params: Params) -> int:
    """Number of ``u`` in ``{0..p-1}^n`` satisfying the augmented system."""
    if m.aug is None:
        raise UsageError("solution_count needs an augmented matrix")
    if m.width != params.n:
        raise UsageError(f"coefficient width {m.width} != n={params.n}")
    res = rref_mod(m, params)
    if not res.consistent:
        return 0
    return params.p ** (params.n - res.rank)


def is_multiple_pair(s: Sequence[int], t: Sequence[int], params: Params) -> bool:
    """True iff ``t == lam * s (mod p)`` for some ``lam`` in ``1..p-1``."""
    s = check_vector(s, params, "s")
    t = check_vector(t, params, "t")
    if not any(s) or not any(t):
        raise UsageError("is_multiple_pair is undefined for the zero vector")
    i = next(i for i, v in enumerate(s) if v)
    lam = t[i] * inv_mod(s[i], params.p) % params.p
    return lam != 0 and all((lam * a - b) % params.p == 0 for a, b in zip(s, t))


def matrix_rank(rows, params: Params) -> int:
    rows = [tuple(r) for r in rows]
    if not rows:
        return 0
    return rref_mod(FieldMatrix(tuple(rows)), params).rank
