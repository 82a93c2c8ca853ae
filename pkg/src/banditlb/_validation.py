"""Input validation helpers shared by every module."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class UsageError(ValueError):
    """Raised when caller-supplied inputs violate a precondition."""


class ProtocolViolation(RuntimeError):
    """Raised when a player breaks the online-learning protocol.

    ``round_index`` is the 1-based round in which the violation happened,
    or ``None`` when it is not tied to a round.
    """

    def __init__(self, message: str, round_index: int | None = None):
        super().__init__(message)
        self.round_index = round_index


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class Params:
    """Prime modulus ``p`` and dimension ``n``."""

    p: int
    n: int

    def __post_init__(self):
        if isinstance(self.p, bool) or not isinstance(self.p, (int, np.integer)):
            raise UsageError(f"p must be an integer, got {self.p!r}")
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise UsageError(f"n must be an integer, got {self.n!r}")
        if not is_prime(int(self.p)):
            raise UsageError(f"p={self.p} is not prime")
        if self.n < 1:
            raise UsageError(f"n must be >= 1, got {self.n}")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "n", int(self.n))


def check_params(p, n=None) -> Params:
    """Accept a ``Params`` or a ``(p, n)`` pair and return a ``Params``."""
    if isinstance(p, Params):
        return p
    return Params(p, n)


def check_vector(x: Iterable[int], params: Params, name: str = "x") -> tuple[int, ...]:
    """Return ``x`` as a tuple of canonical residues, validating shape and range."""
    vec = tuple(int(v) for v in x)
    if len(vec) != params.n:
        raise UsageError(f"{name} has length {len(vec)}, expected {params.n}")
    for v in vec:
        if not 0 <= v < params.p:
            raise UsageError(f"{name} has entry {v} outside [0, {params.p})")
    return vec


def check_nonzero_coeffs(x: Sequence[int], params: Params, name: str = "x") -> tuple[int, ...]:
    """Validate that every entry of ``x`` is in ``{1, ..., p-1}``."""
    vec = check_vector(x, params, name)
    if any(v == 0 for v in vec):
        raise UsageError(f"{name} must have all entries in [1, {params.p})")
    return vec


def check_coeff_array(S, params: Params, allow_zero: bool = False, unique: bool = True) -> np.ndarray:
    """Return ``S`` as an ``(m, n)`` int64 array, by default of distinct rows."""
    arr = np.asarray(list(S) if not isinstance(S, np.ndarray) else S, dtype=np.int64)
    if arr.size == 0:
        return np.zeros((0, params.n), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != params.n:
        raise UsageError(f"coefficient set must have shape (m, {params.n}), got {arr.shape}")
    low = 0 if allow_zero else 1
    if arr.min() < low or arr.max() >= params.p:
        raise UsageError(f"coefficient entries must lie in [{low}, {params.p})")
    if unique and len(np.unique(arr, axis=0)) != len(arr):
        raise UsageError("coefficient set has duplicate members")
    return arr
