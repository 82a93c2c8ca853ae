"""Exact checks of the GF(p) probability facts behind the bandit lower bound.

Every probability and covariance here is a :class:`fractions.Fraction`
obtained from integer solution counts; floats only appear in
:func:`lemma4_bound`, which is for display.

Randomized routines draw from ``numpy.random.default_rng(seed)``, i.e. the
PCG64 generator seeded through ``SeedSequence``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import (
    Params,
    UsageError,
    check_coeff_array,
    check_nonzero_coeffs,
    check_params,
    check_vector,
)
from .gfp import FieldMatrix, is_multiple_pair, solution_count
from .hypotheses import lex_vectors, nonzero_vectors

EXHAUSTIVE_LIMIT = 10**5


def frac_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _count(rows, rhs, params: Params) -> int:
    return solution_count(FieldMatrix(tuple(rows), tuple(rhs), params.n), params)


def marginal_probability(x: Sequence[int], y: int, params: Params) -> Fraction:
    """``Pr_u(x . u = y)`` for uniform ``u``; ``x`` may be zero."""
    x = check_vector(x, params)
    if not 0 <= y < params.p:
        raise UsageError(f"label {y} outside [0, {params.p})")
    return Fraction(_count([x], [y], params), params.p**params.n)


def _pair_args(s, t, z, params: Params):
    if params.n < 2:
        raise UsageError("needs n >= 2")
    s = check_nonzero_coeffs(s, params, "s")
    t = check_nonzero_coeffs(t, params, "t")
    if not 0 <= z < params.p:
        raise UsageError(f"z={z} outside [0, {params.p})")
    return s, t


def conditional_probability(s, t, z: int, params: Params) -> Fraction:
    """``Pr_u(t . u = z | s . u = z)`` as a ratio of solution counts."""
    s, t = _pair_args(s, t, z, params)
    joint = _count([s, t], [z, z], params)
    given = _count([s], [z], params)
    return Fraction(joint, given)


def exact_covariance(s, t, z: int, params: Params) -> Fraction:
    """Covariance of the indicators ``[s . u = z]`` and ``[t . u = z]``."""
    s, t = _pair_args(s, t, z, params)
    if s == t:
        raise UsageError("covariance needs s != t; use the variance for s == t")
    total = params.p**params.n
    joint = Fraction(_count([s, t], [z, z], params), total)
    ms = Fraction(_count([s], [z], params), total)
    mt = Fraction(_count([t], [z], params), total)
    return joint - ms * mt


def covariance_closed_form(multiples: bool, z: int, p: int) -> Fraction:
    if not multiples:
        return Fraction(0)
    if z == 0:
        return Fraction(1, p) - Fraction(1, p * p)
    return Fraction(-1, p * p)


# ---------------------------------------------------------------- buckets


def full_coeff_set(params: Params) -> np.ndarray:
    """``S = {1..p-1}^n`` as an ``((p-1)^n, n)`` array."""
    return nonzero_vectors(params)


def bucket_counts(S, u: Sequence[int], params: Params) -> dict[int, int]:
    """Map each label ``z`` to ``|{x in S : x . u = z}|``."""
    S = check_coeff_array(S, params, allow_zero=True)
    u = np.asarray(check_vector(u, params, "u"), dtype=np.int64)
    counts = np.bincount((S @ u) % params.p, minlength=params.p)
    return {z: int(c) for z, c in enumerate(counts)}


def lemma4_bound(size: int, p: int) -> float:
    """``size/p + 2*sqrt(size)`` as a float, for reporting."""
    return size / p + 2 * math.sqrt(size)


def within_bound(count: int, size: int, p: int) -> bool:
    """Exact test of ``count <= size/p + 2*sqrt(size)``."""
    d = p * count - size
    return d <= 0 or d * d <= 4 * p * p * size


def _max_bucket_table(S: np.ndarray, U: np.ndarray, p: int) -> np.ndarray:
    """Largest bucket for every candidate row of ``U``."""
    if len(S) == 0:
        return np.zeros(len(U), dtype=np.int64)
    out = np.empty(len(U), dtype=np.int64)
    chunk = max(1, 4_000_000 // max(1, len(S)))
    for lo in range(0, len(U), chunk):
        D = (S @ U[lo : lo + chunk].T) % p
        best = np.zeros(D.shape[1], dtype=np.int64)
        for z in range(p):
            np.maximum(best, (D == z).sum(axis=0), out=best)
        out[lo : lo + chunk] = best
    return out


def argmin_max_bucket(S: np.ndarray, U: np.ndarray, p: int) -> tuple[int, int]:
    """Index of the first row of ``U`` with the smallest max bucket, and that size."""
    mb = _max_bucket_table(S, U, p)
    i = int(np.argmin(mb))
    return i, int(mb[i])


@dataclass
class BalancedSearch:
    """Outcome of :func:`find_balanced_u`."""

    u: tuple[int, ...]
    counts: dict[int, int]
    success: bool
    trials: int
    exhaustive: bool
    size: int
    p: int
    attempts: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def bound(self) -> float:
        return lemma4_bound(self.size, self.p)

    def to_json(self) -> dict:
        return {
            "u": list(self.u),
            "buckets": {str(z): c for z, c in self.counts.items()},
            "bound": self.bound,
            "size": self.size,
            "success": self.success,
            "trials": self.trials,
            "exhaustive": self.exhaustive,
            "attempts": [list(a) for a in self.attempts],
        }


def find_balanced_u(
    S, params: Params, budget: int = 64, seed: int = 0, exhaustive: bool = True
) -> BalancedSearch:
    """Search for ``u`` whose buckets over ``S`` all respect the balance bound.

    Draws up to ``budget`` uniform candidates and returns the first success.
    If sampling fails and ``exhaustive`` is set and ``p**n <= 10**5``, every
    ``u`` is scanned in lexicographic order. On failure the best-seen ``u``
    (smallest max bucket) is returned with ``success=False``.
    """
    params = check_params(params)
    S = check_coeff_array(S, params, allow_zero=True)
    size, p, n = len(S), params.p, params.n
    zero = (0,) * n
    if size == 0:
        return BalancedSearch(zero, bucket_counts(S, zero, params), True, 0, False, 0, p)
    if budget < 0:
        raise UsageError("budget must be >= 0")

    rng = np.random.default_rng(seed)
    best_u, best_max = None, None
    attempts = []
    for trial in range(1, budget + 1):
        u = tuple(int(v) for v in rng.integers(0, p, size=n))
        attempts.append(u)
        counts = bucket_counts(S, u, params)
        m = max(counts.values())
        if within_bound(m, size, p):
            return BalancedSearch(u, counts, True, trial, False, size, p, attempts)
        if best_max is None or m < best_max:
            best_u, best_max = u, m

    if exhaustive and budget > 0 and p**n <= EXHAUSTIVE_LIMIT:
        U = lex_vectors(params)
        i, m = argmin_max_bucket(S, U, p)
        u = tuple(int(v) for v in U[i])
        ok = within_bound(m, size, p)
        return BalancedSearch(u, bucket_counts(S, u, params), ok, budget, True, size, p, attempts)

    if best_u is None:
        return BalancedSearch(zero, bucket_counts(S, zero, params), False, 0, False, size, p, attempts)
    return BalancedSearch(best_u, bucket_counts(S, best_u, params), False, budget, False, size, p, attempts)


def exists_balanced_u(S, params: Params) -> bool:
    """Exhaustive scan over all ``p**n`` candidates."""
    S = check_coeff_array(S, params, allow_zero=True)
    if len(S) == 0:
        return True
    _, m = argmin_max_bucket(S, lex_vectors(params), params.p)
    return within_bound(m, len(S), params.p)


def success_frequency(S, params: Params, trials: int, seed: int = 0) -> Fraction:
    """Fraction of ``trials`` uniform draws of ``u`` that are balanced for ``S``."""
    params = check_params(params)
    if trials < 1:
        raise UsageError("trials must be >= 1")
    S = check_coeff_array(S, params, allow_zero=True)
    if len(S) == 0:
        return Fraction(1)
    rng = np.random.default_rng(seed)
    U = rng.integers(0, params.p, size=(trials, params.n))
    mb = _max_bucket_table(S, U, params.p)
    hits = sum(within_bound(int(m), len(S), params.p) for m in mb)
    return Fraction(hits, trials)


def count_multiple_pairs(S, params: Params) -> int:
    """Ordered pairs ``(s, t)``, ``s != t`` in ``S``, that are multiples mod p."""
    S = check_coeff_array(S, params)
    members = {tuple(int(v) for v in row) for row in S}
    p = params.p
    total = 0
    for s in members:
        for lam in range(2, p):
            if tuple(lam * v % p for v in s) in members:
                total += 1
    return total


def bucket_variance(S, z: int, params: Params) -> Fraction:
    """Exact ``Var|T_z|`` from the per-pair closed forms (variance plus covariances)."""
    S = check_coeff_array(S, params)
    p = params.p
    single = Fraction(1, p) - Fraction(1, p * p)
    return len(S) * single + count_multiple_pairs(S, params) * covariance_closed_form(True, z, p)


# ---------------------------------------------------------------- sweeps


def _report(lemma, params, cases, violations, **extra) -> dict:
    out = {"lemma": lemma, "params": {"p": params.p, "n": params.n}, "cases_checked": cases,
           "violations": violations}
    out.update(extra)
    return out


def _violation(s, t, z, expected: Fraction, actual: Fraction) -> dict:
    return {"s": list(s), "t": list(t), "z": z, "expected": frac_str(expected),
            "actual": frac_str(actual)}


def _pairs(params: Params):
    S = [tuple(int(v) for v in r) for r in full_coeff_set(params)]
    for s in S:
        for t in S:
            if s != t:
                yield s, t


def expected_conditional(s, t, z, params: Params) -> Fraction:
    if not is_multiple_pair(s, t, params):
        return Fraction(1, params.p)
    if s == t or z == 0:
        return Fraction(1)
    return Fraction(0)


def verify_conditional(params: Params) -> dict:
    """Every ordered pair ``s != t`` in ``{1..p-1}^n`` and every ``z``."""
    cases, bad = 0, []
    for s, t in _pairs(params):
        for z in range(params.p):
            cases += 1
            exp = expected_conditional(s, t, z, params)
            got = conditional_probability(s, t, z, params)
            if got != exp:
                bad.append(_violation(s, t, z, exp, got))
    return _report("conditional", params, cases, bad)


def verify_false_lemma(params: Params) -> dict:
    """List the counterexamples to the uncorrected claim (conditional = 1/p for all s != t).

    Violations are cases where the failure pattern differs from "exactly the
    multiple pairs fail, with probability 1 at z = 0 and 0 otherwise".
    """
    claimed = Fraction(1, params.p)
    cases, counter, bad = 0, [], []
    for s, t in _pairs(params):
        mult = is_multiple_pair(s, t, params)
        for z in range(params.p):
            cases += 1
            got = conditional_probability(s, t, z, params)
            if got != claimed:
                counter.append(_violation(s, t, z, claimed, got))
            want = Fraction(1 if z == 0 else 0) if mult else claimed
            if got != want:
                bad.append(_violation(s, t, z, want, got))
    return _report("falselemma", params, cases, bad, counterexamples=counter)


def verify_marginal(params: Params) -> dict:
    """``Pr(x . u = y) = 1/p`` for every nonzero ``x`` and every ``y``."""
    cases, bad = 0, []
    want = Fraction(1, params.p)
    zero = (0,) * params.n
    for row in lex_vectors(params):
        x = tuple(int(v) for v in row)
        if x == zero:
            continue
        for y in range(params.p):
            cases += 1
            got = marginal_probability(x, y, params)
            if got != want:
                bad.append({"x": list(x), "y": y, "expected": frac_str(want), "actual": frac_str(got)})
    return _report("marginal", params, cases, bad)


def verify_covariance(params: Params) -> dict:
    cases, bad = 0, []
    for s, t in _pairs(params):
        mult = is_multiple_pair(s, t, params)
        for z in range(params.p):
            cases += 1
            exp = covariance_closed_form(mult, z, params.p)
            got = exact_covariance(s, t, z, params)
            if got != exp:
                bad.append(_violation(s, t, z, exp, got))
    return _report("covariance", params, cases, bad)


def verify_joint_count(params: Params, pairs: int = 1000, seed: int = 0) -> dict:
    """Random pairs from ``{1..p-1}^n``: the two-equation system has
    ``p^(n-2)`` solutions for non-multiples, ``p^(n-1)`` for multiples at
    ``z = 0`` and none for distinct multiples at ``z != 0``.

    ``pairs`` non-multiple pairs are drawn, plus one multiple pair per draw
    (``t = lam * s`` with random ``lam``) checked at every ``z``.
    """
    if params.n < 2:
        raise UsageError("needs n >= 2")
    rng = np.random.default_rng(seed)
    p, n = params.p, params.n
    cases, bad, nonmult = 0, [], 0
    while nonmult < pairs:
        s = tuple(int(v) for v in rng.integers(1, p, size=n))
        t = tuple(int(v) for v in rng.integers(1, p, size=n))
        z = int(rng.integers(0, p))
        if s != t and not is_multiple_pair(s, t, params):
            nonmult += 1
            cases += 1
            got = _count([s, t], [z, z], params)
            if got != p ** (n - 2):
                bad.append({"s": list(s), "t": list(t), "z": z, "expected": p ** (n - 2), "actual": got})
        if p > 2:
            lam = int(rng.integers(2, p))
            t2 = tuple(lam * v % p for v in s)
            for z2 in range(p):
                cases += 1
                want = p ** (n - 1) if z2 == 0 else 0
                got = _count([s, t2], [z2, z2], params)
                if got != want:
                    bad.append({"s": list(s), "t": list(t2), "z": z2, "expected": want, "actual": got})
    return _report("jointcount", params, cases, bad)


def verify_multiple_pairs(params: Params) -> dict:
    S = full_coeff_set(params)
    got = count_multiple_pairs(S, params)
    want = (params.p - 2) * len(S)
    bad = [] if got == want else [{"expected": want, "actual": got}]
    return _report("multiples", params, 1, bad)


# ---------------------------------------------------------------- estimator


class BalancedHasher(TransformerMixin, BaseEstimator):
    """Hash vectors to labels with a ``u`` that balances a training set.

    ``fit(S)`` searches for ``u`` such that no label bucket
    ``{x in S : x . u = z}`` exceeds ``|S|/p + 2*sqrt(|S|)``;
    ``transform(X)`` returns ``X . u mod p``.

    Parameters
    ----------
    p : int
        Prime modulus.
    n : int
        Vector length.
    budget : int, default=64
        Number of random candidates before the exhaustive fallback.
    random_state : int, default=0
        Seed for candidate sampling.
    exhaustive : bool, default=True
        Scan all candidates when sampling fails and ``p**n <= 10**5``.

    Attributes
    ----------
    u_ : ndarray of shape (n,)
    bucket_counts_ : dict
    success_ : bool
    """

    def __init__(self, p=5, n=2, budget=64, random_state=0, exhaustive=True):
        self.p = p
        self.n = n
        self.budget = budget
        self.random_state = random_state
        self.exhaustive = exhaustive

    def fit(self, X, y=None):
        params = Params(self.p, self.n)
        res = find_balanced_u(X, params, self.budget, self.random_state, self.exhaustive)
        self.u_ = np.asarray(res.u, dtype=np.int64)
        self.bucket_counts_ = res.counts
        self.success_ = res.success
        self.n_trials_ = res.trials
        return self

    def transform(self, X):
        check_is_fitted(self, "u_")
        X = check_coeff_array(X, Params(self.p, self.n), allow_zero=True, unique=False)
        return (X @ self.u_) % self.p
