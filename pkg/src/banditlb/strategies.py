"""Learners, adversaries and the explicit round bound for the linear class."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import (
    Params,
    ProtocolViolation,
    UsageError,
    check_coeff_array,
    check_params,
    check_vector,
)
from .game import FeedbackMode, Round
from .gfp import FieldMatrix, rref_mod
from .hypotheses import LinearClass, lex_vectors, nonzero_vectors
from .lemmas import EXHAUSTIVE_LIMIT, _max_bucket_table, lemma4_bound, within_bound


def _class_params(cls):
    params = getattr(cls, "params", None)
    if params is None:
        raise UsageError("this strategy only plays on the linear class F_L(p, n)")
    return params


# ---------------------------------------------------------------- learners


class SubspaceLearner(BaseEstimator):
    """Standard-model learner for ``F_L(p, n)`` that tracks the affine set of
    consistent coefficient vectors.

    It predicts with the lexicographically least consistent ``a``; when the
    query lies in the span of earlier queries every consistent ``a`` gives
    the same label, so the prediction is forced. Each mistake therefore adds
    a new independent equation, giving at most ``n`` mistakes.

    Parameters
    ----------
    p : int, optional
        Prime modulus. Taken from the class when the learner plays a game.
    n : int, optional
        Dimension. Inferred from ``X`` in :meth:`fit` when omitted.

    Attributes
    ----------
    rank_ : int
        Rank of the accumulated equation system.
    coef_ : ndarray of shape (n,)
        Lexicographically least consistent coefficient vector.
    """

    def __init__(self, p=None, n=None):
        self.p = p
        self.n = n

    def _reset(self, params: Params):
        self.params_ = params
        self.equations_ = FieldMatrix((), (), params.n)
        self.rank_ = 0
        self.coef_ = np.zeros(params.n, dtype=np.int64)
        return self

    def _ensure_started(self, X=None):
        if hasattr(self, "params_"):
            return
        if self.p is None:
            raise UsageError("p must be set before fitting")
        n = self.n if self.n is not None else np.asarray(X).shape[1]
        self._reset(Params(self.p, n))

    # game protocol
    def start(self, cls, mode=FeedbackMode.STANDARD):
        return self._reset(_class_params(cls))

    def act(self, x) -> int:
        x = np.asarray(check_vector(x, self.params_), dtype=np.int64)
        return int(self.coef_ @ x % self.params_.p)

    def observe(self, rnd: Round):
        fb = rnd.feedback
        if isinstance(fb, bool):
            if fb:
                y = rnd.guess
            elif self.params_.p == 2:
                y = 1 - rnd.guess
            else:
                raise UsageError("a bandit 'no' pins the label only when p == 2")
        else:
            y = fb
        self.observe_label(rnd.query, y)

    # linear algebra
    def is_forced(self, x) -> bool:
        x = check_vector(x, self.params_)
        if not self.equations_.rows:
            return not any(x)
        rows = self.equations_.rows
        return rref_mod(FieldMatrix(rows + (x,)), self.params_).rank == self.rank_

    def observe_label(self, x, y: int):
        x = check_vector(x, self.params_)
        eqs = self.equations_.with_row(x, int(y) % self.params_.p)
        res = rref_mod(eqs, self.params_)
        if not res.consistent:
            raise ProtocolViolation(f"label {y} at {x} contradicts earlier equations")
        self.equations_ = eqs
        if res.rank != self.rank_:
            # same rank means the same solution set, so coef_ stays valid
            self.rank_ = res.rank
            self.coef_ = self._least_solution()
        return self

    def _least_solution(self) -> np.ndarray:
        p, n = self.params_.p, self.params_.n
        eqs = self.equations_
        fixed = []
        for i in range(n):
            e_i = tuple(int(j == i) for j in range(n))
            for v in range(p):
                trial = eqs.with_row(e_i, v)
                if rref_mod(trial, self.params_).consistent:
                    eqs = trial
                    fixed.append(v)
                    break
        return np.array(fixed, dtype=np.int64)

    # estimator API
    def partial_fit(self, X, y):
        X = np.atleast_2d(np.asarray(X, dtype=np.int64))
        self._ensure_started(X)
        for x, label in zip(X, np.asarray(y).ravel()):
            self.observe_label(x, int(label))
        return self

    def fit(self, X, y):
        for attr in ("params_", "equations_", "rank_", "coef_"):
            self.__dict__.pop(attr, None)
        return self.partial_fit(X, y)

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "coef_")
        X = np.atleast_2d(np.asarray(X, dtype=np.int64))
        return np.array([self.act(x) for x in X], dtype=np.int64)


class PluralityLearner(BaseEstimator):
    """Bandit learner that guesses the label shared by most consistent coefficients.

    The candidate set starts as ``coeffs`` (default ``{1..p-1}^n``). A "no"
    drops the guessed bucket and a "yes" keeps only that bucket. Ties go to
    the smallest label.

    Parameters
    ----------
    p, n : int, optional
        Taken from the class when playing a game.
    coeffs : array-like of shape (m, n), optional
        Initial candidate coefficient vectors.
    """

    def __init__(self, p=None, n=None, coeffs=None):
        self.p = p
        self.n = n
        self.coeffs = coeffs

    def _reset(self, params: Params):
        self.params_ = params
        if self.coeffs is None:
            self.candidates_ = nonzero_vectors(params)
        else:
            self.candidates_ = check_coeff_array(self.coeffs, params, allow_zero=True)
        if len(self.candidates_) == 0:
            raise UsageError("initial candidate set is empty")
        return self

    def start(self, cls, mode=FeedbackMode.BANDIT):
        return self._reset(_class_params(cls))

    def fit(self, X=None, y=None):
        return self._reset(Params(self.p, self.n))

    def bucket_sizes(self, x) -> np.ndarray:
        x = np.asarray(check_vector(x, self.params_), dtype=np.int64)
        return np.bincount(self.candidates_ @ x % self.params_.p, minlength=self.params_.p)

    def act(self, x) -> int:
        return int(np.argmax(self.bucket_sizes(x)))

    def observe(self, rnd: Round):
        x = np.asarray(rnd.query, dtype=np.int64)
        labels = self.candidates_ @ x % self.params_.p
        fb = rnd.feedback
        if isinstance(fb, bool):
            keep = (labels == rnd.guess) if fb else (labels != rnd.guess)
        else:
            keep = labels == fb
        self.candidates_ = self.candidates_[keep]
        if len(self.candidates_) == 0:
            raise ProtocolViolation("no candidate coefficient vector is consistent")

    def partial_fit(self, X, guesses, feedback):
        check_is_fitted(self, "candidates_")
        for x, g, fb in zip(np.atleast_2d(X), guesses, feedback):
            self.observe(Round(tuple(int(v) for v in x), int(g), fb))
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "candidates_")
        return np.array([self.act(x) for x in np.atleast_2d(X)], dtype=np.int64)


class RandomLearner(BaseEstimator):
    """Guesses a uniformly random label each round."""

    def __init__(self, random_state=0):
        self.random_state = random_state

    def start(self, cls, mode=None):
        self.k_ = cls.n_labels
        self.rng_ = np.random.default_rng(self.random_state)
        return self

    def act(self, x) -> int:
        return int(self.rng_.integers(0, self.k_))

    def observe(self, rnd):
        pass


# ---------------------------------------------------------------- adversaries


class BasisAdversary:
    """Queries ``e_1, ..., e_n`` and contradicts every guess, then stops.

    Standard mode answers ``(guess + 1) mod p``; bandit mode answers "no".
    Each query reveals one coordinate of ``a`` only, so every answer stays
    consistent and the learner is forced into ``n`` mistakes.
    """

    def start(self, cls, mode):
        self.params = _class_params(cls)
        self.mode = FeedbackMode(mode)
        self.t = 0

    def query(self):
        if self.t >= self.params.n:
            return None
        return tuple(int(j == self.t) for j in range(self.params.n))

    def respond(self, x, guess):
        if self.mode is FeedbackMode.BANDIT:
            return False
        return (guess + 1) % self.params.p

    def observe(self, rnd):
        self.t += 1


class RandomConsistentAdversary:
    """Random queries and random answers among those that keep some function consistent."""

    def __init__(self, seed=0, rounds=None):
        self.seed = seed
        self.rounds = rounds

    def start(self, cls, mode):
        self.cls = cls
        self.mode = FeedbackMode(mode)
        self.rng = np.random.default_rng(self.seed)
        self.alive = np.ones(cls.n_functions, dtype=bool)
        self.points = cls.points()
        params = getattr(cls, "params", None)
        self.limit = self.rounds if self.rounds is not None else 3 * (params.n if params else 4)
        self.t = 0

    def query(self):
        if self.t >= self.limit:
            return None
        return self.points[int(self.rng.integers(0, len(self.points)))]

    def respond(self, x, guess):
        labels = self.cls.labels_at(x)[self.alive]
        realized = np.unique(labels)
        if self.mode is FeedbackMode.STANDARD:
            return int(self.rng.choice(realized))
        options = []
        if guess in realized:
            options.append(True)
        if (realized != guess).any():
            options.append(False)
        return bool(options[int(self.rng.integers(0, len(options)))])

    def observe(self, rnd):
        c = rnd.constraint()
        labels = self.cls.labels_at(rnd.query)
        self.alive &= (labels == c.label) if c.equal else (labels != c.label)
        self.t += 1


@dataclass
class RoundRecord:
    size_before: int
    max_bucket: int
    removed: int
    size_after: int


class Lemma4Adversary:
    """Bandit adversary that always says "no" while its candidate set stays large.

    It keeps ``R``, the coefficient vectors in ``{1..p-1}^n`` consistent with
    its answers. Each round it queries the ``x`` minimizing the largest bucket
    ``|{a in R : a . x = y}|`` (exhaustively when ``p**n <= 10**5``, otherwise
    over ``samples`` random candidates), answers "no", and drops the guessed
    bucket. It stops once ``|R| < p^2 ln p``.

    Every chosen query is checked to satisfy
    ``max bucket <= |R|/p + 2 sqrt(|R|)``; a miss raises ``RuntimeError``.
    """

    def __init__(self, seed=0, samples=64, exhaustive_limit=EXHAUSTIVE_LIMIT):
        self.seed = seed
        self.samples = samples
        self.exhaustive_limit = exhaustive_limit

    def start(self, cls, mode):
        if FeedbackMode(mode) is not FeedbackMode.BANDIT:
            raise UsageError("lemma4-adversary plays the bandit model only")
        self.params = _class_params(cls)
        p = self.params.p
        self.R = nonzero_vectors(self.params)
        self.threshold = p * p * math.log(p)
        self.rng = np.random.default_rng(self.seed)
        self.history: list[RoundRecord] = []
        self._pending = None
        self._all = lex_vectors(self.params) if p**self.params.n <= self.exhaustive_limit else None

    @property
    def threshold_reached(self) -> bool:
        return len(self.R) < self.threshold

    def query(self):
        if len(self.R) == 0 or self.threshold_reached:
            return None
        p = self.params.p
        if self._all is not None:
            U = self._all
        else:
            U = self.rng.integers(0, p, size=(self.samples, self.params.n))
        mb = _max_bucket_table(self.R, U, p)
        best = int(mb.min())
        # ties: lexicographically smallest candidate
        x = min(tuple(int(v) for v in U[i]) for i in np.flatnonzero(mb == best))
        if not within_bound(best, len(self.R), p):
            raise RuntimeError(
                f"no query found with max bucket <= {lemma4_bound(len(self.R), p):.3f} "
                f"(best {best}, |R|={len(self.R)})"
            )
        self._pending = (len(self.R), best)
        return x

    def respond(self, x, guess):
        return False

    def observe(self, rnd):
        labels = self.R @ np.asarray(rnd.query, dtype=np.int64) % self.params.p
        before, best = self._pending
        self.R = self.R[labels != rnd.guess]
        self.history.append(RoundRecord(before, best, before - len(self.R), len(self.R)))


# ---------------------------------------------------------------- bound


@dataclass(frozen=True)
class RoundBound:
    b: int
    params: Params

    @property
    def asymptote(self) -> float:
        """``n p ln p``, the leading-order size of ``b``."""
        p, n = self.params.p, self.params.n
        return n * p * math.log(p)

    @property
    def ratio(self) -> float:
        return self.b / self.asymptote


def shrink_factor(p: int) -> float:
    """``1 - (1 + 2/sqrt(ln p)) / p``: per-round survival fraction of ``R``."""
    return 1 - (1 + 2 / math.sqrt(math.log(p))) / p


def lower_bound_rounds(params, n=None) -> RoundBound:
    """Largest ``b`` with ``shrink^(b-1) * (p-1)^n >= p^2 ln p``.

    Evaluated in log space so that large ``(p-1)^n`` does not overflow;
    ``b`` is found by counting up until the inequality fails.
    """
    params = check_params(params, n)
    p, n = params.p, params.n
    if p < 3:
        raise UsageError("the round bound needs p >= 3")
    log_shrink = math.log(shrink_factor(p))
    log_start = n * math.log(p - 1)
    log_threshold = math.log(p * p * math.log(p))
    b = 0
    while (b * log_shrink) + log_start >= log_threshold:
        b += 1
    return RoundBound(b, params)


# ---------------------------------------------------------------- factories

LEARNERS = ("subspace", "plurality", "random:<seed>")
ADVERSARIES = ("basis-adversary", "lemma4-adversary", "random-adversary:<seed>")


def _seeded(name: str, prefix: str):
    _, _, seed = name.partition(":")
    try:
        return int(seed) if seed else 0
    except ValueError:
        raise UsageError(f"bad seed in strategy name {name!r}") from None


def make_learner(name: str):
    if name == "subspace":
        return SubspaceLearner()
    if name == "plurality":
        return PluralityLearner()
    if name == "random" or name.startswith("random:"):
        return RandomLearner(_seeded(name, "random"))
    raise UsageError(f"unknown learner {name!r}; choose from {', '.join(LEARNERS)}")


def make_adversary(name: str, seed: int = 0):
    if name == "basis-adversary":
        return BasisAdversary()
    if name == "lemma4-adversary":
        return Lemma4Adversary(seed=seed)
    if name == "random-adversary" or name.startswith("random-adversary:"):
        return RandomConsistentAdversary(_seeded(name, "random-adversary"))
    raise UsageError(f"unknown adversary {name!r}; choose from {', '.join(ADVERSARIES)}")
