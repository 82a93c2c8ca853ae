"""Exact worst-case mistake counts for small classes.

Version spaces are bitmasks over the class's function indices. Values are
memoized in a module-level table keyed by ``(class key, model, mask)`` so
repeated solves across classes share one cache safely.
"""

from __future__ import annotations

from dataclasses import dataclass

from ._validation import UsageError
from .hypotheses import ExplicitClass, LinearClass, tabulate

MAX_CLASS_SIZE = 20

_MEMO: dict = {}


def clear_cache():
    _MEMO.clear()


class _Tables:
    """Per-point label partitions as bitmasks: ``parts[x][y]`` = functions with ``f(x) = y``."""

    _cache: dict = {}

    def __new__(cls, klass):
        key = klass.key
        hit = cls._cache.get(key)
        if hit is not None:
            return hit
        self = super().__new__(cls)
        self.key = hash(key)
        self.k = klass.n_labels
        self.full = (1 << klass.n_functions) - 1
        parts = []
        for x in klass.points():
            labels = klass.labels_at(x)
            row = [0] * self.k
            for i, y in enumerate(labels):
                row[int(y)] |= 1 << i
            parts.append(row)
        self.parts = parts
        cls._cache[key] = self
        return self


def _as_class(klass):
    if isinstance(klass, LinearClass):
        if klass.n_functions > MAX_CLASS_SIZE:
            raise UsageError(f"class has {klass.n_functions} functions; the solver cap is {MAX_CLASS_SIZE}")
        return tabulate(klass)
    if klass.n_functions > MAX_CLASS_SIZE:
        raise UsageError(f"class has {klass.n_functions} functions; the solver cap is {MAX_CLASS_SIZE}")
    return klass


def _as_mask(tab: _Tables, V) -> int:
    if V is None:
        mask = tab.full
    elif isinstance(V, int):
        mask = V
    else:
        mask = 0
        for i in V:
            mask |= 1 << int(i)
    if mask == 0:
        raise UsageError("version space is empty")
    if mask & ~tab.full:
        raise UsageError("version space names functions outside the class")
    return mask


def _split(tab: _Tables, x: int, V: int) -> list[tuple[int, int]]:
    return [(y, V & part) for y, part in enumerate(tab.parts[x]) if V & part]


def _standard(tab: _Tables, V: int) -> int:
    key = (tab.key, "s", V)
    hit = _MEMO.get(key)
    if hit is not None:
        return hit
    best = 0
    for x in range(len(tab.parts)):
        branches = _split(tab, x, V)
        if len(branches) < 2:
            continue
        sub = {y: _standard(tab, W) for y, W in branches}
        worst_guess = min(
            max((v if y == g else 1 + v) for y, v in sub.items()) for g in range(tab.k)
        )
        best = max(best, worst_guess)
    _MEMO[key] = best
    return best


def _bandit(tab: _Tables, V: int) -> int:
    key = (tab.key, "b", V)
    hit = _MEMO.get(key)
    if hit is not None:
        return hit
    best = 0
    for x in range(len(tab.parts)):
        branches = _split(tab, x, V)
        if len(branches) < 2:
            continue
        value = min(max(_bandit(tab, W), 1 + _bandit(tab, V & ~W)) for _, W in branches)
        best = max(best, value)
    _MEMO[key] = best
    return best


def opt_standard(klass, V=None) -> int:
    """Worst-case mistakes under optimal play with full-label feedback.

    ``V`` restricts the class to a version space (bitmask or iterable of
    function indices); the whole class by default.
    """
    tab = _Tables(_as_class(klass))
    return _standard(tab, _as_mask(tab, V))


def opt_bandit(klass, V=None) -> int:
    """Worst-case mistakes under optimal play with yes/no feedback.

    The learner only guesses labels realized in ``V`` at the query; an
    unrealized guess earns a "no" and leaves ``V`` unchanged, so it is dominated.
    """
    tab = _Tables(_as_class(klass))
    return _bandit(tab, _as_mask(tab, V))


def opt_horizon(klass, model: str, horizon: int, V=None) -> int:
    """Finite-horizon game value with no move pruning.

    The adversary may query any point and the learner may guess any label,
    realized or not. With ``horizon >= |V| - 1`` this equals the pruned
    infinite-horizon value; it exists to cross-check the pruning rules.
    """
    if model not in ("standard", "bandit"):
        raise UsageError("model must be 'standard' or 'bandit'")
    tab = _Tables(_as_class(klass))
    memo: dict = {}

    def value(V: int, d: int) -> int:
        if d == 0:
            return 0
        hit = memo.get((V, d))
        if hit is not None:
            return hit
        best = 0
        for x in range(len(tab.parts)):
            branches = dict(_split(tab, x, V))
            guesses = []
            for g in range(tab.k):
                if model == "standard":
                    outcomes = [(y != g) + value(W, d - 1) for y, W in branches.items()]
                else:
                    yes = V & tab.parts[x][g]
                    no = V & ~tab.parts[x][g]
                    outcomes = []
                    if yes:
                        outcomes.append(value(yes, d - 1))
                    if no:
                        outcomes.append(1 + value(no, d - 1))
                guesses.append(max(outcomes))
            best = max(best, min(guesses))
        memo[(V, d)] = best
        return best

    return value(_as_mask(tab, V), horizon)


@dataclass(frozen=True)
class OptValues:
    k: int
    m: int
    n_functions: int
    opt_s: int
    opt_b: int


def solve(klass) -> OptValues:
    explicit = _as_class(klass)
    s = opt_standard(explicit)
    b = opt_bandit(explicit)
    if b < s:
        raise AssertionError(f"opt_b={b} < opt_s={s}")
    return OptValues(explicit.n_labels, explicit.n_points, explicit.n_functions, s, b)


def parse_class_spec(spec: str):
    """``fl:p:n``, ``const:k[:m]`` or a path to a class file."""
    from .hypotheses import constant_class

    parts = spec.split(":")
    try:
        if parts[0] == "fl" and len(parts) == 3:
            return LinearClass(int(parts[1]), int(parts[2]))
        if parts[0] == "const" and len(parts) in (2, 3):
            return constant_class(int(parts[1]), int(parts[2]) if len(parts) == 3 else 1)
    except ValueError as exc:
        raise UsageError(f"bad class spec {spec!r}: {exc}") from None
    try:
        return ExplicitClass.load(spec)
    except OSError as exc:
        raise UsageError(f"cannot read class file {spec!r}: {exc}") from None
