"""Finite multiclass hypothesis classes.

Two concrete classes share one small interface used by the game engine and
the exact solver:

* ``n_functions`` and ``n_labels`` (``k``),
* ``points()``, the domain in canonical order,
* ``labels_at(x)``, the label of every function at ``x`` as an int array,
* ``point_to_json`` / ``point_from_json`` for transcript serialization.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from ._validation import Params, UsageError, check_params, check_vector
from .gfp import dot_mod

#: Cap on ``p**n`` for classes whose functions are materialized.
MAX_FUNCTIONS = 10**6
#: Cap on table entries produced by :func:`tabulate`.
TABLE_BUDGET = 10**6


def lex_vectors(params: Params) -> np.ndarray:
    """All of ``{0..p-1}^n`` in lexicographic order, leftmost coordinate most significant."""
    return np.array(list(itertools.product(range(params.p), repeat=params.n)), dtype=np.int64)


def nonzero_vectors(params: Params) -> np.ndarray:
    """All of ``{1..p-1}^n`` in lexicographic order."""
    return np.array(
        list(itertools.product(range(1, params.p), repeat=params.n)), dtype=np.int64
    ).reshape(-1, params.n)


def eval_linear(a: Sequence[int], x: Sequence[int], params: Params) -> int:
    """``f_a(x) = a . x mod p``."""
    return dot_mod(a, x, params)


class LinearClass:
    """The class of linear functionals ``f_a(x) = a . x mod p`` over ``{0..p-1}^n``.

    Function ``i`` is the ``i``-th coefficient vector in lexicographic order,
    and the domain is enumerated the same way.
    """

    def __init__(self, p, n=None):
        self.params = check_params(p, n)

    def __repr__(self):
        return f"LinearClass(p={self.params.p}, n={self.params.n})"

    @property
    def n_labels(self) -> int:
        return self.params.p

    @property
    def n_functions(self) -> int:
        return self.params.p ** self.params.n

    @property
    def key(self):
        return ("linear", self.params.p, self.params.n)

    @cached_property
    def coeffs(self) -> np.ndarray:
        if self.n_functions > MAX_FUNCTIONS:
            raise UsageError(
                f"F_L({self.params.p},{self.params.n}) has {self.n_functions} functions, "
                f"more than the cap {MAX_FUNCTIONS}"
            )
        return lex_vectors(self.params)

    def points(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in row) for row in lex_vectors(self.params)]

    def check_point(self, x) -> tuple[int, ...]:
        return check_vector(x, self.params)

    def labels_at(self, x) -> np.ndarray:
        x = np.asarray(self.check_point(x), dtype=np.int64)
        return (self.coeffs @ x) % self.params.p

    def function_index(self, a) -> int:
        idx = 0
        for v in check_vector(a, self.params, "a"):
            idx = idx * self.params.p + v
        return idx

    def point_to_json(self, x) -> list[int]:
        return [int(v) for v in x]

    def point_from_json(self, obj) -> tuple[int, ...]:
        return self.check_point(obj)


class ExplicitClass:
    """A class given as a dense label table.

    Parameters
    ----------
    table : array-like of shape (n_functions, n_points)
        ``table[i, j]`` is the label of function ``i`` at point ``j``.
    n_labels : int
        Label count ``k``; every label must be below it.
    domain : sequence, optional
        Point identifiers; defaults to ``0..n_points-1``. Game queries always
        use the point *index*.
    """

    def __init__(self, table, n_labels: int, domain: Sequence | None = None):
        table = np.asarray(table, dtype=np.int64)
        if table.ndim != 2:
            raise UsageError("table must be 2-dimensional")
        if n_labels < 1 or n_labels > 255:
            raise UsageError("label count must be in 1..255")
        if table.size and (table.min() < 0 or table.max() >= n_labels):
            raise UsageError(f"labels must lie in [0, {n_labels})")
        if len(np.unique(table, axis=0)) != len(table):
            raise UsageError("functions must be pairwise distinct")
        self.table = table
        self.table.setflags(write=False)
        self._n_labels = int(n_labels)
        self.domain = list(domain) if domain is not None else list(range(table.shape[1]))
        if len(self.domain) != table.shape[1]:
            raise UsageError("domain length disagrees with table width")

    def __repr__(self):
        return f"ExplicitClass(k={self.n_labels}, functions={self.n_functions}, points={self.n_points})"

    @property
    def n_labels(self) -> int:
        return self._n_labels

    @property
    def n_functions(self) -> int:
        return self.table.shape[0]

    @property
    def n_points(self) -> int:
        return self.table.shape[1]

    @cached_property
    def key(self):
        return ("explicit", self.n_labels, self.table.shape, self.table.tobytes())

    def points(self) -> list[int]:
        return list(range(self.n_points))

    def check_point(self, x) -> int:
        if isinstance(x, (list, tuple)) and len(x) == 1:
            x = x[0]
        x = int(x)
        if not 0 <= x < self.n_points:
            raise UsageError(f"point index {x} outside [0, {self.n_points})")
        return x

    def labels_at(self, x) -> np.ndarray:
        return self.table[:, self.check_point(x)]

    def point_to_json(self, x) -> list[int]:
        return [int(x)]

    def point_from_json(self, obj) -> int:
        return self.check_point(obj)

    # text format: "k m" header, then one line of m labels per function
    def dumps(self) -> str:
        lines = [f"{self.n_labels} {self.n_points}"]
        lines += [" ".join(str(int(v)) for v in row) for row in self.table]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ExplicitClass":
        lines = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not lines or len(lines[0]) != 2:
            raise UsageError("class file must start with a 'k m' header line")
        k, m = (int(v) for v in lines[0])
        rows = [[int(v) for v in ln] for ln in lines[1:]]
        if any(len(r) != m for r in rows):
            raise UsageError(f"every function line must have {m} labels")
        return cls(np.array(rows, dtype=np.int64).reshape(len(rows), m), k)

    @classmethod
    def load(cls, path) -> "ExplicitClass":
        with open(path) as fh:
            return cls.loads(fh.read())

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())

    def restrict(self, indices: Iterable[int]) -> "ExplicitClass":
        idx = sorted(set(int(i) for i in indices))
        return ExplicitClass(self.table[idx], self.n_labels, self.domain)


def constant_class(k: int, n_points: int = 1) -> ExplicitClass:
    """The ``k`` constant functions over ``n_points`` points."""
    return ExplicitClass(np.repeat(np.arange(k)[:, None], n_points, axis=1), k)


def tabulate(cls: LinearClass, budget: int = TABLE_BUDGET) -> ExplicitClass:
    """Materialize ``F_L(p, n)`` as an :class:`ExplicitClass`."""
    size = cls.n_functions * cls.n_functions
    if size > budget:
        raise UsageError(f"table would have {size} entries, budget is {budget}")
    pts = lex_vectors(cls.params)
    table = (pts @ pts.T) % cls.params.p
    return ExplicitClass(table, cls.params.p, [tuple(int(v) for v in r) for r in pts])


class Constraint(NamedTuple):
    """Feedback constraint at one point: ``f(x) == label`` or ``f(x) != label``."""

    point: object
    label: int
    equal: bool = True


def consistent_mask(cls, history: Iterable[Constraint]) -> np.ndarray:
    mask = np.ones(cls.n_functions, dtype=bool)
    for c in history:
        labels = cls.labels_at(c.point)
        mask &= (labels == c.label) if c.equal else (labels != c.label)
    return mask


def consistent_subset(cls, history: Iterable[Constraint]) -> frozenset[int]:
    """Indices of the functions satisfying every constraint in ``history``."""
    return frozenset(int(i) for i in np.flatnonzero(consistent_mask(cls, history)))
