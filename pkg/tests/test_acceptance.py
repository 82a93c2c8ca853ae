"""Exit criteria, one test per criterion, each at its stated tolerance."""

import itertools
import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from banditlb._validation import Params
from banditlb.game import run_game, verify_transcript
from banditlb.gfp import FieldMatrix, is_multiple_pair, solution_count
from banditlb.hypotheses import LinearClass, constant_class, tabulate
from banditlb.lemmas import (
    bucket_counts,
    conditional_probability,
    exact_covariance,
    exists_balanced_u,
    find_balanced_u,
    full_coeff_set,
    marginal_probability,
    success_frequency,
    within_bound,
)
from banditlb.opt import clear_cache, opt_bandit, opt_standard
from banditlb.strategies import (
    BasisAdversary,
    Lemma4Adversary,
    PluralityLearner,
    RandomConsistentAdversary,
    RandomLearner,
    SubspaceLearner,
    lower_bound_rounds,
)

# frozen from the float-power oracle in test_strategies.bound_oracle:
# (1 - (1 + 2/sqrt(ln 11))/11)^(b-1) * 1000 >= 121 ln 11 holds for b <= 6
B_11_3 = 6


def test_c01_corrected_conditional_law(criterion):
    start = time.perf_counter()
    cases = violations = 0
    for p, n in [(3, 2), (5, 2), (7, 2), (5, 3)]:
        prm = Params(p, n)
        S = list(itertools.product(range(1, p), repeat=n))
        for s in S:
            for t in S:
                if s == t:
                    continue
                mult = is_multiple_pair(s, t, prm)
                for z in range(p):
                    cases += 1
                    got = conditional_probability(s, t, z, prm)
                    if mult:
                        want = Fraction(1) if z == 0 else Fraction(0)
                    else:
                        want = Fraction(1, p)
                    violations += got != want
                    # "= 1/p iff not multiples"
                    violations += (got == Fraction(1, p)) == mult
    elapsed = time.perf_counter() - start
    criterion(
        "C1 corrected-lemma law (p in {3,5,7}, n=2; p=5, n=3)",
        violations == 0 and elapsed < 60,
        f"{cases} cases, {violations} violations, {elapsed:.1f}s",
    )


def test_c02_marginal(criterion):
    cases = violations = 0
    for p in (2, 3, 5):
        for n in (2, 3):
            prm = Params(p, n)
            for x in itertools.product(range(p), repeat=n):
                if not any(x):
                    continue
                for y in range(p):
                    cases += 1
                    violations += marginal_probability(x, y, prm) != Fraction(1, p)
    criterion("C2 marginal = 1/p for x != 0", violations == 0, f"{cases} cases, {violations} violations")


def test_c03_joint_count(criterion):
    p, n = 7, 3
    prm = Params(p, n)
    rng = np.random.default_rng(2024)
    nonmult = mult_cases = violations = 0
    while nonmult < 1000:
        s = tuple(int(v) for v in rng.integers(1, p, n))
        t = tuple(int(v) for v in rng.integers(1, p, n))
        if s == t or is_multiple_pair(s, t, prm):
            continue
        z = int(rng.integers(0, p))
        nonmult += 1
        violations += solution_count(FieldMatrix((s, t), (z, z)), prm) != p ** (n - 2)
        lam = int(rng.integers(2, p))
        t2 = tuple(lam * v % p for v in s)
        for z2 in range(p):
            mult_cases += 1
            want = p ** (n - 1) if z2 == 0 else 0
            violations += solution_count(FieldMatrix((s, t2), (z2, z2)), prm) != want
    criterion(
        "C3 joint-count identity at p=7, n=3",
        violations == 0,
        f"{nonmult} non-multiple pairs, {mult_cases} multiple cases, {violations} violations",
    )


def test_c04_covariance_table(criterion):
    cases = violations = 0
    for p in (3, 5):
        prm = Params(p, 2)
        S = list(itertools.product(range(1, p), repeat=2))
        for s in S:
            for t in S:
                if s == t:
                    continue
                mult = is_multiple_pair(s, t, prm)
                for z in range(p):
                    cases += 1
                    if not mult:
                        want = Fraction(0)
                    elif z:
                        want = Fraction(-1, p * p)
                    else:
                        want = Fraction(1, p) - Fraction(1, p * p)
                    violations += exact_covariance(s, t, z, prm) != want
    criterion("C4 covariance table (p in {3,5}, n=2)", violations == 0, f"{cases} cases, {violations} violations")


def _c05_report() -> dict:
    out = {}
    rng = np.random.default_rng(5)
    for p, n in [(5, 3), (7, 3), (11, 3)]:
        prm = Params(p, n)
        full = full_coeff_set(prm)
        sets = [full] + [full[rng.random(len(full)) < 0.5] for _ in range(100)]
        runs = []
        for i, S in enumerate(sets):
            res = find_balanced_u(S, prm, budget=64, seed=i, exhaustive=False)
            exact = bucket_counts(S, res.u, prm)
            ok = res.success and exact == res.counts and all(
                within_bound(c, len(S), p) for c in exact.values()
            )
            runs.append([list(res.u), res.trials, ok])
        out[f"{p},{n}"] = runs
    prm = Params(5, 2)
    full = full_coeff_set(prm)
    out["5,2 exhaustive"] = [
        exists_balanced_u(full[rng.random(len(full)) < rng.random()], prm) for _ in range(200)
    ]
    return out


def test_c05_balanced_u_exists(criterion):
    rep = _c05_report()
    sampled = [r[2] for k, runs in rep.items() if k != "5,2 exhaustive" for r in runs]
    exhaustive = rep["5,2 exhaustive"]
    criterion(
        "C5 balanced u found (budget 64) and exhaustive existence at (5,2)",
        all(sampled) and all(exhaustive),
        f"{sum(sampled)}/{len(sampled)} sampled searches, {sum(exhaustive)}/{len(exhaustive)} exhaustive scans",
    )


def _c06_report() -> dict:
    prm = Params(5, 3)
    freq = success_frequency(full_coeff_set(prm), prm, trials=2000, seed=6)
    return {"frequency": f"{freq.numerator}/{freq.denominator}"}


def test_c06_success_probability(criterion):
    freq = Fraction(_c06_report()["frequency"])
    criterion("C6 success frequency >= 0.45 (p=5, n=3, 2000 trials)", freq >= Fraction(45, 100), f"{float(freq):.4f}")


def test_c07_exact_opt_values(criterion):
    clear_cache()
    checks = []
    timings = []

    def timed(fn, *a):
        t0 = time.perf_counter()
        v = fn(*a)
        timings.append(time.perf_counter() - t0)
        return v

    s22 = timed(opt_standard, LinearClass(2, 2))
    s32 = timed(opt_standard, LinearClass(3, 2))
    checks += [s22 == 2, s32 == 2]
    classes = [tabulate(LinearClass(2, 2)), tabulate(LinearClass(3, 2))]
    for k in (2, 3, 4):
        c = constant_class(k)
        classes.append(c)
        checks += [timed(opt_standard, c) == 1, timed(opt_bandit, c) == k - 1]
    for c in classes:
        checks.append(timed(opt_bandit, c) >= timed(opt_standard, c))
    criterion(
        "C7 exact opt values",
        all(checks) and max(timings) < 10,
        f"opt_s(F_L(2,2))={s22}, opt_s(F_L(3,2))={s32}, slowest solve {max(timings):.2f}s",
    )


def test_c08_standard_mistake_bound(criterion):
    worst = {}
    exact_basis = True
    for n in (2, 3, 4):
        cls = LinearClass(5, n)
        t = run_game(cls, SubspaceLearner(), BasisAdversary(), "standard", 100)
        exact_basis &= t.mistakes == n
        worst[n] = max(
            run_game(cls, SubspaceLearner(), RandomConsistentAdversary(seed, 3 * n), "standard", 100).mistakes
            for seed in range(1000)
        )
    criterion(
        "C8 subspace learner <= n mistakes (p=5, n in {2,3,4})",
        exact_basis and all(worst[n] <= n for n in worst),
        f"basis exact: {exact_basis}; worst vs random adversaries: {worst}",
    )


def _c09_report() -> dict:
    cls = LinearClass(11, 3)
    b = lower_bound_rounds(11, 3).b
    runs = {}
    learners = {"plurality": PluralityLearner()}
    learners.update({f"random:{s}": RandomLearner(s) for s in range(5)})
    for name, learner in learners.items():
        adv = Lemma4Adversary(seed=9)
        t = run_game(cls, learner, adv, "bandit", 10_000)
        shrink_ok = all(
            within_bound(r.removed, r.size_before, 11) and r.size_after == r.size_before - r.removed
            for r in adv.history
        )
        runs[name] = {
            "mistakes": t.mistakes,
            "sizes": [r.size_after for r in adv.history],
            "shrink_ok": shrink_ok,
            "verified": verify_transcript(cls, t),
            "transcript": t.to_jsonl(cls),
        }
    return {"b": b, "runs": runs}


def test_c09_theorem_lower_bound_run(criterion):
    t0 = time.perf_counter()
    rep = _c09_report()
    elapsed = time.perf_counter() - t0
    runs = rep["runs"].values()
    ok = (
        rep["b"] == B_11_3
        and all(r["mistakes"] >= rep["b"] for r in runs)
        and all(r["shrink_ok"] and r["verified"] for r in runs)
        and elapsed < 60
    )
    criterion(
        "C9 lemma4 adversary at p=11, n=3 forces >= b mistakes",
        ok,
        f"b={rep['b']}, mistakes={[r['mistakes'] for r in runs]}, {elapsed:.1f}s",
    )


def test_c10_determinism(criterion):
    def dump(fn):
        return json.dumps(fn(), sort_keys=True).encode()

    same = {name: dump(fn) == dump(fn) for name, fn in
            [("C5", _c05_report), ("C6", _c06_report), ("C9", _c09_report)]}
    criterion("C10 byte-identical reports for C5, C6, C9", all(same.values()), str(same))
