"""Command-line interface: ``banditlb {lemma,findu,play,replay,opt,bound}``.

Exit codes: 0 success, 1 search failure, 2 usage error, 3 protocol violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from ._validation import Params, ProtocolViolation, UsageError, is_prime
from .game import FeedbackMode, Transcript, run_game, verify_transcript
from .hypotheses import LinearClass
from . import lemmas
from .opt import parse_class_spec, solve
from .strategies import Lemma4Adversary, lower_bound_rounds, make_adversary, make_learner

MAX_P = 10**4
SWEEP_BUDGET = 3 * 10**6

EXIT_OK, EXIT_SEARCH, EXIT_USAGE, EXIT_PROTOCOL = 0, 1, 2, 3


def _params(args) -> Params:
    if args.p is None or args.n is None:
        raise UsageError("--p and --n are required")
    if args.p > MAX_P:
        raise UsageError(f"p must be <= {MAX_P}")
    return Params(args.p, args.n)


def _nonneg(value: str) -> int:
    v = int(value)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _emit(args, text: str):
    if getattr(args, "out", None) and args.command != "play":
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


# ---------------------------------------------------------------- lemma

_SWEEPS = {
    "marginal": lambda prm, a: lemmas.verify_marginal(prm),
    "conditional": lambda prm, a: lemmas.verify_conditional(prm),
    "falselemma": lambda prm, a: lemmas.verify_false_lemma(prm),
    "covariance": lambda prm, a: lemmas.verify_covariance(prm),
    "jointcount": lambda prm, a: lemmas.verify_joint_count(prm, a.trials or 1000, a.seed),
    "multiples": lambda prm, a: lemmas.verify_multiple_pairs(prm),
}


def _sweep_cost(which: str, params: Params, trials: int) -> int:
    p, n = params.p, params.n
    if which == "marginal":
        return p ** (n + 1)
    if which == "jointcount":
        return trials * p
    if which == "multiples":
        return (p - 1) ** n * p
    return (p - 1) ** (2 * n) * p


def cmd_lemma(args) -> int:
    params = _params(args)
    names = list(_SWEEPS) if args.which == "all" else [args.which]
    for name in names:
        if name in ("conditional", "falselemma", "covariance", "jointcount") and params.n < 2:
            raise UsageError(f"{name} needs n >= 2")
        if _sweep_cost(name, params, args.trials or 1000) > SWEEP_BUDGET:
            raise UsageError(f"{name} sweep at p={params.p}, n={params.n} exceeds the case budget")
    reports = [_SWEEPS[name](params, args) for name in names]
    out = reports[0] if len(reports) == 1 else {"reports": reports}
    _emit(args, _dump(out))
    return EXIT_OK if all(not r["violations"] for r in reports) else EXIT_SEARCH


# ---------------------------------------------------------------- findu


def _load_vectors(path: str, params: Params):
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                rows.append([int(v) for v in line.split()])
    return lemmas.check_coeff_array(rows, params)


def cmd_findu(args) -> int:
    params = _params(args)
    S = _load_vectors(args.S, params) if args.S else lemmas.full_coeff_set(params)
    res = lemmas.find_balanced_u(S, params, args.budget, args.seed, exhaustive=not args.no_exhaustive)
    _emit(args, _dump(res.to_json()))
    return EXIT_OK if res.success else EXIT_SEARCH


# ---------------------------------------------------------------- play / replay


def cmd_play(args) -> int:
    params = _params(args)
    cls = LinearClass(params)
    mode = FeedbackMode(args.mode)
    learner = make_learner(args.learner)
    adversary = make_adversary(args.adversary, args.seed)
    try:
        transcript = run_game(cls, learner, adversary, mode, args.max_rounds)
    except ProtocolViolation as exc:
        _dump_err({"error": "protocol violation", "round": exc.round_index, "message": str(exc)})
        return EXIT_PROTOCOL
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(transcript.to_jsonl(cls))
    ok = verify_transcript(cls, transcript)
    summary = {
        "mistakes": transcript.mistakes,
        "rounds": len(transcript),
        "b_bound": lower_bound_rounds(params).b if params.p >= 3 else None,
        "threshold_reached": adversary.threshold_reached if isinstance(adversary, Lemma4Adversary) else None,
        "verified": ok,
    }
    sys.stdout.write(_dump(summary))
    return EXIT_OK if ok else EXIT_PROTOCOL


def cmd_replay(args) -> int:
    if args.class_spec:
        cls = parse_class_spec(args.class_spec)
    else:
        cls = LinearClass(_params(args))
    with open(args.transcript) as fh:
        transcript = Transcript.from_jsonl(fh.read(), cls, FeedbackMode(args.mode) if args.mode else None)
    ok = verify_transcript(cls, transcript)
    _emit(args, _dump({"mode": transcript.mode.value, "rounds": len(transcript),
                       "mistakes": transcript.mistakes, "verified": ok}))
    return EXIT_OK if ok else EXIT_PROTOCOL


# ---------------------------------------------------------------- opt


def cmd_opt(args) -> int:
    spec = args.class_spec or args.class_opt
    if not spec:
        raise UsageError("a class is required (fl:p:n, const:k or a file path)")
    vals = solve(parse_class_spec(spec))
    _emit(args, _dump({"class": spec, "k": vals.k, "m": vals.m, "opt_s": vals.opt_s, "opt_b": vals.opt_b}))
    return EXIT_OK


# ---------------------------------------------------------------- bound


def _int_range(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


BOUND_FIELDS = ["p", "n", "b", "npl", "ratio"]


def cmd_bound(args) -> int:
    if args.p_range is None or args.n_range is None:
        raise UsageError("--p and --n are required")
    ps, ns = _int_range(args.p_range), _int_range(args.n_range)
    if len(ps) == 1 and not is_prime(ps[0]):
        raise UsageError(f"p={ps[0]} is not prime")
    ps = [p for p in ps if is_prime(p)]
    if any(p > MAX_P for p in ps):
        raise UsageError(f"p must be <= {MAX_P}")
    if any(p < 3 for p in ps):
        raise UsageError("the round bound needs p >= 3")
    rows = []
    for p in ps:
        for n in ns:
            rb = lower_bound_rounds(Params(p, n))
            rows.append({"p": p, "n": n, "b": rb.b, "npl": rb.asymptote, "ratio": rb.ratio})
    if args.format == "json":
        text = _dump(rows)
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=BOUND_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**r, "npl": f"{r['npl']:.6f}", "ratio": f"{r['ratio']:.6f}"})
        text = buf.getvalue()
    _emit(args, text)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _dump_err(obj):
    sys.stderr.write(_dump(obj))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="banditlb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, pn=True):
        if pn:
            sp.add_argument("--p", type=int)
            sp.add_argument("--n", type=int)
        sp.add_argument("--seed", type=_nonneg, default=0)
        sp.add_argument("--out")

    sp = sub.add_parser("lemma", help="exhaustive lemma sweeps")
    common(sp)
    sp.add_argument("--which", default="all", choices=[*_SWEEPS, "all"])
    sp.add_argument("--trials", type=_nonneg, help="random pairs for jointcount (default 1000)")
    sp.set_defaults(func=cmd_lemma)

    sp = sub.add_parser("findu", help="search for a balanced u")
    common(sp)
    sp.add_argument("--budget", type=_nonneg, default=64)
    sp.add_argument("--S", help="file of coefficient vectors, one per line (default: all of {1..p-1}^n)")
    sp.add_argument("--no-exhaustive", action="store_true")
    sp.set_defaults(func=cmd_findu)

    sp = sub.add_parser("play", help="run a game on F_L(p, n)")
    common(sp)
    sp.add_argument("--mode", choices=[m.value for m in FeedbackMode], default="bandit")
    sp.add_argument("--learner", default="plurality")
    sp.add_argument("--adversary", default="lemma4-adversary")
    sp.add_argument("--max-rounds", type=_nonneg, default=10**4)
    sp.set_defaults(func=cmd_play)

    sp = sub.add_parser("replay", help="re-verify a transcript file")
    common(sp)
    sp.add_argument("transcript")
    sp.add_argument("--class", dest="class_spec")
    sp.add_argument("--mode", choices=[m.value for m in FeedbackMode])
    sp.set_defaults(func=cmd_replay)

    sp = sub.add_parser("opt", help="exact opt_s and opt_b")
    common(sp, pn=False)
    sp.add_argument("class_spec", nargs="?")
    sp.add_argument("--class", dest="class_opt")
    sp.set_defaults(func=cmd_opt)

    sp = sub.add_parser("bound", help="explicit round bound table")
    sp.add_argument("--p", dest="p_range")
    sp.add_argument("--n", dest="n_range")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_bound)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        _dump_err({"error": "usage", "message": str(exc)})
        return EXIT_USAGE
    except ProtocolViolation as exc:
        _dump_err({"error": "protocol violation", "round": exc.round_index, "message": str(exc)})
        return EXIT_PROTOCOL


if __name__ == "__main__":
    sys.exit(main())
