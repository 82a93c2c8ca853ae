"""Online mistake-bound protocol for standard and bandit feedback.

A learner exposes ``start(cls, mode)``, ``act(x) -> label`` and
``observe(round)``. An adversary exposes ``start(cls, mode)``,
``query() -> x or None`` (``None`` ends the game), ``respond(x, guess) ->
feedback`` and ``observe(round)``. Feedback is an ``int`` label in the
standard model and a ``bool`` ("yes"/"no") in the bandit model.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ._validation import ProtocolViolation, UsageError
from .hypotheses import Constraint, consistent_mask


class FeedbackMode(str, enum.Enum):
    STANDARD = "standard"
    BANDIT = "bandit"


@dataclass(frozen=True)
class Round:
    query: object
    guess: int
    feedback: int | bool

    def constraint(self) -> Constraint:
        if isinstance(self.feedback, bool):
            return Constraint(self.query, self.guess, self.feedback)
        return Constraint(self.query, self.feedback, True)

    @property
    def mistake(self) -> bool:
        if isinstance(self.feedback, bool):
            return not self.feedback
        return self.guess != self.feedback


@dataclass
class Transcript:
    mode: FeedbackMode
    rounds: list[Round] = field(default_factory=list)

    @property
    def mistakes(self) -> int:
        return sum(r.mistake for r in self.rounds)

    def __len__(self):
        return len(self.rounds)

    def constraints(self) -> list[Constraint]:
        return [r.constraint() for r in self.rounds]

    def to_jsonl(self, cls) -> str:
        lines = []
        for t, r in enumerate(self.rounds, start=1):
            fb = {"ok": bool(r.feedback)} if self.mode is FeedbackMode.BANDIT else {"label": int(r.feedback)}
            rec = {"t": t, "x": cls.point_to_json(r.query), "guess": int(r.guess), "feedback": fb}
            lines.append(json.dumps(rec))
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_jsonl(cls_, text: str, cls, mode: FeedbackMode | None = None) -> "Transcript":
        rounds = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("t") != len(rounds) + 1:
                raise UsageError(f"line {lineno}: expected t={len(rounds) + 1}")
            fb = rec["feedback"]
            if "ok" in fb:
                rmode, value = FeedbackMode.BANDIT, bool(fb["ok"])
            elif "label" in fb:
                rmode, value = FeedbackMode.STANDARD, int(fb["label"])
            else:
                raise UsageError(f"line {lineno}: feedback needs 'ok' or 'label'")
            if mode is None:
                mode = rmode
            elif rmode is not mode:
                raise UsageError(f"line {lineno}: feedback kind does not match {mode.value} mode")
            rounds.append(Round(cls.point_from_json(rec["x"]), int(rec["guess"]), value))
        if mode is None:
            mode = FeedbackMode.STANDARD
        return cls_(FeedbackMode(mode), rounds)


def _check_feedback(fb, mode: FeedbackMode, k: int, t: int):
    if mode is FeedbackMode.BANDIT:
        if not isinstance(fb, (bool, np.bool_)):
            raise ProtocolViolation(f"round {t}: bandit feedback must be yes/no, got {fb!r}", t)
        return bool(fb)
    if isinstance(fb, (bool, np.bool_)) or not isinstance(fb, (int, np.integer)):
        raise ProtocolViolation(f"round {t}: standard feedback must be a label, got {fb!r}", t)
    if not 0 <= fb < k:
        raise ProtocolViolation(f"round {t}: label {fb} outside [0, {k})", t)
    return int(fb)


def run_game(cls, learner, adversary, mode: FeedbackMode, max_rounds: int) -> Transcript:
    """Play up to ``max_rounds`` rounds and return the transcript.

    The adversary sees the guess before answering. After each answer the
    engine checks that some function in ``cls`` is still consistent with
    every answer so far and raises :class:`ProtocolViolation` otherwise.
    """
    mode = FeedbackMode(mode)
    if max_rounds < 0:
        raise UsageError("max_rounds must be >= 0")
    learner.start(cls, mode)
    adversary.start(cls, mode)
    transcript = Transcript(mode)
    alive = np.ones(cls.n_functions, dtype=bool)
    k = cls.n_labels
    for t in range(1, max_rounds + 1):
        x = adversary.query()
        if x is None:
            break
        try:
            x = cls.check_point(x)
        except UsageError as exc:
            raise ProtocolViolation(f"round {t}: bad query: {exc}", t) from exc
        guess = learner.act(x)
        if isinstance(guess, (bool, np.bool_)) or not isinstance(guess, (int, np.integer)) or not 0 <= guess < k:
            raise ProtocolViolation(f"round {t}: learner guessed invalid label {guess!r}", t)
        guess = int(guess)
        fb = _check_feedback(adversary.respond(x, guess), mode, k, t)
        rnd = Round(x, guess, fb)
        c = rnd.constraint()
        labels = cls.labels_at(x)
        alive &= (labels == c.label) if c.equal else (labels != c.label)
        if not alive.any():
            raise ProtocolViolation(f"round {t}: feedback is inconsistent with every function", t)
        transcript.rounds.append(rnd)
        learner.observe(rnd)
        adversary.observe(rnd)
    return transcript


def verify_transcript(cls, transcript: Transcript) -> bool:
    """True iff some function of ``cls`` agrees with every answer in ``transcript``."""
    return bool(consistent_mask(cls, transcript.constraints()).any())


def replay_rounds(cls, rounds: Iterable[Round]) -> list[int]:
    """Size of the consistent set after each round."""
    alive = np.ones(cls.n_functions, dtype=bool)
    sizes = []
    for r in rounds:
        c = r.constraint()
        labels = cls.labels_at(r.query)
        alive &= (labels == c.label) if c.equal else (labels != c.label)
        sizes.append(int(alive.sum()))
    return sizes
