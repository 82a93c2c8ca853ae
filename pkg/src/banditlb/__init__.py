"""Bandit-feedback lower-bound toolkit for online multiclass learning over GF(p)."""

from ._validation import Params, ProtocolViolation, UsageError
from .game import FeedbackMode, Round, Transcript, run_game, verify_transcript
from .hypotheses import ExplicitClass, LinearClass, constant_class, tabulate
from .lemmas import BalancedHasher, find_balanced_u
from .opt import opt_bandit, opt_standard
from .strategies import (
    BasisAdversary,
    Lemma4Adversary,
    PluralityLearner,
    RandomConsistentAdversary,
    RandomLearner,
    SubspaceLearner,
    lower_bound_rounds,
)

__version__ = "0.1.0"
