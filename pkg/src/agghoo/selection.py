"""Hold-out selection, cross-validation selection and aggregated hold-out.

All three procedures are built on the same table of hold-out scores: for
every training set ``T_j`` of a plan and every rule ``G`` of the family,
``G`` is trained on the rows of ``T_j`` and scored on the remaining rows.
:func:`score_plan` computes that table once, so running :func:`agghoo` and
:func:`cv_select` on the same ``(family, plan)`` costs ``V * |family|``
trainings in total (plus one refit for CV).

Tie-breaking is deterministic throughout: among rules with equal score the
smallest ``rule.id`` wins, and a vote tie goes to the smallest label.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import Classifier, Dataset, EmptySetError, IndexSet, LearningRule, error_count
from .splits import DegenerateSplitError, SplitPlan, train_size_for

_SUBAG_STREAM = 0x5AB

__all__ = [
    "HoldoutChoice",
    "CVChoice",
    "MajorityVoteClassifier",
    "PlanScores",
    "holdout_risk",
    "holdout_select",
    "score_plan",
    "cv_select",
    "agghoo",
    "majority_vote",
    "vote",
    "subagged_holdout",
    "inner_training_set",
]


def _check_family(family: Sequence[LearningRule]) -> list[LearningRule]:
    family = list(family)
    if not family:
        raise ValueError("empty family")
    ids = [G.id for G in family]
    if len(set(ids)) != len(ids):
        raise ValueError("rule ids in a family must be distinct")
    return family


def _validation_set(T: IndexSet) -> IndexSet:
    try:
        return T.complement()
    except EmptySetError:
        raise EmptySetError("empty validation set") from None


def _argmin(scores: Sequence[Fraction], family: Sequence[LearningRule]) -> int:
    return min(range(len(family)), key=lambda g: (scores[g], family[g].id))


@dataclass(frozen=True)
class HoldoutChoice:
    """Winner of hold-out selection on one training set.

    ``classifier`` is the winner trained on the training rows only.
    ``scores`` lists the hold-out risk of every rule in family order.
    """

    rule_index: int
    rule_id: str
    classifier: Classifier
    score: float
    scores: tuple[float, ...]
    train_size: int


@dataclass(frozen=True)
class CVChoice:
    rule_index: int
    rule_id: str
    classifier: Classifier
    score: float
    scores: tuple[float, ...]


class MajorityVoteClassifier(Classifier):
    """Majority vote among trained classifiers; ties go to the smallest label."""

    def __init__(self, members: Sequence[Classifier], class_count: int, member_ids: Sequence[str] = ()):
        members = tuple(members)
        if not members:
            raise ValueError("majority vote needs at least one member")
        self.members = members
        self.class_count = int(class_count)
        self.member_ids = tuple(member_ids)

    @property
    def V(self) -> int:
        return len(self.members)

    def votes(self, X) -> np.ndarray:
        """Vote counts, shape ``(m, class_count)``; each row sums to ``V``."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        preds = np.stack([f.predict(X) for f in self.members])
        return _count_votes(preds, self.class_count)

    def predict(self, X):
        # argmax returns the first maximum, i.e. the smallest label
        return np.argmax(self.votes(X), axis=1).astype(np.int64)

    def __repr__(self):
        return f"MajorityVoteClassifier(V={self.V}, M={self.class_count})"


def _count_votes(preds: np.ndarray, M: int) -> np.ndarray:
    preds = np.asarray(preds, dtype=np.int64)
    if preds.ndim == 1:
        preds = preds[:, None]
    V, m = preds.shape
    if preds.size and (preds.min() < 0 or preds.max() >= M):
        raise ValueError(f"votes must lie in {{0, ..., {M - 1}}}")
    counts = np.zeros((m, M), dtype=np.int64)
    for row in preds:
        counts[np.arange(m), row] += 1
    return counts


def vote(predictions, M: int) -> np.ndarray:
    """Column-wise majority vote over a ``(V, m)`` array of predicted labels."""
    preds = np.asarray(predictions, dtype=np.int64)
    if preds.shape[0] == 0:
        raise ValueError("majority vote needs at least one member")
    return np.argmax(_count_votes(preds, M), axis=1).astype(np.int64)


def majority_vote(members, M: int, x) -> int:
    """Majority label among ``members`` at a single point ``x``.

    ``members`` may be classifiers or plain labels (the votes themselves).

    >>> majority_vote([0, 1], 2, None)
    0
    >>> majority_vote([2, 2, 1, 0, 2], 3, None)
    2
    """
    members = list(members)
    if not members:
        raise ValueError("majority vote needs at least one member")
    if isinstance(members[0], Classifier):
        labels = [f.predict_one(x) for f in members]
    else:
        labels = [int(v) for v in members]
    counts = np.bincount(labels, minlength=M)
    if counts.shape[0] > M:
        raise ValueError(f"votes must lie in {{0, ..., {M - 1}}}")
    return int(np.argmax(counts))


def holdout_risk(G: LearningRule, data: Dataset, T: IndexSet) -> float:
    """Train ``G`` on the rows of ``T``; misclassification rate on the other rows."""
    val = _validation_set(T)
    f = G.train(data.subset(T))
    errors, size = error_count(f, data, val)
    return errors / size


def holdout_select(family: Sequence[LearningRule], data: Dataset, T: IndexSet) -> HoldoutChoice:
    """Pick the rule with the smallest hold-out risk on ``T``.

    The returned classifier is the one trained on ``T``; it is never refit
    on the full sample.
    """
    family = _check_family(family)
    val = _validation_set(T)
    train = data.subset(T)
    fitted, scores = [], []
    for G in family:
        f = G.train(train)
        errors, size = error_count(f, data, val)
        fitted.append(f)
        scores.append(Fraction(errors, size))
    g = _argmin(scores, family)
    return HoldoutChoice(
        rule_index=g,
        rule_id=family[g].id,
        classifier=fitted[g],
        score=float(scores[g]),
        scores=tuple(float(s) for s in scores),
        train_size=len(T),
    )


@dataclass(frozen=True, eq=False)
class PlanScores:
    """Hold-out scores of a family over every training set of a plan.

    ``errors[j, g]`` is the number of validation errors of rule ``g``
    trained on ``T_j``; ``val_sizes[j] = n - |T_j|``.
    """

    rule_ids: tuple[str, ...]
    errors: np.ndarray
    val_sizes: tuple[int, ...]
    classifiers: tuple[tuple[Classifier, ...], ...]
    train_sizes: tuple[int, ...]

    @property
    def V(self) -> int:
        return len(self.val_sizes)

    def head(self, V: int) -> "PlanScores":
        """The table restricted to the first ``V`` training sets."""
        if not 1 <= V <= self.V:
            raise ValueError(f"V must lie in [1, {self.V}]")
        errors = self.errors[:V].copy()
        errors.setflags(write=False)
        return PlanScores(self.rule_ids, errors, self.val_sizes[:V],
                          self.classifiers[:V], self.train_sizes[:V])

    def holdout_fraction(self, j: int, g: int) -> Fraction:
        return Fraction(int(self.errors[j, g]), self.val_sizes[j])

    def holdout_scores(self, j: int) -> list[Fraction]:
        return [self.holdout_fraction(j, g) for g in range(len(self.rule_ids))]

    def cv_scores(self) -> list[Fraction]:
        return [
            sum((self.holdout_fraction(j, g) for j in range(self.V)), Fraction(0)) / self.V
            for g in range(len(self.rule_ids))
        ]

    def winner(self, j: int) -> int:
        scores = self.holdout_scores(j)
        return min(range(len(scores)), key=lambda g: (scores[g], self.rule_ids[g]))

    def holdout_choice(self, j: int) -> HoldoutChoice:
        g = self.winner(j)
        scores = self.holdout_scores(j)
        return HoldoutChoice(
            rule_index=g,
            rule_id=self.rule_ids[g],
            classifier=self.classifiers[j][g],
            score=float(scores[g]),
            scores=tuple(float(s) for s in scores),
            train_size=self.train_sizes[j],
        )

    def trace_records(self) -> list[dict]:
        out = []
        for j in range(self.V):
            scores = self.holdout_scores(j)
            out.append({
                "split": j,
                "train_size": self.train_sizes[j],
                "scores": {rid: float(s) for rid, s in zip(self.rule_ids, scores)},
                "winner": self.rule_ids[self.winner(j)],
            })
        return out

    def write_trace(self, fp) -> None:
        """One JSON object per split: scored family and winner id."""
        for rec in self.trace_records():
            fp.write(json.dumps(rec, sort_keys=True) + "\n")


def score_plan(family: Sequence[LearningRule], data: Dataset, plan: SplitPlan) -> PlanScores:
    """Train every rule on every training set of ``plan`` and score it on the complement."""
    family = _check_family(family)
    if plan.n != data.n:
        raise ValueError(f"plan built for n={plan.n}, data has n={data.n}")
    errors = np.zeros((plan.V, len(family)), dtype=np.int64)
    val_sizes, fitted = [], []
    for j, T in enumerate(plan.sets):
        val = _validation_set(T)
        train = data.subset(T)
        row = []
        for g, G in enumerate(family):
            f = G.train(train)
            errors[j, g], _ = error_count(f, data, val)
            row.append(f)
        val_sizes.append(len(val))
        fitted.append(tuple(row))
    errors.setflags(write=False)
    return PlanScores(
        rule_ids=tuple(G.id for G in family),
        errors=errors,
        val_sizes=tuple(val_sizes),
        classifiers=tuple(fitted),
        train_sizes=tuple(plan.train_sizes),
    )


def cv_select(family, data: Dataset, plan: SplitPlan, scores: PlanScores | None = None,
              fitted: dict | None = None) -> CVChoice:
    """Cross-validation selection; the winner is retrained on all ``n`` rows.

    ``scores`` reuses a table from :func:`score_plan`; ``fitted`` maps rule
    ids to classifiers already trained on the full sample, for callers that
    have them cached.
    """
    family = _check_family(family)
    if scores is None:
        scores = score_plan(family, data, plan)
    cv = scores.cv_scores()
    g = _argmin(cv, family)
    clf = (fitted or {}).get(family[g].id)
    if clf is None:
        clf = family[g].train(data)
    return CVChoice(
        rule_index=g,
        rule_id=family[g].id,
        classifier=clf,
        score=float(cv[g]),
        scores=tuple(float(s) for s in cv),
    )


def agghoo(family, data: Dataset, plan: SplitPlan, scores: PlanScores | None = None) -> MajorityVoteClassifier:
    """Aggregated hold-out: majority vote of the hold-out winners of each ``T_j``.

    Each member is the winner trained on its own training set ``T_j``.
    """
    family = _check_family(family)
    if scores is None:
        scores = score_plan(family, data, plan)
    winners = [scores.winner(j) for j in range(scores.V)]
    return MajorityVoteClassifier(
        [scores.classifiers[j][g] for j, g in enumerate(winners)],
        data.class_count,
        member_ids=[scores.rule_ids[g] for g in winners],
    )


def inner_training_set(m: int, inner_tau: float, seed: int, j: int) -> IndexSet:
    """Inner hold-out training set for the ``j``-th subsample (size ``m``) of subagging."""
    size = train_size_for(m, inner_tau)
    if size < 1 or size > m - 1:
        raise DegenerateSplitError("degenerate inner split")
    rng = np.random.default_rng([seed, j, _SUBAG_STREAM])
    return IndexSet(rng.choice(m, size=size, replace=False), m)


def subagged_holdout(family, data: Dataset, plan: SplitPlan, inner_tau: float, seed: int) -> MajorityVoteClassifier:
    """Subagging applied to hold-out selection.

    Each subsample ``D^{T_j}`` is split again into an inner training part of
    size ``floor(inner_tau * |T_j|)`` and an inner validation part; the
    member is the hold-out winner trained on the inner training part only.
    """
    family = _check_family(family)
    members, ids = [], []
    for j, T in enumerate(plan.sets):
        sub = data.subset(T)
        inner = inner_training_set(sub.n, inner_tau, seed, j)
        choice = holdout_select(family, sub, inner)
        members.append(choice.classifier)
        ids.append(choice.rule_id)
    return MajorityVoteClassifier(members, data.class_count, member_ids=ids)
