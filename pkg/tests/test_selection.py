import io
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from agghoo.core import ConstantClassifier, Dataset, EmptySetError, FunctionRule, IndexSet, error_count
from agghoo.learners import knn_family
from agghoo.selection import (
    MajorityVoteClassifier, agghoo, cv_select, holdout_risk, holdout_select, inner_training_set,
    majority_vote, score_plan, subagged_holdout, vote,
)
from agghoo.splits import monte_carlo_splits, vfold_splits
from agghoo.synthetic import sample_sigmoid

from conftest import random_dataset


def _brute_holdout(family, data, T):
    val = T.complement()
    best = None
    for G in family:
        f = G.train(data.subset(T))
        wrong = sum(int(f.predict(data.features[i:i + 1])[0] != data.labels[i]) for i in val)
        key = (Fraction(wrong, len(val)), G.id)
        if best is None or key < best[0]:
            best = (key, G, f)
    return best


def test_holdout_matches_exhaustive_argmin():
    data = sample_sigmoid(120, 5)
    family = knn_family(19)
    for seed in range(4):
        T = monte_carlo_splits(120, 0.6, 1, seed).sets[0]
        choice = holdout_select(family, data, T)
        (score, rid), _, _ = _brute_holdout(family, data, T)
        assert choice.rule_id == rid
        assert choice.score == float(score)
        assert choice.train_size == 72
        assert holdout_risk(family[choice.rule_index], data, T) == float(score)


def test_holdout_ties_go_to_smallest_id():
    data = Dataset(np.zeros((6, 1)), np.array([0, 1, 0, 1, 0, 1]), 2)
    family = [FunctionRule(rid, lambda d: ConstantClassifier(0)) for rid in ("b", "a", "c")]
    choice = holdout_select(family, data, IndexSet([0, 1, 2], 6))
    assert choice.rule_id == "a"


def test_family_checks():
    data = sample_sigmoid(20, 0)
    T = IndexSet(range(10), 20)
    with pytest.raises(ValueError, match="empty family"):
        holdout_select([], data, T)
    dup = [FunctionRule("x", lambda d: ConstantClassifier(0))] * 2
    with pytest.raises(ValueError):
        holdout_select(dup, data, T)
    with pytest.raises(EmptySetError):
        holdout_select(knn_family(3), data, IndexSet.full(20))


def test_classifier_is_trained_on_training_rows_only():
    seen = []

    def train(d):
        seen.append(d.n)
        return ConstantClassifier(int(d.labels[0]))

    data = sample_sigmoid(30, 1)
    holdout_select([FunctionRule("r", train)], data, IndexSet(range(12), 30))
    assert seen == [12]


def test_cv_matches_mean_of_holdout_scores():
    data = sample_sigmoid(100, 2)
    family = knn_family(15)
    plan = monte_carlo_splits(100, 0.7, 5, seed=11)
    choice = cv_select(family, data, plan)
    means = []
    for G in family:
        tot = Fraction(0)
        for T in plan:
            f = G.train(data.subset(T))
            e, m = error_count(f, data, T.complement())
            tot += Fraction(e, m)
        means.append((tot / plan.V, G.id))
    best = min(means)
    assert choice.rule_id == best[1]
    assert choice.score == float(best[0])
    # refit on all rows
    ref = family[choice.rule_index].train(data)
    probe = np.random.default_rng(0).random((200, 2))
    assert np.array_equal(choice.classifier.predict(probe), ref.predict(probe))


def test_cv_vfold_runs():
    data = sample_sigmoid(60, 3)
    choice = cv_select(knn_family(9), data, vfold_splits(60, 5, seed=0))
    assert choice.rule_id.startswith("knn-k=")


def test_agghoo_members_are_holdout_winners():
    data = sample_sigmoid(90, 4)
    family = knn_family(11)
    plan = monte_carlo_splits(90, 0.6, 4, seed=7)
    mv = agghoo(family, data, plan)
    assert mv.V == 4
    probe = np.random.default_rng(1).random((300, 2))
    for j, T in enumerate(plan):
        ho = holdout_select(family, data, T)
        assert mv.member_ids[j] == ho.rule_id
        assert np.array_equal(mv.members[j].predict(probe), ho.classifier.predict(probe))


def test_majority_vote_tie_and_identity():
    assert majority_vote([1, 0], 2, None) == 0
    assert majority_vote([2, 1, 2, 1], 3, None) == 1
    assert vote(np.array([[0, 1, 2], [2, 1, 0], [2, 0, 0]]), 3).tolist() == [2, 1, 0]
    f = ConstantClassifier(1)
    mv = MajorityVoteClassifier([f, f, f], 2)
    X = np.zeros((4, 2))
    assert mv.predict(X).tolist() == [1] * 4
    assert mv.votes(X).sum(axis=1).tolist() == [3] * 4


def test_plan_scores_trace():
    data = sample_sigmoid(40, 6)
    scores = score_plan(knn_family(5), data, monte_carlo_splits(40, 0.5, 2, seed=0))
    buf = io.StringIO()
    scores.write_trace(buf)
    recs = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert len(recs) == 2 and set(recs[0]["scores"]) == set(scores.rule_ids)
    assert scores.head(1).V == 1
    with pytest.raises(ValueError):
        score_plan(knn_family(5), data, monte_carlo_splits(41, 0.5, 2, seed=0))


def test_subagged_holdout():
    data = sample_sigmoid(80, 8)
    family = knn_family(7)
    plan = monte_carlo_splits(80, 0.5, 3, seed=2)
    mv = subagged_holdout(family, data, plan, 0.5, seed=4)
    for j, T in enumerate(plan):
        sub = data.subset(T)
        inner = inner_training_set(sub.n, 0.5, 4, j)
        assert len(inner) == 20
        assert mv.member_ids[j] == holdout_select(family, sub, inner).rule_id


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), V=st.integers(1, 9), M=st.integers(2, 5), m=st.integers(1, 8))
def test_vote_is_a_plurality_label(seed, V, M, m):
    preds = np.random.default_rng(seed).integers(0, M, size=(V, m))
    out = vote(preds, M)
    for x in range(m):
        counts = np.bincount(preds[:, x], minlength=M)
        assert counts[out[x]] == counts.max()
        assert out[x] == int(np.flatnonzero(counts == counts.max())[0])


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_v1_equivalences(seed):
    r = np.random.default_rng(seed)
    data = random_dataset(r, 30, grid=4)
    family = knn_family(7)
    plan = monte_carlo_splits(30, 0.6, 1, seed)
    ho = holdout_select(family, data, plan.sets[0])
    mv = agghoo(family, data, plan)
    probe = r.random((100, 2)) * 4
    assert np.array_equal(mv.predict(probe), ho.classifier.predict(probe))
    assert cv_select(family, data, plan).rule_id == ho.rule_id
