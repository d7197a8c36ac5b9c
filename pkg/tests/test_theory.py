import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from agghoo.core import ConstantClassifier, FunctionClassifier
from agghoo.theory import (
    FiniteProblem, check_majority_bounds, check_oracle_inequality, exact_excess, exact_risk,
    fuzz_majority_bounds, majority_labels, oracle_remainder, random_problem,
)


def _problem():
    return FiniteProblem(
        (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)),
        ((Fraction(3, 4), Fraction(1, 4)), (Fraction(1, 3), Fraction(2, 3)), (Fraction(1, 2), Fraction(1, 2))),
        2,
    )


def _risk_by_loops(labels, problem):
    # second implementation: sum over (x, y) of P(x, y) * 1{f(x) != y}
    total = Fraction(0)
    for x, y in product(range(problem.m), range(problem.M)):
        if labels[x] != y:
            total += problem.weights[x] * problem.eta[x][y]
    return total


def test_bayes_has_zero_excess_and_ties_to_smallest():
    p = _problem()
    assert p.bayes() == (0, 1, 0)
    assert exact_excess(p.bayes(), p) == 0


def test_flipping_one_point_costs_weight_times_gap():
    p = _problem()
    f = (1, 1, 0)
    assert exact_excess(f, p) == Fraction(1, 2) * (Fraction(3, 4) - Fraction(1, 4))


def test_exact_risk_matches_double_sum(rng):
    for _ in range(50):
        p = random_problem(rng, 4, 3)
        f = tuple(int(v) for v in rng.integers(0, 3, 4))
        assert exact_risk(f, p) == _risk_by_loops(f, p)


def test_classifier_objects_are_accepted():
    p = _problem()
    assert exact_risk(ConstantClassifier(0), p) == exact_risk((0, 0, 0), p)
    f = FunctionClassifier(lambda X: (X[:, 0] >= 1).astype(int))
    assert exact_risk(f, p) == exact_risk((0, 1, 1), p)


def test_validation():
    with pytest.raises(ValueError):
        FiniteProblem((Fraction(1, 2),), ((Fraction(1), Fraction(0)),), 2)
    with pytest.raises(ValueError):
        check_majority_bounds(_problem(), [])
    with pytest.raises(ValueError):
        exact_risk((0, 1), _problem())


def test_single_voter_bound_is_trivial():
    p = _problem()
    res = check_majority_bounds(p, [(1, 0, 1)])
    assert res.lhs_excess * 2 == res.rhs_excess
    assert res.both_hold


def test_identical_voters_reduce_to_the_voter():
    p = _problem()
    v = (1, 0, 1)
    assert majority_labels([v] * 5, p) == v


def test_small_fuzz_holds():
    s = fuzz_majority_bounds(500, seed=3)
    assert s.all_hold and s.instances == 500
    assert '"all_hold": true' in s.to_json()


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10**9), m=st.integers(1, 5), M=st.integers(2, 4), V=st.integers(1, 6))
def test_majority_bounds_property(seed, m, M, V):
    r = np.random.default_rng(seed)
    p = random_problem(r, m, M)
    voters = [tuple(int(v) for v in r.integers(0, M, m)) for _ in range(V)]
    assert check_majority_bounds(p, voters).both_hold


def test_oracle_remainder_formula():
    rem = oracle_remainder(1, 100, 1.0, 1.0)
    assert rem == pytest.approx(29 * 1 / 100 ** (2 / 3))
    assert oracle_remainder(10, 100, 1.0, 10.0) > rem


def test_oracle_inequality_checker():
    a = np.full(10, 0.02)
    o = np.full(10, 0.01)
    rep = check_oracle_inequality(a, o, family_size=15, p=150, beta=1.0, c=10.0)
    assert rep.holds and rep.slack > 0
    assert rep.remainder == pytest.approx(29 * 10 ** (1 / 3) * math.log(math.e * 15) / 150 ** (2 / 3))
    with pytest.raises(ValueError):
        check_oracle_inequality(a, o, 15, 150, None, 10.0)
    with pytest.raises(ValueError):
        check_oracle_inequality(a, o[:3], 15, 150, 1.0, 10.0)
    bad = check_oracle_inequality(np.full(5, 100.0), np.zeros(5), 1, 10**9, 1.0, 1.0)
    assert not bad.holds
