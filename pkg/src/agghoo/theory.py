"""Exact and Monte-Carlo checks of the guarantees for majority votes and Agghoo.

On a finite feature space every risk is a finite weighted sum, so the two
majority-vote inequalities

    excess(mv) <= (M / V) * sum_i excess(f_i)
    risk(mv)   <= (2 / V) * sum_i risk(f_i)

can be checked in exact rational arithmetic.  A classifier on the support
``{x_0, ..., x_{m-1}}`` is represented by the tuple of its labels.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import Classifier, Dataset, excess_risk_estimate
from .selection import majority_vote


@dataclass(frozen=True)
class FiniteProblem:
    """Distribution on ``{x_0..x_{m-1}} x {0..M-1}``.

    ``weights[x]`` is P(X = x_x); ``eta[x][y]`` is P(Y = y | X = x_x).
    """

    weights: tuple[Fraction, ...]
    eta: tuple[tuple[Fraction, ...], ...]
    M: int

    def __post_init__(self):
        w = tuple(Fraction(v) for v in self.weights)
        eta = tuple(tuple(Fraction(v) for v in row) for row in self.eta)
        if sum(w) != 1 or any(v < 0 for v in w):
            raise ValueError("weights must be a probability vector")
        if len(eta) != len(w):
            raise ValueError("one row of conditional probabilities per support point")
        for row in eta:
            if len(row) != self.M or sum(row) != 1 or any(v < 0 for v in row):
                raise ValueError("each conditional row must be a probability vector over M labels")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "eta", eta)

    @property
    def m(self) -> int:
        return len(self.weights)

    def bayes(self) -> tuple[int, ...]:
        """Pointwise argmax of ``eta``; ties to the smallest label."""
        return tuple(max(range(self.M), key=lambda y: (row[y], -y)) for row in self.eta)


def _labels(f, problem: FiniteProblem) -> tuple[int, ...]:
    if isinstance(f, Classifier):
        return tuple(int(v) for v in f.predict(np.arange(problem.m, dtype=np.float64)[:, None]))
    labels = tuple(int(v) for v in f)
    if len(labels) != problem.m:
        raise ValueError("classifier must label every support point")
    return labels


def exact_risk(f, problem: FiniteProblem) -> Fraction:
    """``R(f) = sum_x w(x) (1 - eta_{f(x)}(x))``."""
    labels = _labels(f, problem)
    return sum(
        (w * (1 - row[y]) for w, row, y in zip(problem.weights, problem.eta, labels)),
        Fraction(0),
    )


def exact_excess(f, problem: FiniteProblem) -> Fraction:
    return exact_risk(f, problem) - exact_risk(problem.bayes(), problem)


@dataclass(frozen=True)
class MajorityBoundCheck:
    lhs_excess: Fraction
    rhs_excess: Fraction
    lhs_risk: Fraction
    rhs_risk: Fraction
    both_hold: bool


def majority_labels(voters: Sequence, problem: FiniteProblem) -> tuple[int, ...]:
    cols = [_labels(f, problem) for f in voters]
    return tuple(majority_vote([c[x] for c in cols], problem.M, None) for x in range(problem.m))


def check_majority_bounds(problem: FiniteProblem, voters: Sequence) -> MajorityBoundCheck:
    """Evaluate both majority-vote inequalities exactly for one instance."""
    voters = list(voters)
    if not voters:
        raise ValueError("need at least one voter")
    V = len(voters)
    mv = majority_labels(voters, problem)
    lhs_excess = exact_excess(mv, problem)
    rhs_excess = Fraction(problem.M, V) * sum((exact_excess(f, problem) for f in voters), Fraction(0))
    lhs_risk = exact_risk(mv, problem)
    rhs_risk = Fraction(2, V) * sum((exact_risk(f, problem) for f in voters), Fraction(0))
    return MajorityBoundCheck(
        lhs_excess, rhs_excess, lhs_risk, rhs_risk,
        both_hold=(lhs_excess <= rhs_excess and lhs_risk <= rhs_risk),
    )


def random_problem(rng: np.random.Generator, m: int, M: int, denom: int = 12) -> FiniteProblem:
    """Random rational problem; small denominators make exact ties in ``eta`` common."""
    w = rng.integers(1, denom + 1, size=m)
    rows = []
    for _ in range(m):
        r = rng.integers(0, denom + 1, size=M)
        if r.sum() == 0:
            r[rng.integers(M)] = 1
        rows.append(tuple(Fraction(int(v), int(r.sum())) for v in r))
    return FiniteProblem(tuple(Fraction(int(v), int(w.sum())) for v in w), tuple(rows), M)


@dataclass
class FuzzSummary:
    instances: int
    violations: int
    seed: int
    failures: list = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return self.violations == 0

    def to_json(self) -> str:
        return json.dumps({
            "check": "majority-vote bounds",
            "instances": self.instances,
            "violations": self.violations,
            "all_hold": self.all_hold,
            "seed": self.seed,
            "failures": self.failures[:10],
        }, sort_keys=True)


def fuzz_majority_bounds(sweeps: int = 10_000, seed: int = 0, max_m: int = 6, max_M: int = 4,
                         max_V: int = 7) -> FuzzSummary:
    """Random ``(problem, voters)`` instances; every one must satisfy both bounds."""
    rng = np.random.default_rng(seed)
    bad = []
    for i in range(sweeps):
        m = int(rng.integers(1, max_m + 1))
        M = int(rng.integers(2, max_M + 1))
        V = int(rng.integers(1, max_V + 1))
        problem = random_problem(rng, m, M)
        voters = [tuple(int(v) for v in rng.integers(0, M, size=m)) for _ in range(V)]
        res = check_majority_bounds(problem, voters)
        if not res.both_hold:
            bad.append({"instance": i, "m": m, "M": M, "V": V, "voters": voters,
                        "lhs_excess": str(res.lhs_excess), "rhs_excess": str(res.rhs_excess),
                        "lhs_risk": str(res.lhs_risk), "rhs_risk": str(res.rhs_risk)})
    return FuzzSummary(sweeps, len(bad), seed, bad)


def subsample_oracle_excess(family, data: Dataset, T, bayes: Classifier, test: Dataset) -> float:
    """Best test-estimated excess risk over the family, each rule trained on ``D^T`` only."""
    family = list(family)
    if not family:
        raise ValueError("empty family")
    sub = data.subset(T)
    return min(excess_risk_estimate(G.train(sub), bayes, test) for G in family)


@dataclass(frozen=True)
class OracleBoundReport:
    replicates: int
    lhs: float
    lhs_se: float
    oracle: float
    oracle_se: float
    remainder: float
    rhs: float
    slack: float
    holds: bool
    params: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def oracle_remainder(family_size: int, p: int, beta: float, c: float) -> float:
    """``29 c^(1/(beta+2)) log(e |G|) / p^((beta+1)/(beta+2))``."""
    return 29.0 * c ** (1.0 / (beta + 2.0)) * math.log(math.e * family_size) / p ** ((beta + 1.0) / (beta + 2.0))


def check_oracle_inequality(agghoo_excess, oracle_excess, family_size: int, p: int,
                         beta: float, c: float) -> OracleBoundReport:
    """Monte-Carlo check of the Agghoo oracle inequality under the margin condition.

    ``agghoo_excess`` and ``oracle_excess`` are per-replicate excess risks;
    the oracle must be the best rule trained on ``n - p`` rows (see
    :func:`subsample_oracle_excess`).  ``beta`` and ``c`` describe the
    distribution and are supplied, never fitted.  The bound is reported to
    hold when ``mean(agghoo) <= 3 mean(oracle) + remainder`` up to four
    combined standard errors.
    """
    if family_size is None or p is None or beta is None or c is None:
        raise ValueError("family_size, p, beta and c are all required")
    if family_size < 1 or p < 1 or beta < 0 or c < 1:
        raise ValueError("need family_size >= 1, p >= 1, beta >= 0, c >= 1")
    a = np.asarray(agghoo_excess, dtype=np.float64)
    o = np.asarray(oracle_excess, dtype=np.float64)
    if a.size == 0 or a.shape != o.shape:
        raise ValueError("need matching, non-empty per-replicate estimates")
    R = a.size

    def se(v):
        return float(v.std(ddof=1) / math.sqrt(R)) if R > 1 else 0.0

    lhs, oracle = float(a.mean()), float(o.mean())
    rem = oracle_remainder(family_size, p, beta, c)
    rhs = 3.0 * oracle + rem
    combined = math.sqrt(se(a) ** 2 + (3.0 * se(o)) ** 2)
    return OracleBoundReport(
        replicates=R, lhs=lhs, lhs_se=se(a), oracle=oracle, oracle_se=se(o),
        remainder=rem, rhs=rhs, slack=rhs - lhs,
        holds=lhs <= rhs + 4.0 * combined,
        params={"family_size": family_size, "p": p, "beta": beta, "c": c},
    )
