"""Acceptance criteria 1-11, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s``; a summary line per
criterion is printed at the end of the session.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from agghoo.bench import ExperimentConfig, Setting, combined_se, paired_test, run_experiment
from agghoo.cli import main
from agghoo.core import Dataset
from agghoo.learners import knn_family
from agghoo.learners.cart import cart_grow, cart_prune_path
from agghoo.learners.localpoly import localpoly_eta
from agghoo.selection import MajorityVoteClassifier, agghoo, cv_select, holdout_select
from agghoo.splits import monte_carlo_splits
from agghoo.synthetic import GaussMixProblem, SigmoidProblem, sample_sigmoid
from agghoo.theory import fuzz_majority_bounds

from cart_oracle import exhaustive_prune
from test_localpoly import nadaraya_watson, nw_guard_passes

pytestmark = pytest.mark.acceptance


def _report(criterion, ok, detail):
    print(f"\n[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")


def test_c01_sigmoid_bayes_risk():
    t0 = time.perf_counter()
    value = SigmoidProblem().bayes_risk(2000)
    elapsed = time.perf_counter() - t0
    ok = abs(value - 0.242) <= 0.005 and elapsed < 10
    _report(1, ok, f"bayes risk {value:.5f} (target 0.242 +- 0.005) in {elapsed:.2f}s (< 10s)")
    assert ok


@pytest.mark.parametrize("d", [7, 50])
def test_c02_gaussmix_bayes_risk(d):
    t0 = time.perf_counter()
    value, se = GaussMixProblem(d).bayes_risk(1_000_000, seed=0)
    elapsed = time.perf_counter() - t0
    ok = abs(value - 0.041) <= 0.004 and elapsed < 30
    _report(2, ok, f"d={d}: bayes risk {value:.5f} +- {se:.5f} (target 0.041 +- 0.004) in {elapsed:.2f}s (< 30s)")
    assert ok


def test_c03_majority_vote_bound_fuzz():
    summary = fuzz_majority_bounds(10_000, seed=0)
    ok = summary.all_hold and summary.instances == 10_000
    _report(3, ok, f"{summary.instances - summary.violations}/{summary.instances} instances hold")
    assert ok


def test_c04_degenerate_equivalences():
    data = sample_sigmoid(200, 21)
    family = knn_family(29)
    u = np.linspace(0, 1, 100)
    probe = np.column_stack([a.ravel() for a in np.meshgrid(u, u)])
    assert probe.shape == (10_000, 2)
    mismatches = 0
    for seed in range(5):
        plan = monte_carlo_splits(200, 0.7, 1, seed)
        ho = holdout_select(family, data, plan.sets[0])
        mv = agghoo(family, data, plan)
        mismatches += int((mv.predict(probe) != ho.classifier.predict(probe)).sum())
        assert cv_select(family, data, plan).rule_id == ho.rule_id
        voter = ho.classifier
        same = MajorityVoteClassifier([voter] * 4, 2)
        mismatches += int((same.predict(probe) != voter.predict(probe)).sum())
    _report(4, mismatches == 0, f"{mismatches} pointwise mismatches on a 10^4-point probe grid")
    assert mismatches == 0


def test_c05_cart_pruning_oracle():
    rng = np.random.default_rng(5)
    checked = bad = 0
    for _ in range(50):
        n = int(rng.integers(2, 13))
        X = rng.integers(0, 4, size=(n, 2)).astype(float)
        data = Dataset(X, rng.integers(0, 2, n), 2)
        tree = cart_grow(data)
        path = cart_prune_path(tree, data)
        alphas = list(path.breakpoints[:10])
        alphas += [Fraction(int(k), 120) for k in rng.integers(0, 80, 20 - len(alphas))]
        for a in alphas:
            checked += 1
            bad += path.select(a).leaves != exhaustive_prune(tree, a)
    _report(5, bad == 0, f"{checked - bad}/{checked} (dataset, alpha) pairs match exhaustive search")
    assert bad == 0 and checked == 1000


def test_c06_localpoly_degree_zero_oracle():
    rng = np.random.default_rng(6)
    worst, cases = 0.0, 0
    while cases < 100:
        n, d = int(rng.integers(3, 60)), int(rng.integers(1, 4))
        data = Dataset(rng.random((n, d)), rng.integers(0, 2, n), 2)
        x, h = rng.random(d), float(rng.uniform(0.05, 2.0))
        if not nw_guard_passes(data, x, h):
            continue
        want = nadaraya_watson(data, x, h)
        got = localpoly_eta(0, h, data, x)
        worst = max(worst, abs(got - want) / max(abs(want), 1e-300) if want else abs(got))
        cases += 1
    ok = worst <= 1e-10
    _report(6, ok, f"max relative error {worst:.2e} over {cases} cases (<= 1e-10)")
    assert ok


@pytest.fixture(scope="module")
def knn_runs():
    settings = (Setting("agghoo", 0.7, 10), Setting("cv", 0.7, 10), Setting("holdout", 0.7))
    cfg = ExperimentConfig(problem="sigmoid", family="knn", n=500, test_n=1000, replicates=100,
                           settings=settings, master_seed=0, k_max=29)
    t0 = time.perf_counter()
    report = run_experiment(cfg, threads=8)
    assert not report.failures
    return report, time.perf_counter() - t0


def test_c07_knn_trend(knn_runs):
    report, elapsed = knn_runs
    ag, cv, ho = report.aggregate("agghoo"), report.aggregate("cv"), report.aggregate("holdout")
    test = paired_test(report.values("agghoo"), report.values("holdout"))
    a_ok = ho.mean_excess > ag.mean_excess and test["p_value"] < 0.05
    b_ok = ag.mean_excess <= cv.mean_excess + 2 * combined_se(ag, cv)
    ok = a_ok and b_ok and elapsed < 15 * 60
    _report(7, ok, f"agghoo {ag.mean_excess:.5f}+-{ag.se_excess:.5f}, cv {cv.mean_excess:.5f}+-{cv.se_excess:.5f}, "
                   f"holdout {ho.mean_excess:.5f}+-{ho.se_excess:.5f}; paired p={test['p_value']:.2e}; {elapsed:.0f}s")
    assert ok


def test_c08_oracle_excess(knn_runs):
    report, _ = knn_runs
    o = report.oracle()
    ok = 0.002 <= o.mean_excess <= 0.006
    _report(8, ok, f"oracle excess {o.mean_excess:.5f}+-{o.se_excess:.5f} (band [0.002, 0.006])")
    assert ok


def test_c09_uci_cart_direction():
    settings = (Setting("agghoo", 0.8, 10), Setting("cv", 0.5, 10, "vfold"))
    cfg = ExperimentConfig(problem="uci", family="cart", n=500, replicates=100, settings=settings, master_seed=0)
    report = run_experiment(cfg, threads=8)
    assert not report.failures
    ag, cv, o = report.aggregate("agghoo"), report.aggregate("cv-vfold"), report.oracle()
    gap = cv.mean_risk - ag.mean_risk
    ok = gap >= 0.005 and o.mean_risk <= ag.mean_risk + 2 * ag.se_risk
    _report(9, ok, f"agghoo {ag.mean_risk:.4f}+-{ag.se_risk:.4f}, 10-fold cv {cv.mean_risk:.4f}+-{cv.se_risk:.4f} "
                   f"(gap {gap:.4f} >= 0.005), oracle {o.mean_risk:.4f}")
    assert ok


def test_c10_holdout_factor_two(knn_runs):
    report, _ = knn_runs
    ag, ho = report.aggregate("agghoo"), report.aggregate("holdout")
    rhs = 2 * ho.mean_excess + 4 * combined_se(ag, ho)
    ok = ag.mean_excess <= rhs
    _report(10, ok, f"agghoo {ag.mean_excess:.5f} <= 2*holdout + 4se = {rhs:.5f}")
    assert ok


def test_c11_thread_count_does_not_change_output(tmp_path):
    args = ["bench", "--problem", "sigmoid", "--family", "knn", "--replicates", "8", "--n", "200",
            "--test-n", "300", "--tau-list", "0.5,0.7", "--v-list", "1,5", "--seed", "7"]
    one, eight = tmp_path / "t1.csv", tmp_path / "t8.csv"
    assert main(args + ["--threads", "1", "--out", str(one)]) == 0
    assert main(args + ["--threads", "8", "--out", str(eight)]) == 0
    ok = one.read_bytes() == eight.read_bytes()
    _report(11, ok, f"threads=1 vs threads=8 CSV byte-identical ({one.stat().st_size} bytes)")
    assert ok
