"""Replicated experiments comparing hold-out, CV, Agghoo and the oracle.

Every replicate draws its own sample and test set from a seed keyed on
``(master_seed, r)``; all selection schemes of a replicate then run on that
same sample, test set and (where their parameters coincide) the same
training sets.  Monte-Carlo training sets are keyed on ``(seed, tau, j)``,
so the hold-out set ``T_1`` is also the first set of every Agghoo/CV plan
with the same ``tau``.  Results are reduced in replicate order, so reports
are identical whether replicates run serially or in worker processes.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import partial
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from . import __version__
from .core import Classifier, Dataset, error_count, excess_risk_estimate
from .data import bundled_path, file_sha256, load_breast_cancer, train_test_resplit
from .learners import cart_family, knn_family, lp_collection
from .selection import PlanScores, agghoo, cv_select, score_plan, subagged_holdout
from .splits import monte_carlo_splits, train_size_for, vfold_splits
from .synthetic import make_problem

log = logging.getLogger(__name__)

SCHEMES = ("agghoo", "cv", "holdout", "subag")
PROBLEMS = ("sigmoid", "gaussmix", "uci")
FAMILIES = ("knn", "cart", "lp")
CSV_HEADER = ("replicate", "scheme", "tau", "V", "excess_risk", "risk", "selected_rule_ids")
_SUBAG_SEED_OFFSET = 0x5AB5AB


@dataclass(frozen=True)
class Setting:
    """One selection scheme with its split parameters.

    ``splits`` is ``"mc"`` (Monte-Carlo, size ``floor(tau n)``) or
    ``"vfold"`` (``tau`` is then ``1 - 1/V``).  ``inner_tau`` is only used by
    ``subag``.
    """

    scheme: str
    tau: float
    V: int = 1
    splits: str = "mc"
    inner_tau: float = 0.5

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.splits not in ("mc", "vfold"):
            raise ValueError(f"unknown split scheme {self.splits!r}")
        if self.V < 1:
            raise ValueError("V must be at least 1")
        if self.splits == "vfold":
            if self.V < 2:
                raise ValueError("V-fold needs V >= 2")
            object.__setattr__(self, "tau", 1.0 - 1.0 / self.V)
        elif not 0.0 < self.tau < 1.0:
            raise ValueError("tau must lie in (0, 1)")
        if self.scheme == "holdout" and self.splits == "mc":
            object.__setattr__(self, "V", 1)

    @property
    def label(self) -> str:
        return self.scheme if self.splits == "mc" else f"{self.scheme}-vfold"

    @property
    def key(self) -> tuple:
        return (self.label, self.tau, self.V)


def settings_grid(schemes: Iterable[str], taus: Iterable[float], vs: Iterable[int],
                  cv_splits: str = "mc", inner_tau: float = 0.5) -> tuple[Setting, ...]:
    """All ``(scheme, tau, V)`` combinations; hold-out ignores ``V``, V-fold CV ignores ``tau``."""
    out, seen = [], set()
    taus, vs = list(taus), list(vs)
    for scheme in schemes:
        for V in vs:
            for tau in taus:
                if scheme == "cv" and cv_splits == "vfold":
                    st = Setting("cv", 0.5, V, "vfold")
                else:
                    st = Setting(scheme, tau, V, "mc", inner_tau)
                if st.key not in seen:
                    seen.add(st.key)
                    out.append(st)
    return tuple(out)


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str = "sigmoid"
    family: str = "knn"
    n: int = 500
    test_n: int = 1000
    replicates: int = 100
    settings: tuple[Setting, ...] = ()
    master_seed: int = 0
    d: int = 7
    k_max: int = 29
    alpha_min: float = 1e-4
    alpha_ratio: float = 1.5
    alpha_size: int = 40
    lp_degree_cap: int = 3
    lp_k_cap: int = 20
    uci_path: str | None = None
    missing_policy: str = "impute-median"
    subsample_oracle: bool = False

    def __post_init__(self):
        object.__setattr__(self, "settings", tuple(self.settings))

    def validate(self) -> None:
        if self.problem not in PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if not self.settings:
            raise ValueError("no selection settings")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.problem != "uci" and self.test_n < 1:
            raise ValueError("test_n must be at least 1")
        if self.family == "lp" and self.problem == "uci" and self.n <= 1:
            raise ValueError("local-polynomial rules need n > 1")
        for st in self.settings:
            if st.splits == "mc":
                size = train_size_for(self.n, st.tau)
                if not 1 <= size <= self.n - 1:
                    raise ValueError(f"tau={st.tau} gives a degenerate split for n={self.n}")
            elif st.V > self.n:
                raise ValueError(f"V={st.V} exceeds n={self.n}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["settings"] = [asdict(s) for s in self.settings]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d["settings"] = tuple(Setting(**s) if isinstance(s, dict) else s for s in d.get("settings", ()))
        return cls(**d)


def build_family(config: ExperimentConfig):
    if config.family == "knn":
        return knn_family(config.k_max)
    if config.family == "cart":
        return cart_family(config.alpha_min, config.alpha_ratio, config.alpha_size)
    return lp_collection(None, config.lp_degree_cap, config.lp_k_cap)


def oracle_excess(family, data: Dataset, bayes: Classifier, test: Dataset) -> float:
    """Smallest test-estimated excess risk over the family, each rule trained on all of ``data``."""
    family = list(family)
    if not family:
        raise ValueError("empty family")
    return min(excess_risk_estimate(G.train(data), bayes, test) for G in family)


@dataclass(frozen=True)
class Row:
    replicate: int
    scheme: str
    tau: float | None
    V: int | None
    excess_risk: float | None
    risk: float
    selected: str


@dataclass
class ReplicateResult:
    replicate: int
    rows: list[Row] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    error: str | None = None


_UCI_CACHE: dict = {}


def _uci_data(config: ExperimentConfig) -> Dataset:
    key = (config.uci_path, config.missing_policy)
    if key not in _UCI_CACHE:
        _UCI_CACHE[key] = load_breast_cancer(config.uci_path, config.missing_policy)
    return _UCI_CACHE[key]


def _tau_stream(tau: float) -> int:
    return int(round(tau * 1_000_000))


def _hash_plan(plan) -> str:
    return hashlib.sha256(plan.to_json().encode()).hexdigest()[:16]


def draw_replicate_data(config: ExperimentConfig, r: int):
    """Sample, test set, Bayes classifier (``None`` for real data) and split seed of replicate ``r``."""
    ss = np.random.SeedSequence([config.master_seed, r])
    s_sample, s_test, s_split = (int(v) for v in ss.generate_state(3))
    if config.problem == "uci":
        train, test = train_test_resplit(_uci_data(config), config.n, s_sample)
        return train, test, None, s_split
    problem = make_problem(config.problem, config.d)
    return problem.sample(config.n, s_sample), problem.sample(config.test_n, s_test), problem.bayes(), s_split


def run_replicate(config: ExperimentConfig, r: int) -> ReplicateResult:
    """All schemes and the oracle on replicate ``r``. Errors are recorded, not raised."""
    result = ReplicateResult(r)
    try:
        _run_replicate(config, r, result)
    except Exception as exc:  # recorded as a failed replicate
        log.warning("replicate %d failed: %s", r, exc)
        result.rows = []
        result.error = f"{type(exc).__name__}: {exc}"
    return result


def _run_replicate(config: ExperimentConfig, r: int, result: ReplicateResult) -> None:
    train, test, bayes, s_split = draw_replicate_data(config, r)
    family = build_family(config)
    bayes_errors = error_count(bayes, test)[0] if bayes is not None else None

    def evaluate(clf: Classifier):
        errors, size = error_count(clf, test)
        excess = None if bayes_errors is None else (errors - bayes_errors) / size
        return excess, errors / size

    full_fit: dict[str, Classifier] = {}

    def full(G):
        if G.id not in full_fit:
            full_fit[G.id] = G.train(train)
        return full_fit[G.id]

    # Monte-Carlo tables are computed once per tau at the largest V needed.
    v_needed: dict[float, int] = {}
    for st in config.settings:
        if st.splits == "mc" and st.scheme != "subag":
            v_needed[st.tau] = max(v_needed.get(st.tau, 1), st.V)
    tables: dict[tuple, PlanScores] = {}
    plans: dict[tuple, object] = {}

    def mc_plan(tau, V):
        key = ("mc", tau, V)
        if key not in plans:
            plans[key] = monte_carlo_splits(config.n, tau, V, seed=s_split + _tau_stream(tau))
        return plans[key]

    def table(st: Setting):
        if st.splits == "vfold":
            key = ("vfold", st.V)
            if key not in tables:
                plans[key] = vfold_splits(config.n, st.V, seed=s_split)
                tables[key] = score_plan(family, train, plans[key])
            return tables[key], plans[key]
        key = ("mc", st.tau)
        if key not in tables:
            tables[key] = score_plan(family, train, mc_plan(st.tau, v_needed[st.tau]))
        return tables[key].head(st.V), mc_plan(st.tau, st.V)

    prov_plans = {}
    for st in config.settings:
        if st.scheme == "subag":
            plan = mc_plan(st.tau, st.V)
            clf = subagged_holdout(family, train, plan, st.inner_tau, seed=s_split + _SUBAG_SEED_OFFSET)
            selected = ";".join(clf.member_ids)
        else:
            scores, plan = table(st)
            if st.scheme == "agghoo":
                clf = agghoo(family, train, plan, scores)
                selected = ";".join(clf.member_ids)
            elif st.scheme == "cv":
                choice = cv_select(family, train, plan, scores, fitted=full_fit)
                clf = full_fit.setdefault(choice.rule_id, choice.classifier)
                selected = choice.rule_id
            else:
                choice = scores.holdout_choice(0)
                clf, selected = choice.classifier, choice.rule_id
        prov_plans[f"{st.label}|{st.tau!r}|{st.V}"] = _hash_plan(plan)
        excess, risk = evaluate(clf)
        result.rows.append(Row(r, st.label, st.tau, st.V, excess, risk, selected))

    # oracle: best rule of the family trained on the full sample
    best = None
    for G in family:
        excess, risk = evaluate(full(G))
        key = (excess if excess is not None else risk, G.id)
        if best is None or key < best[0]:
            best = (key, excess, risk, G.id)
    result.rows.append(Row(r, "oracle", None, None, best[1], best[2], best[3]))

    if config.subsample_oracle and bayes is not None:
        for tau in sorted(v_needed):
            T1 = mc_plan(tau, 1).sets[0]
            sub = train.subset(T1)
            cands = [(evaluate(G.train(sub)), G.id) for G in family]
            (excess, risk), rid = min(cands, key=lambda c: (c[0][0], c[1]))
            result.rows.append(Row(r, "oracle-train", tau, 1, excess, risk, rid))

    result.provenance = {
        "replicate": r,
        "sample": train.fingerprint[:16],
        "test": test.fingerprint[:16],
        "plans": prov_plans,
    }


@dataclass(frozen=True)
class Aggregate:
    scheme: str
    tau: float | None
    V: int | None
    count: int
    mean_excess: float | None
    se_excess: float | None
    mean_risk: float
    se_risk: float

    @property
    def key(self) -> tuple:
        return (self.scheme, self.tau, self.V)


def _mean_se(values: Sequence[float]) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return math.nan, math.nan
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return float(v.mean()), se


def aggregate_rows(rows: Sequence[Row]) -> list[Aggregate]:
    groups: dict[tuple, list[Row]] = {}
    for row in rows:
        groups.setdefault((row.scheme, row.tau, row.V), []).append(row)
    out = []
    for (scheme, tau, V), rs in groups.items():
        mr, sr = _mean_se([x.risk for x in rs])
        if all(x.excess_risk is not None for x in rs):
            me, se = _mean_se([x.excess_risk for x in rs])
        else:
            me = se = None
        out.append(Aggregate(scheme, tau, V, len(rs), me, se, mr, sr))
    return out


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list[Row]
    aggregates: list[Aggregate]
    failures: list[tuple[int, str]]
    provenance: list[dict]
    metadata: dict = field(default_factory=dict)

    def aggregate(self, scheme: str, tau=None, V=None) -> Aggregate:
        for a in self.aggregates:
            if a.scheme == scheme and (tau is None or a.tau == tau) and (V is None or a.V == V):
                return a
        raise KeyError((scheme, tau, V))

    def values(self, scheme: str, tau=None, V=None, field_name: str = "excess_risk") -> np.ndarray:
        """Per-replicate values of one setting, ordered by replicate."""
        a = self.aggregate(scheme, tau, V)
        rows = [x for x in self.rows if (x.scheme, x.tau, x.V) == a.key]
        rows.sort(key=lambda x: x.replicate)
        return np.array([getattr(x, field_name) for x in rows], dtype=np.float64)

    def oracle(self) -> Aggregate:
        return self.aggregate("oracle")


def combined_se(*aggs: Aggregate, field_name: str = "excess") -> float:
    return math.sqrt(sum(getattr(a, f"se_{field_name}") ** 2 for a in aggs))


def paired_test(a: np.ndarray, b: np.ndarray) -> dict:
    """One-sided paired t-test of ``mean(a) < mean(b)``."""
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    diff = a - b
    res = stats.ttest_rel(a, b, alternative="less")
    return {
        "mean_diff": float(diff.mean()),
        "se_diff": float(diff.std(ddof=1) / math.sqrt(diff.size)) if diff.size > 1 else 0.0,
        "t": float(res.statistic),
        "p_value": float(res.pvalue),
    }


def run_experiment(config: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    """Run all replicates; ``threads`` worker processes (1 = in-process)."""
    config.validate()
    log.info("experiment config: %s", json.dumps(config.to_dict(), sort_keys=True))
    t0 = time.perf_counter()
    worker = partial(run_replicate, config)
    if threads > 1 and config.replicates > 1:
        with ProcessPoolExecutor(max_workers=min(threads, config.replicates)) as ex:
            results = list(ex.map(worker, range(config.replicates)))
    else:
        results = [worker(r) for r in range(config.replicates)]
    results.sort(key=lambda res: res.replicate)
    rows = [row for res in results for row in res.rows]
    failures = [(res.replicate, res.error) for res in results if res.error is not None]
    meta = {
        "runtime_seconds": time.perf_counter() - t0,
        "threads": threads,
        "started": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    if config.problem == "uci":
        path = config.uci_path or bundled_path()
        meta["uci_source"] = os.fspath(path)
        meta["uci_sha256"] = file_sha256(path)
    return ExperimentReport(
        config=config,
        rows=rows,
        aggregates=aggregate_rows(rows),
        failures=failures,
        provenance=[res.provenance for res in results],
        metadata=meta,
    )


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_write(report: ExperimentReport, path) -> None:
    """CSV of per-replicate rows, then ``AGG`` (means) and ``AGG_SE`` (standard errors) rows.

    Aggregate rows carry ``count=<replicates>`` in the last column.  Failed
    replicates appear as ``FAILED`` rows with the error message.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for x in report.rows:
            w.writerow([x.replicate, x.scheme, _fmt(x.tau), _fmt(x.V), _fmt(x.excess_risk),
                        _fmt(x.risk), x.selected])
        for r, err in report.failures:
            w.writerow([r, "FAILED", "", "", "", "", err])
        for a in report.aggregates:
            w.writerow(["AGG", a.scheme, _fmt(a.tau), _fmt(a.V), _fmt(a.mean_excess),
                        _fmt(a.mean_risk), f"count={a.count}"])
            w.writerow(["AGG_SE", a.scheme, _fmt(a.tau), _fmt(a.V), _fmt(a.se_excess),
                        _fmt(a.se_risk), f"count={a.count}"])


def write_metadata(report: ExperimentReport, path) -> None:
    """Sidecar with timings, versions, config and provenance hashes."""
    with open(path, "w") as fh:
        json.dump({
            "config": report.config.to_dict(),
            "metadata": report.metadata,
            "provenance": report.provenance,
            "failures": report.failures,
        }, fh, indent=2, sort_keys=True)


def _parse(v: str, kind):
    return None if v == "" else kind(v)


def report_read(path) -> tuple[list[Row], list[Aggregate]]:
    """Rows and aggregates back from a CSV written by :func:`report_write`."""
    rows, means, ses = [], {}, {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        for rec in reader:
            tag, scheme, tau, V, excess, risk, sel = rec
            key = (scheme, _parse(tau, float), _parse(V, int))
            if tag == "AGG":
                means[key] = (_parse(excess, float), float(risk), int(sel.split("=")[1]))
            elif tag == "AGG_SE":
                ses[key] = (_parse(excess, float), float(risk))
            elif scheme != "FAILED":
                rows.append(Row(int(tag), scheme, key[1], key[2], _parse(excess, float), float(risk), sel))
    aggs = [
        Aggregate(k[0], k[1], k[2], means[k][2], means[k][0], ses[k][0], means[k][1], ses[k][1])
        for k in means
    ]
    return rows, aggs


def report_plot(report: ExperimentReport, path) -> None:
    """SVG of mean excess risk (risk for real data) against tau, one line per (scheme, V)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    use_excess = all(a.mean_excess is not None for a in report.aggregates)
    label = "excess risk" if use_excess else "risk"
    series: dict[tuple, list[Aggregate]] = {}
    for a in report.aggregates:
        if a.scheme.startswith("oracle"):
            continue
        series.setdefault((a.scheme, a.V), []).append(a)
    plt.rcParams["svg.hashsalt"] = "agghoo"
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for (scheme, V), aggs in series.items():
        aggs = sorted(aggs, key=lambda a: a.tau)
        x = [a.tau for a in aggs]
        y = [a.mean_excess if use_excess else a.mean_risk for a in aggs]
        e = [2 * (a.se_excess if use_excess else a.se_risk) for a in aggs]
        ax.errorbar(x, y, yerr=e, marker="o", capsize=3, label=f"{scheme} V={V}")
    try:
        o = report.oracle()
        ax.axhline(o.mean_excess if use_excess else o.mean_risk, color="k", ls="--", label="oracle")
    except KeyError:
        pass
    ax.set_xlabel("tau (training fraction)")
    ax.set_ylabel(f"mean {label}")
    ax.set_title(f"{report.config.problem} / {report.config.family}, R={report.config.replicates}")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def with_settings(config: ExperimentConfig, settings: Sequence[Setting]) -> ExperimentConfig:
    return replace(config, settings=tuple(settings))
