"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

import numpy as np

from . import __version__

log = logging.getLogger("agghoo")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(s: str) -> list[float]:
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {s!r}") from None


def _ints(s: str) -> list[int]:
    try:
        return [int(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {s!r}") from None


def _names(s: str) -> list[str]:
    return [v.strip() for v in s.split(",") if v.strip()]


# bench flags and their config-file keys; flags override the file
_BENCH_DEFAULTS = {
    "problem": "sigmoid",
    "family": "knn",
    "d": 7,
    "n": 500,
    "test_n": 1000,
    "replicates": 100,
    "tau_list": [round(0.1 * i, 1) for i in range(1, 10)],
    "v_list": [10],
    "schemes": ["agghoo", "cv", "holdout"],
    "cv_splits": "mc",
    "inner_tau": 0.5,
    "seed": 0,
    "k_max": 29,
    "alpha_min": 1e-4,
    "alpha_ratio": 1.5,
    "alpha_size": 40,
    "lp_degree_cap": 3,
    "lp_k_cap": 20,
    "uci_path": None,
    "missing_policy": "impute-median",
    "subsample_oracle": False,
    "out": "bench.csv",
    "plot": None,
    "threads": 1,
}


def _load_config_file(path: str) -> dict:
    try:
        import tomllib  # type: ignore[import-not-found]
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    out = {}
    for key, value in raw.items():
        key = key.replace("-", "_")
        if key not in _BENCH_DEFAULTS:
            raise UsageError(f"unknown key {key!r} in {path}")
        default = _BENCH_DEFAULTS[key]
        if isinstance(default, list) and isinstance(value, str):
            value = _names(value) if key == "schemes" else (_ints(value) if key == "v_list" else _floats(value))
        out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="agghoo", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bench", help="run a replicated selection experiment")
    b.add_argument("--config", help="TOML key/value file; flags given explicitly override it")
    b.add_argument("--problem", choices=("sigmoid", "gaussmix", "uci"))
    b.add_argument("--family", choices=("knn", "cart", "lp"))
    b.add_argument("--d", type=int, help="GaussMix dimension (>= 6)")
    b.add_argument("--n", type=int)
    b.add_argument("--test-n", type=int)
    b.add_argument("--replicates", type=int)
    b.add_argument("--tau-list", type=_floats)
    b.add_argument("--v-list", type=_ints)
    b.add_argument("--schemes", type=_names, help="comma-separated: agghoo,cv,holdout,subag")
    b.add_argument("--cv-splits", choices=("mc", "vfold"))
    b.add_argument("--inner-tau", type=float)
    b.add_argument("--seed", type=int)
    b.add_argument("--k-max", type=int)
    b.add_argument("--alpha-min", type=float)
    b.add_argument("--alpha-ratio", type=float)
    b.add_argument("--alpha-size", type=int)
    b.add_argument("--uci-path")
    b.add_argument("--missing-policy", choices=("impute-median", "drop-rows"))
    b.add_argument("--subsample-oracle", action="store_true", default=None)
    b.add_argument("--out")
    b.add_argument("--plot", help="SVG output path")
    b.add_argument("--threads", type=int)

    r = sub.add_parser("bayes-risk", help="Bayes risk of a synthetic problem")
    r.add_argument("--problem", choices=("sigmoid", "gaussmix"), default="sigmoid")
    r.add_argument("--grid", type=int, default=2000, help="Simpson intervals per axis (sigmoid)")
    r.add_argument("--mc-n", type=int, default=1_000_000, help="Monte-Carlo draws (gaussmix)")
    r.add_argument("--d", type=int, default=7)
    r.add_argument("--seed", type=int, default=0)

    t = sub.add_parser("theory-check", help="exact fuzz of the majority-vote risk bounds")
    t.add_argument("--sweeps", type=int, default=10_000)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--json", dest="json_out", help="write the JSON verdict here as well")

    u = sub.add_parser("load-uci", help="parse the breast-cancer Wisconsin file and summarise it")
    u.add_argument("--path", default=None, help="defaults to the bundled copy")
    u.add_argument("--missing-policy", choices=("impute-median", "drop-rows"), default="impute-median")

    sub.add_parser("version", help="print the version")
    return p


def _resolve_bench(args) -> dict:
    cfg = dict(_BENCH_DEFAULTS)
    if args.config:
        cfg.update(_load_config_file(args.config))
    for key in _BENCH_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _cmd_bench(args) -> int:
    from .bench import ExperimentConfig, report_plot, report_write, run_experiment, settings_grid, write_metadata

    cfg = _resolve_bench(args)
    try:
        settings = settings_grid(cfg["schemes"], cfg["tau_list"], cfg["v_list"], cfg["cv_splits"], cfg["inner_tau"])
        config = ExperimentConfig(
            problem=cfg["problem"], family=cfg["family"], n=cfg["n"], test_n=cfg["test_n"],
            replicates=cfg["replicates"], settings=settings, master_seed=cfg["seed"], d=cfg["d"],
            k_max=cfg["k_max"], alpha_min=cfg["alpha_min"], alpha_ratio=cfg["alpha_ratio"],
            alpha_size=cfg["alpha_size"], lp_degree_cap=cfg["lp_degree_cap"], lp_k_cap=cfg["lp_k_cap"],
            uci_path=cfg["uci_path"], missing_policy=cfg["missing_policy"],
            subsample_oracle=bool(cfg["subsample_oracle"]),
        )
        config.validate()
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    if cfg["threads"] < 1:
        raise UsageError("--threads must be at least 1")
    print(f"seed={cfg['seed']}", file=sys.stderr)
    log.info("resolved bench config: %s", json.dumps(cfg, sort_keys=True))
    report = run_experiment(config, threads=cfg["threads"])
    report_write(report, cfg["out"])
    write_metadata(report, cfg["out"] + ".meta.json")
    if cfg["plot"]:
        report_plot(report, cfg["plot"])
    for a in report.aggregates:
        me = "" if a.mean_excess is None else f" excess={a.mean_excess:.5f}+-{a.se_excess:.5f}"
        tau = "" if a.tau is None else f" tau={a.tau:g}"
        V = "" if a.V is None else f" V={a.V}"
        print(f"{a.scheme}{tau}{V}:{me} risk={a.mean_risk:.5f}+-{a.se_risk:.5f}")
    if report.failures:
        print(f"{len(report.failures)} replicate(s) failed; see {cfg['out']}", file=sys.stderr)
        return 2
    return 0


def _cmd_bayes_risk(args) -> int:
    from .synthetic import GaussMixProblem, SigmoidProblem

    print(f"seed={args.seed}", file=sys.stderr)
    t0 = time.perf_counter()
    if args.problem == "sigmoid":
        try:
            value = SigmoidProblem().bayes_risk(args.grid)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        print(f"bayes_risk={value:.6f} (simpson, grid={args.grid}, {time.perf_counter() - t0:.2f}s)")
    else:
        try:
            problem = GaussMixProblem(args.d)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        value, se = problem.bayes_risk(args.mc_n, args.seed)
        print(f"bayes_risk={value:.6f} se={se:.6f} (monte-carlo, d={args.d}, n={args.mc_n}, "
              f"{time.perf_counter() - t0:.2f}s)")
    return 0


def _cmd_theory(args) -> int:
    from .theory import fuzz_majority_bounds

    if args.sweeps < 1:
        raise UsageError("--sweeps must be at least 1")
    print(f"seed={args.seed}", file=sys.stderr)
    summary = fuzz_majority_bounds(args.sweeps, args.seed)
    verdict = summary.to_json()
    print(verdict)
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write(verdict + "\n")
    if summary.all_hold:
        print(f"all majority-vote bound instances hold ({summary.instances}/{summary.instances})")
        return 0
    print(f"{summary.violations} of {summary.instances} instances violate a bound", file=sys.stderr)
    return 2


def _cmd_load_uci(args) -> int:
    from .data import bundled_path, file_sha256, load_breast_cancer

    path = args.path or bundled_path()
    data = load_breast_cancer(path, args.missing_policy)
    counts = np.bincount(data.labels, minlength=2)
    print(json.dumps({
        "path": path,
        "sha256": file_sha256(path),
        "missing_policy": args.missing_policy,
        "n": data.n,
        "d": data.dim,
        "class_counts": counts.tolist(),
    }, sort_keys=True))
    return 0


_COMMANDS = {
    "bench": _cmd_bench,
    "bayes-risk": _cmd_bayes_risk,
    "theory-check": _cmd_theory,
    "load-uci": _cmd_load_uci,
    "version": lambda args: print(__version__) or 0,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"agghoo: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        log.debug("failure", exc_info=True)
        print(f"agghoo: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
