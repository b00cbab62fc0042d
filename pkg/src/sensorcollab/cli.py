"""Command-line entry point: regress, classify, and oracle subcommands.

Every run materializes its full resolved configuration into
`<out-dir>/manifest.json` next to its CSV artifacts, and `run_manifest`
replays a manifest to reproduce those artifacts bit for bit.  All
randomness descends from the single --seed via the derivation documented
in `sensorcollab.seeding`.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import sensorcollab
from sensorcollab.classify import ClassifyConfig, run_classification_experiment
from sensorcollab.dataset import load_categorical_csv, synthetic_categorical
from sensorcollab.gaussian_bp import NumericalFailure
from sensorcollab.oracles import (
    check_discrete_equivalence,
    check_gibbs_vs_enumeration,
    check_greedy_vs_argmax,
)
from sensorcollab.regression import RegressionConfig, run_regression_experiment
from sensorcollab.seeding import derive_int_seed

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2


def _write_manifest(out_dir: Path, subcommand: str, config: dict, seed: int,
                    artifacts: list[str]) -> None:
    manifest = {
        "tool": "sensorcollab",
        "version": sensorcollab.__version__,
        "subcommand": subcommand,
        "seed": seed,
        "config": config,
        "artifacts": artifacts,
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _write_csv(path: Path, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(header + "\n")
        for row in rows:
            handle.write(",".join(repr(v) if isinstance(v, float) else str(v)
                                  for v in row) + "\n")


def _run_regress(config: dict, out_dir: Path) -> int:
    cfg = RegressionConfig(**config)
    result = run_regression_experiment(cfg)
    _write_csv(out_dir / "rounds.csv", "round,test_error,estimate_variance",
               [(m.round, m.test_error, m.estimate_variance) for m in result.metrics])
    _write_csv(out_dir / "marginals.csv", "sensor,mean,variance",
               [(s, marg.mean, marg.variance) for s, marg in enumerate(result.marginals)])
    _write_manifest(out_dir, "regress", config, cfg.seed, ["rounds.csv", "marginals.csv"])
    final = result.metrics[-1]
    print(f"rounds={final.round} converged={result.bp_report.converged}")
    if result.unidentifiable_sensors:
        print(f"unidentifiable sensors (all x=0): {result.unidentifiable_sensors}")
    print(f"final test_error={final.test_error:.6g} "
          f"estimate_variance={final.estimate_variance:.6g}")
    return EXIT_OK


def _run_classify(config: dict, out_dir: Path) -> int:
    if config["data"] is not None:
        dataset = load_categorical_csv(config["data"])
    else:
        dataset = synthetic_categorical(
            config["rows"], config["features"], config["arity"],
            config["rule_depth"], config["noise"],
            derive_int_seed(config["seed"], "synthetic"))
    cfg = ClassifyConfig(
        num_sensors=config["sensors"], expected_degree=config["degree"],
        particles_per_sensor=config["particles"], rounds=config["rounds"],
        mode=config["mode"], sweep=config["sweep"],
        train_count=config["train_count"], test_count=config["test_count"],
        max_depth=config["max_depth"], min_leaf=config["min_leaf"],
        trace_every=config["trace_every"], seed=config["seed"])
    summary = run_classification_experiment(dataset, cfg)

    _write_csv(out_dir / "trace.csv", "round,sensor,test_error",
               summary.sampler_run.trace)
    _write_csv(out_dir / "histogram.csv", "sensor,test_error_before,test_error_after",
               [(s, float(summary.noncollab_errors[s]), float(summary.final_errors[s]))
                for s in range(cfg.num_sensors)])
    _write_manifest(out_dir, "classify", config, cfg.seed,
                    ["trace.csv", "histogram.csv"])
    print(f"centralized tree error      {summary.centralized_error:.4f}")
    print(f"exhaustive product-MAP error {summary.bruteforce_error:.4f}")
    print(f"non-collaborative median    {summary.noncollab_median:.4f}")
    print(f"sampler median              {summary.sampler_median:.4f}")
    print(f"majority-vote error         {summary.majority_error:.4f}")
    return EXIT_OK


def _run_oracle(config: dict, out_dir: Path) -> int:
    reports = []
    reports += check_gibbs_vs_enumeration(
        instances=config["gibbs_instances"], steps=config["gibbs_steps"],
        seed=config["seed"], num_sensors=min(config["sensors"], 2),
        particles_per_sensor=min(config["particles"], 2))
    reports += check_greedy_vs_argmax(
        instances=config["seeds"], seed=config["seed"],
        max_sensors=config["sensors"], max_particles=config["particles"])
    reports += check_discrete_equivalence(instances=config["seeds"], seed=config["seed"])
    all_ok = True
    lines = []
    for report in reports:
        flag = "PASS" if report.passed else "FAIL"
        all_ok &= report.passed
        lines.append(f"[{flag}] {report.name}: {report.detail}")
        print(lines[-1])
    with open(out_dir / "oracle_report.txt", "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")
    _write_manifest(out_dir, "oracle", config, config["seed"], ["oracle_report.txt"])
    return EXIT_OK if all_ok else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sensorcollab",
        description="Collaborative sensor-network training experiments")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out-dir", type=str, default=".")

    regress = sub.add_parser("regress", parents=[common],
                             help="slope-consensus experiment (Gaussian messages)")
    regress.add_argument("--sensors", type=int, default=50)
    regress.add_argument("--radius", type=float, default=0.2)
    regress.add_argument("--slope", type=float, default=1.0)
    regress.add_argument("--sigma", type=float, default=0.5)
    regress.add_argument("--bootstrap", type=int, default=100)
    regress.add_argument("--edge-variance", type=float, default=1e-8)
    regress.add_argument("--grid", type=int, default=100)

    classify = sub.add_parser("classify", parents=[common],
                              help="distributed decision-tree experiment (sampling)")
    classify.add_argument("--data", type=str, default=None,
                          help="comma-separated symbolic file; last field is the class")
    classify.add_argument("--synthetic", action="store_true",
                          help="generate a synthetic categorical dataset instead")
    classify.add_argument("--rows", type=int, default=1600)
    classify.add_argument("--features", type=int, default=12)
    classify.add_argument("--arity", type=int, default=2)
    classify.add_argument("--rule-depth", type=int, default=4)
    classify.add_argument("--noise", type=float, default=0.05)
    classify.add_argument("--sensors", type=int, default=20)
    classify.add_argument("--degree", type=float, default=4.0)
    classify.add_argument("--particles", type=int, default=4)
    classify.add_argument("--rounds", type=int, default=4000)
    classify.add_argument("--mode", choices=["greedy", "gibbs"], default="greedy")
    classify.add_argument("--sweep", choices=["random-sensor", "fixed-permutation"],
                          default="random-sensor")
    classify.add_argument("--train-count", type=int, default=None,
                          help="defaults to 2000 with --data, rows//2 with --synthetic")
    classify.add_argument("--test-count", type=int, default=None)
    classify.add_argument("--max-depth", type=int, default=10)
    classify.add_argument("--min-leaf", type=int, default=1)
    classify.add_argument("--trace-every", type=int, default=100)

    oracle = sub.add_parser("oracle", parents=[common],
                            help="small-instance agreement checks against exact oracles")
    oracle.add_argument("--sensors", type=int, default=2)
    oracle.add_argument("--particles", type=int, default=2)
    oracle.add_argument("--seeds", type=int, default=10)
    oracle.add_argument("--gibbs-instances", type=int, default=2)
    oracle.add_argument("--gibbs-steps", type=int, default=100_000)

    return parser


def _resolve_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> dict:
    """Validate flags and materialize every default into a plain dict."""
    sub = args.subcommand
    if sub == "regress":
        if args.sensors < 1:
            parser.error("--sensors must be >= 1")
        if args.radius < 0:
            parser.error("--radius must be non-negative")
        if args.sigma < 0:
            parser.error("--sigma must be non-negative")
        if args.bootstrap < 2:
            parser.error("--bootstrap must be >= 2")
        if args.edge_variance < 0:
            parser.error("--edge-variance must be non-negative")
        if args.grid < 1:
            parser.error("--grid must be >= 1")
        return {
            "num_sensors": args.sensors, "radius": args.radius,
            "true_slope": args.slope, "noise_scale": args.sigma,
            "bootstrap_reps": args.bootstrap, "edge_variance": args.edge_variance,
            "seed": args.seed, "test_grid_size": args.grid,
        }
    if sub == "classify":
        if args.data is None and not args.synthetic:
            parser.error("either --data PATH or --synthetic is required")
        if args.data is not None and not Path(args.data).is_file():
            parser.error(f"dataset file not found: {args.data}")
        if args.sensors < 1 or args.particles < 1:
            parser.error("--sensors and --particles must be >= 1")
        if args.rounds < 0:
            parser.error("--rounds must be >= 0")
        if not (0.0 <= args.noise < 0.5):
            parser.error("--noise must be in [0, 0.5)")
        if args.data is not None:
            train = args.train_count if args.train_count is not None else 2000
            test = args.test_count
        else:
            train = (args.train_count if args.train_count is not None
                     else (args.rows // 2 // args.sensors) * args.sensors)
            test = args.test_count if args.test_count is not None else args.rows - train
        if train < args.sensors or train % args.sensors != 0:
            parser.error(f"--train-count {train} must be a positive multiple of "
                         f"--sensors {args.sensors}")
        return {
            "data": args.data, "rows": args.rows, "features": args.features,
            "arity": args.arity, "rule_depth": args.rule_depth, "noise": args.noise,
            "sensors": args.sensors, "degree": args.degree,
            "particles": args.particles, "rounds": args.rounds, "mode": args.mode,
            "sweep": args.sweep, "train_count": train, "test_count": test,
            "max_depth": args.max_depth, "min_leaf": args.min_leaf,
            "trace_every": args.trace_every, "seed": args.seed,
        }
    if sub == "oracle":
        if args.sensors > 4 or args.particles > 3:
            parser.error("oracle instances are limited to --sensors <= 4 and "
                         "--particles <= 3 (exhaustive enumeration)")
        if args.sensors < 1 or args.particles < 1 or args.seeds < 1:
            parser.error("--sensors, --particles, --seeds must be >= 1")
        return {
            "sensors": args.sensors, "particles": args.particles,
            "seeds": args.seeds, "gibbs_instances": args.gibbs_instances,
            "gibbs_steps": args.gibbs_steps, "seed": args.seed,
        }
    parser.error(f"unknown subcommand {sub}")


_RUNNERS = {
    "regress": _run_regress,
    "classify": _run_classify,
    "oracle": _run_oracle,
}


def _resolve_test_count(config: dict) -> dict:
    # classify with --data defers test_count until the file size is known
    if config.get("test_count") is None and config.get("data") is not None:
        dataset = load_categorical_csv(config["data"])
        config = dict(config)
        config["test_count"] = len(dataset) - config["train_count"]
    return config


def run_manifest(manifest_path, out_dir=None) -> int:
    """Re-run a recorded manifest; reproduces its artifacts bit-identically."""
    with open(manifest_path, "r", encoding="utf-8") as handle:
        manifest = json.load(handle)
    target = Path(out_dir) if out_dir is not None else Path(manifest_path).parent
    target.mkdir(parents=True, exist_ok=True)
    return _RUNNERS[manifest["subcommand"]](manifest["config"], target)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _resolve_config(args, parser)
    config = _resolve_test_count(config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        return _RUNNERS[args.subcommand](config, out_dir)
    except NumericalFailure as failure:
        print(f"numerical failure: {failure}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
