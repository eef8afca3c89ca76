"""Command-line front end: run experiments, sweep condition grids,
generate GP problem data, and export phylogeny snapshots.

Config files are flat ``key = value`` text; unknown keys are rejected so
typos cannot silently misconfigure an experiment. Command-line flags
override file values. Exit codes: 0 success, 1 configuration error,
2 runtime error.
"""

import argparse
import csv
import dataclasses
import multiprocessing
import os
import sys

from .core import RngStream
from .engine import ConfigError, ExperimentConfig, run_experiment
from . import gp

OUTPUT_ROOT_ENV = "PHYLEX_OUTPUT_ROOT"

_INT_KEYS = {"seed", "pop_size", "depth_limit", "max_generations",
             "max_evaluations", "genome_length", "snapshot_interval"}
_FLOAT_KEYS = {"level", "gene_mutation_rate", "gene_mutation_sigma",
               "satisfaction_threshold"}
_STR_KEYS = {"problem", "subsampling", "estimator", "output_dir"}
_CONFIG_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS

_SWEEP_LIST_KEYS = {"subsamplings", "estimators", "levels", "seeds"}
_SWEEP_ONLY_KEYS = _SWEEP_LIST_KEYS | {"workers", "output_root"}

# Paper-parameterized population sizes and budgets, applied when unset.
_FAMILY_DEFAULTS = {
    "diagnostics": {"pop_size": 500, "max_generations": 50_000},
    "gp": {"pop_size": 1000, "max_evaluations": 30_000_000},
}


def _parse_kv_file(path, allowed_keys):
    values = {}
    try:
        lines = open(path).read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in allowed_keys:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def _coerce(key, value):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError:
        raise ConfigError(f"invalid value for {key}: {value!r}")
    return value


def _build_config(file_values, overrides) -> ExperimentConfig:
    merged = {k: _coerce(k, v) for k, v in file_values.items()}
    merged.update({k: v for k, v in overrides.items() if v is not None})
    for required in ("problem", "seed"):
        if required not in merged:
            raise ConfigError(f"missing required field: {required}")
    family = "gp" if merged["problem"] in ("median", "grade") else "diagnostics"
    for key, value in _FAMILY_DEFAULTS[family].items():
        merged.setdefault(key, value)
    merged.setdefault("output_dir", _default_output_dir(merged))
    try:
        config = ExperimentConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc))
    config.validate()
    return config


def _default_output_dir(merged):
    root = os.environ.get(OUTPUT_ROOT_ENV, "phylex_runs")
    name = "{problem}_{sub}_{est}_l{level}_s{seed}".format(
        problem=merged["problem"], sub=merged.get("subsampling", "full"),
        est=merged.get("estimator", "none"), level=merged.get("level", 1.0),
        seed=merged["seed"])
    return os.path.join(root, name)


def _config_overrides(args) -> dict:
    return {
        "problem": args.problem,
        "seed": args.seed,
        "pop_size": args.pop_size,
        "subsampling": args.subsampling,
        "level": args.level,
        "estimator": args.estimator,
        "depth_limit": args.depth_limit,
        "max_generations": args.max_generations,
        "max_evaluations": args.max_evaluations,
        "genome_length": args.genome_length,
        "snapshot_interval": args.snapshot_interval,
        "output_dir": args.output,
    }


def _add_run_flags(parser):
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--problem",
                        choices=["contradictory", "multipath", "median", "grade"])
    parser.add_argument("--seed", type=int)
    parser.add_argument("--pop-size", dest="pop_size", type=int)
    parser.add_argument("--subsampling", choices=["full", "downsample", "cohort"])
    parser.add_argument("--level", type=float)
    parser.add_argument("--estimator", choices=["none", "ancestor", "relative"])
    parser.add_argument("--depth-limit", dest="depth_limit", type=int)
    parser.add_argument("--max-generations", dest="max_generations", type=int)
    parser.add_argument("--max-evaluations", dest="max_evaluations", type=int)
    parser.add_argument("--genome-length", dest="genome_length", type=int)
    parser.add_argument("--snapshot-interval", dest="snapshot_interval", type=int)
    parser.add_argument("--output", help="run output directory")


def cmd_run(args) -> int:
    file_values = _parse_kv_file(args.config, _CONFIG_KEYS) if args.config else {}
    config = _build_config(file_values, _config_overrides(args))
    result = run_experiment(config)
    print(f"run complete: output={config.output_dir} success={result.success} "
          f"generations={result.ledger.generations_completed} "
          f"evaluations={result.ledger.evaluations_used}")
    return 0


def _sweep_configs(manifest_path):
    values = _parse_kv_file(manifest_path, _CONFIG_KEYS | _SWEEP_ONLY_KEYS)
    workers = int(values.pop("workers", "1"))
    output_root = values.pop("output_root",
                             os.environ.get(OUTPUT_ROOT_ENV, "phylex_sweep"))
    grids = {}
    for key, singular in (("subsamplings", "subsampling"), ("estimators", "estimator"),
                          ("levels", "level"), ("seeds", "seed")):
        if key in values:
            items = [v.strip() for v in values.pop(key).split(",") if v.strip()]
            grids[singular] = [_coerce(singular, v) for v in items]
        elif singular in values:
            grids[singular] = [_coerce(singular, values.pop(singular))]
        else:
            grids[singular] = [None]  # fall back to the config default
    base = {k: _coerce(k, v) for k, v in values.items()}

    configs = []
    for sub in grids["subsampling"]:
        for est in grids["estimator"]:
            for level in grids["level"]:
                for seed in grids["seed"]:
                    merged = dict(base)
                    for key, val in (("subsampling", sub), ("estimator", est),
                                     ("level", level), ("seed", seed)):
                        if val is not None:
                            merged[key] = val
                    merged["output_dir"] = os.path.join(
                        output_root, _default_output_dir(merged).split(os.sep)[-1])
                    configs.append(merged)
    return workers, output_root, configs


def _run_sweep_entry(merged):
    row = {k: merged.get(k, "") for k in
           ("problem", "subsampling", "level", "estimator", "seed")}
    try:
        config = _build_config(merged, {})
        row.update(problem=config.problem, subsampling=config.subsampling,
                   level=config.level, estimator=config.estimator, seed=config.seed)
        result = run_experiment(config)
        row.update(status="ok", success=result.success,
                   generations=result.ledger.generations_completed,
                   evaluations=result.ledger.evaluations_used,
                   output_dir=config.output_dir, error="")
    except (ConfigError, ValueError) as exc:
        row.update(status="error", success="", generations="", evaluations="",
                   output_dir=merged.get("output_dir", ""), error=str(exc))
    except Exception as exc:  # per-run failures must not kill the sweep
        row.update(status="error", success="", generations="", evaluations="",
                   output_dir=merged.get("output_dir", ""), error=repr(exc))
    return row


def cmd_sweep(args) -> int:
    workers, output_root, configs = _sweep_configs(args.manifest)
    seen_dirs = set()
    for merged in configs:
        out = merged["output_dir"]
        if out in seen_dirs:
            raise ConfigError(f"duplicate output directory in sweep: {out}")
        seen_dirs.add(out)
    if workers > 1:
        with multiprocessing.Pool(workers) as pool:
            rows = pool.map(_run_sweep_entry, configs)
    else:
        rows = [_run_sweep_entry(merged) for merged in configs]

    os.makedirs(output_root, exist_ok=True)
    sweep_path = os.path.join(output_root, "sweep.csv")
    columns = ("problem", "subsampling", "level", "estimator", "seed", "status",
               "success", "generations", "evaluations", "output_dir", "error")
    with open(sweep_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)

    failures = sum(1 for row in rows if row["status"] != "ok")
    print(f"sweep complete: {len(rows) - failures}/{len(rows)} runs ok -> {sweep_path}")
    return 1 if failures else 0


def cmd_gen_problem(args) -> int:
    if args.name not in ("median", "grade"):
        raise ConfigError(f"unsupported problem: {args.name}")
    spec = gp.build_problem(args.name, RngStream(args.seed))
    os.makedirs(args.output, exist_ok=True)
    train_path = os.path.join(args.output, f"{args.name}_training.csv")
    test_path = os.path.join(args.output, f"{args.name}_testing.csv")
    gp.write_cases_csv(train_path, spec.training)
    gp.write_cases_csv(test_path, spec.testing)
    print(f"wrote {train_path} ({len(spec.training)} cases) and "
          f"{test_path} ({len(spec.testing)} cases)")
    return 0


def cmd_export_phylo(args) -> int:
    file_values = _parse_kv_file(args.config, _CONFIG_KEYS) if args.config else {}
    config = _build_config(file_values, _config_overrides(args))
    from .engine import Engine
    engine = Engine(config)
    os.makedirs(config.output_dir, exist_ok=True)
    engine.run(config.output_dir)
    engine.phylo.write_snapshot(args.snapshot)
    print(f"wrote {args.snapshot}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phylex",
        description="Phylogeny-informed fitness estimation experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment")
    _add_run_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a manifest of experiments")
    p_sweep.add_argument("manifest")
    p_sweep.set_defaults(func=cmd_sweep)

    p_gen = sub.add_parser("gen-problem", help="write GP training/testing CSVs")
    p_gen.add_argument("name")
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--output", default=".")
    p_gen.set_defaults(func=cmd_gen_problem)

    p_exp = sub.add_parser("export-phylo",
                           help="run an experiment and export its final phylogeny")
    _add_run_flags(p_exp)
    p_exp.add_argument("--snapshot", required=True, help="snapshot CSV path")
    p_exp.set_defaults(func=cmd_export_phylo)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
