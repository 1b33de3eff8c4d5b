"""Command-line entry point for experiments.

Subcommands: generate | baseline | train | evaluate | weights | sweep |
ingest-check. Options may be preloaded from a JSON config file (`--config`);
explicit flags override file values. Relative output directories are resolved
against $NEURALBETA_OUTPUT_ROOT when it is set.

Exit codes: 0 success, 2 I/O failure, 64 usage error, 65 data error,
70 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .baselines import WeightScheme, tune_half_life
from .data import SplitSpec, split_dataset, windows_from_dataset
from .errors import ConfigError, ContractError, NeuralBetaError, NonFiniteError, SingularSystemError
from .evaluation import (build_report, evaluate_baselines, evaluate_model,
                         stepwise_jump_cohort_profiles, weight_profile)
from .models import ModelConfig, NeuralBetaModel
from .panel import DataFormatError, export_csv, ingest_csv
from .synthetic import ScenarioConfig, generate_scenario
from .training import TrainConfig, train

EXIT_OK = 0
EXIT_IO = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_NUMERIC = 70

DEFAULT_HALF_LIFE_GRID = (1, 2, 4, 8, 16, 32, 64, 128)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _out_dir(arg) -> Path:
    root = os.environ.get("NEURALBETA_OUTPUT_ROOT")
    path = Path(arg)
    if root and not path.is_absolute():
        path = Path(root) / path
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(out: Path, resolved_config: dict, artifacts: list):
    config_blob = json.dumps(resolved_config, sort_keys=True)
    manifest = {
        "config": resolved_config,
        "config_sha256": hashlib.sha256(config_blob.encode()).hexdigest(),
        "artifacts": {name: _sha256_file(out / name) for name in artifacts},
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


def _write_report_csv(path, reports):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["scenario", "estimator", "rmse_y", "rmse_beta",
                                                "improvement_pct", "n_windows"])
        writer.writeheader()
        for report in reports:
            for row in report.rows():
                writer.writerow(row)


def _load_split(args, samples):
    if getattr(args, "train_end", None):
        spec = SplitSpec("by_date_range", date_boundaries=(args.train_end, args.val_end))
    else:
        spec = SplitSpec("by_sample_fraction", fractions=tuple(args.fractions))
    return split_dataset(samples, spec, seed=args.seed)


def _model_config(args, d) -> ModelConfig:
    return ModelConfig(sequence_kind=args.sequence, head_kind=args.head,
                       hidden_size=args.hidden_size, dropout=args.dropout,
                       lookback=args.lookback, d=d, n_layers=args.n_layers,
                       n_heads=args.n_heads, seed=args.seed)


def _train_config(args) -> TrainConfig:
    max_updates = 100_000 if args.paper_scale else args.max_updates
    return TrainConfig(learning_rate=args.learning_rate, max_updates=max_updates,
                       validate_every=args.validate_every, batch_size=args.batch_size,
                       seed=args.seed, early_stop_patience=args.early_stop_patience)


# -- subcommands -------------------------------------------------------------

def cmd_generate(args):
    cfg = ScenarioConfig(kind=args.kind, series_length=args.length,
                         n_samples=args.n_samples, seed=args.seed)
    samples = generate_scenario(cfg)
    out = _out_dir(args.out)
    export_csv(samples, out / "dataset.csv")
    _write_manifest(out, {"command": "generate", **asdict(cfg)}, ["dataset.csv"])
    print(f"wrote {len(samples)} series to {out / 'dataset.csv'}")
    return EXIT_OK


def cmd_baseline(args):
    samples = ingest_csv(args.data)
    train_s, val_s, test_s = _load_split(args, samples)
    h = args.lookback
    val_batch = windows_from_dataset(val_s, h)
    test_batch = windows_from_dataset(test_s, h)
    scheme = tune_half_life(val_batch, args.half_life_grid)
    metrics = evaluate_baselines(test_batch, scheme)
    report = build_report(args.scenario_label, test_batch, metrics)
    out = _out_dir(args.out)
    _write_report_csv(out / "report.csv", [report])
    resolved = {"command": "baseline", "data": str(args.data), "lookback": h,
                "half_life_grid": list(args.half_life_grid), "tuned_half_life": scheme.half_life,
                "seed": args.seed, "fractions": list(args.fractions)}
    _write_manifest(out, resolved, ["report.csv"])
    for row in report.rows():
        print(f"{row['estimator']:>8s}  rmse_y={row['rmse_y']:.6f}  improvement={row['improvement_pct']:+.2f}pp")
    return EXIT_OK


def cmd_train(args):
    samples = ingest_csv(args.data)
    train_s, val_s, _ = _load_split(args, samples)
    d = samples[0].d
    model = NeuralBetaModel(_model_config(args, d))
    tcfg = _train_config(args)
    train_batch = windows_from_dataset(train_s, args.lookback)
    val_batch = windows_from_dataset(val_s, args.lookback)
    result = train(model, train_batch, val_batch, tcfg,
                   progress=None if args.quiet else
                   lambda u, l, v: print(f"update {u}: train_loss={l:.5f} val_rmse={v:.5f}", flush=True))
    out = _out_dir(args.out)
    model.save(out / "checkpoint.nbck")
    result.write_log(out / "runlog.csv")
    resolved = {"command": "train", "data": str(args.data),
                "model": asdict(model.config), "training": asdict(tcfg),
                "fractions": list(args.fractions), "seed": args.seed}
    with open(out / "resolved_config.json", "w") as fh:
        json.dump(resolved, fh, indent=2, sort_keys=True)
    _write_manifest(out, resolved, ["checkpoint.nbck", "runlog.csv", "resolved_config.json"])
    print(f"best validation rmse {result.best.validation_rmse:.6f} at update {result.best.update_index}")
    if result.diverged:
        print("training diverged; kept last good checkpoint", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_evaluate(args):
    model = NeuralBetaModel.load(args.checkpoint)
    samples = ingest_csv(args.data)
    d = samples[0].d
    if d != model.config.d:
        raise DataFormatError(f"checkpoint expects d={model.config.d}, dataset has d={d}")
    if args.split == "train" and not args.force:
        raise ConfigError("refusing to evaluate on the training split (use --force)")
    parts = dict(zip(("train", "validation", "test"), _load_split(args, samples)))
    batch = windows_from_dataset(parts[args.split], model.config.lookback)
    metrics = {"ols": evaluate_baselines(batch)["ols"], "model": evaluate_model(model, batch)}
    report = build_report(args.scenario_label, batch, metrics)
    out = _out_dir(args.out)
    _write_report_csv(out / "report.csv", [report])
    _write_manifest(out, {"command": "evaluate", "checkpoint": str(args.checkpoint),
                          "data": str(args.data), "split": args.split, "seed": args.seed,
                          "fractions": list(args.fractions)}, ["report.csv"])
    for row in report.rows():
        print(f"{row['estimator']:>8s}  rmse_y={row['rmse_y']:.6f}  improvement={row['improvement_pct']:+.2f}pp")
    return EXIT_OK


def cmd_weights(args):
    model = NeuralBetaModel.load(args.checkpoint)
    if model.config.head_kind != "nbi":
        print("error: checkpoint has the direct (nb) head; weight profiles need nbi", file=sys.stderr)
        return EXIT_DATA
    out = _out_dir(args.out)
    artifacts = []
    if args.jump_positions:
        profiles = stepwise_jump_cohort_profiles(model, args.jump_positions,
                                                 n_per_position=args.cohort_size, seed=args.seed)
        with open(out / "lag_profile.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["jump_position", "lag", "mean_weight", "mean_log_weight"])
            for pos, prof in profiles.items():
                for lag in range(len(prof.mean_weight)):
                    writer.writerow([pos, lag, prof.mean_weight[lag], prof.mean_log_weight[lag]])
        artifacts.append("lag_profile.csv")
    if args.data:
        samples = ingest_csv(args.data)
        batch = windows_from_dataset(samples, model.config.lookback)
        prof = weight_profile(model, batch, cohort=str(args.data))
        with open(out / "cohort_profile.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lag", "mean_weight", "mean_log_weight"])
            for lag in range(len(prof.mean_weight)):
                writer.writerow([lag, prof.mean_weight[lag], prof.mean_log_weight[lag]])
        artifacts.append("cohort_profile.csv")
    if not artifacts:
        print("error: nothing to do; pass --jump-positions and/or --data", file=sys.stderr)
        return EXIT_USAGE
    _write_manifest(out, {"command": "weights", "checkpoint": str(args.checkpoint),
                          "jump_positions": list(args.jump_positions or []),
                          "cohort_size": args.cohort_size, "seed": args.seed}, artifacts)
    return EXIT_OK


def cmd_sweep(args):
    samples = ingest_csv(args.data)
    train_s, val_s, _ = _load_split(args, samples)
    d = samples[0].d
    rows = []
    for lookback in args.grid_lookback:
        train_batch = windows_from_dataset(train_s, lookback)
        val_batch = windows_from_dataset(val_s, lookback)
        for hidden in args.grid_hidden:
            for drop in args.grid_dropout:
                cfg = ModelConfig(sequence_kind=args.sequence, head_kind=args.head,
                                  hidden_size=hidden, dropout=drop, lookback=lookback,
                                  d=d, n_layers=args.n_layers, n_heads=args.n_heads,
                                  seed=args.seed)
                try:
                    model = NeuralBetaModel(cfg)
                    result = train(model, train_batch, val_batch, _train_config(args))
                    rows.append({"lookback": lookback, "hidden_size": hidden, "dropout": drop,
                                 "best_val_rmse": result.best.validation_rmse, "status": "ok"})
                except NeuralBetaError as exc:
                    rows.append({"lookback": lookback, "hidden_size": hidden, "dropout": drop,
                                 "best_val_rmse": float("nan"), "status": f"failed: {exc}"})
                if not args.quiet:
                    print(f"lookback={lookback} hidden={hidden} dropout={drop}: {rows[-1]['best_val_rmse']:.6f}"
                          if rows[-1]["status"] == "ok" else f"grid point failed: {rows[-1]['status']}")
    out = _out_dir(args.out)
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["lookback", "hidden_size", "dropout",
                                                "best_val_rmse", "status"])
        writer.writeheader()
        writer.writerows(rows)
    artifacts = ["sweep.csv"]
    ok = [r for r in rows if r["status"] == "ok"]
    for axis in ("lookback", "hidden_size", "dropout"):
        name = f"marginal_{axis}.csv"
        with open(out / name, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([axis, "best_val_rmse"])
            for value in sorted({r[axis] for r in ok}):
                writer.writerow([value, min(r["best_val_rmse"] for r in ok if r[axis] == value)])
        artifacts.append(name)
    _write_manifest(out, {"command": "sweep", "data": str(args.data),
                          "grid": {"lookback": list(args.grid_lookback),
                                   "hidden": list(args.grid_hidden),
                                   "dropout": list(args.grid_dropout)},
                          "seed": args.seed}, artifacts)
    return EXIT_OK


def cmd_ingest_check(args):
    samples = ingest_csv(args.data)
    d = samples[0].d
    total = sum(s.length for s in samples)
    print(f"{args.data}: {len(samples)} assets, d={d}, {total} rows, schema OK")
    for s in samples[:5]:
        span = f"{s.dates[0]}..{s.dates[-1]}" if s.dates is not None else "undated"
        print(f"  {s.id}: T={s.length} {span}")
    return EXIT_OK


# -- argument plumbing -------------------------------------------------------

def _int_list(text):
    return [int(v) for v in str(text).split(",") if v != ""]


def _float_list(text):
    return [float(v) for v in str(text).split(",") if v != ""]


def _add_split_args(p):
    p.add_argument("--fractions", type=_float_list, default=[0.7, 0.2, 0.1],
                   help="train,val,test sample fractions (default 0.7,0.2,0.1)")
    p.add_argument("--train-end", default=None, help="date split: last training date (ISO)")
    p.add_argument("--val-end", default=None, help="date split: last validation date (ISO)")


def _add_model_args(p):
    p.add_argument("--sequence", choices=["gru", "attention"], default="attention")
    p.add_argument("--head", choices=["nb", "nbi"], default="nbi")
    p.add_argument("--hidden-size", type=int, default=32)
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--lookback", type=int, default=64)
    p.add_argument("--n-layers", type=int, default=2)
    p.add_argument("--n-heads", type=int, default=4)


def _add_train_args(p):
    p.add_argument("--learning-rate", type=float, default=1e-4)
    p.add_argument("--max-updates", type=int, default=20_000)
    p.add_argument("--validate-every", type=int, default=1_000)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--early-stop-patience", type=int, default=None)
    p.add_argument("--paper-scale", action="store_true",
                   help="use the full 100,000-update budget")
    p.add_argument("--quiet", action="store_true")


def build_parser() -> _Parser:
    parser = _Parser(prog="neuralbeta", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", default=None, help="JSON file of default option values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic scenario dataset")
    p.add_argument("--kind", choices=["constant", "stepwise", "cyclical"], required=True)
    p.add_argument("--n-samples", type=int, default=1000)
    p.add_argument("--length", type=int, default=65)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("baseline", help="run OLS and tuned-WLS baselines")
    p.add_argument("--data", required=True)
    p.add_argument("--lookback", type=int, default=64)
    p.add_argument("--half-life-grid", type=_float_list, default=list(DEFAULT_HALF_LIFE_GRID))
    p.add_argument("--scenario-label", default="dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_split_args(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("train", help="train a model and keep the best checkpoint")
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_split_args(p)
    _add_model_args(p)
    _add_train_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint on the test split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=["train", "validation", "test"], default="test")
    p.add_argument("--force", action="store_true", help="allow evaluating on the training split")
    p.add_argument("--scenario-label", default="dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_split_args(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("weights", help="interpretable-head weight profiles")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--jump-positions", type=_int_list, default=None,
                   help="comma-separated stepwise jump positions to profile")
    p.add_argument("--cohort-size", type=int, default=1000)
    p.add_argument("--data", default=None, help="optional panel CSV to profile")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("sweep", help="hyperparameter grid sweep")
    p.add_argument("--data", required=True)
    p.add_argument("--grid-lookback", type=_int_list, default=[64])
    p.add_argument("--grid-hidden", type=_int_list, default=[32, 64])
    p.add_argument("--grid-dropout", type=_float_list, default=[0.0, 0.25])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_split_args(p)
    _add_model_args(p)
    _add_train_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ingest-check", help="validate a panel CSV")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_ingest_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    # configuration file supplies defaults; explicit flags win
    argv = list(sys.argv[1:] if argv is None else argv)
    if "--config" in argv:
        idx = argv.index("--config")
        try:
            with open(argv[idx + 1]) as fh:
                file_defaults = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error reading config: {exc}", file=sys.stderr)
            return EXIT_USAGE
        for key, value in file_defaults.items():
            flag = "--" + key.replace("_", "-")
            if flag not in argv:
                argv += [flag, str(value)]
        del argv[idx:idx + 2]
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:               # argparse exits on usage errors/--help
            return int(exc.code or EXIT_OK)
        return args.func(args)
    except DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (SingularSystemError, NonFiniteError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
