"""Shared fixtures-by-another-name for the acceptance suite.

The neural acceptance criteria need full 20,000-update training runs that take
roughly an hour each on one core. Runs are therefore cached on disk under
``tests/.acceptance_cache`` keyed by their exact resolved configuration; a
cold cache trains for real (``python3 tests/acceptance_support.py warm`` does
all runs up front), a warm cache only re-loads checkpoints. Deleting the cache
directory reproduces everything from scratch.
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from neuralbeta.data import SplitSpec, split_dataset, windows_from_dataset
from neuralbeta.models import ModelConfig, NeuralBetaModel
from neuralbeta.serialize import load_params, save_params
from neuralbeta.synthetic import ScenarioConfig, generate_scenario
from neuralbeta.training import TrainConfig, train

CACHE_DIR = Path(__file__).resolve().parent / ".acceptance_cache"
LOOKBACK = 64
N_SAMPLES = 100_000
DATASET_SEEDS = {"stepwise": 101, "cyclical": 202, "constant": 303}

MODEL_CONFIG = dict(sequence_kind="attention", head_kind="nbi", hidden_size=32,
                    dropout=0.0, lookback=LOOKBACK, d=1, n_layers=1, n_heads=2, seed=7)
TRAIN_CONFIG = dict(learning_rate=1e-4, max_updates=20_000, validate_every=1_000,
                    batch_size=256, seed=7)


def dataset_splits(kind: str):
    """The full-scale synthetic dataset for `kind`, split 70/20/10."""
    seed = DATASET_SEEDS[kind]
    cfg = ScenarioConfig(kind, series_length=LOOKBACK + 1, n_samples=N_SAMPLES, seed=seed)
    samples = generate_scenario(cfg)
    train_s, val_s, test_s = split_dataset(
        samples, SplitSpec("by_sample_fraction", fractions=(0.7, 0.2, 0.1)), seed=seed)
    return train_s, val_s, test_s


def window_splits(kind: str):
    return tuple(windows_from_dataset(part, LOOKBACK) for part in dataset_splits(kind))


def _run_key(kind: str, replicate: int) -> tuple:
    resolved = {"kind": kind, "replicate": replicate, "dataset_seed": DATASET_SEEDS[kind],
                "n_samples": N_SAMPLES, "model": MODEL_CONFIG, "training": TRAIN_CONFIG}
    blob = json.dumps(resolved, sort_keys=True)
    return resolved, hashlib.sha256(blob.encode()).hexdigest()[:16]


def get_run(kind: str, replicate: int = 0, keep_snapshots: bool = False) -> dict:
    """Train (or load from cache) the standard desk-scale run for a scenario.

    Returns a dict with the trained model, the validation history, the best
    checkpoint's update index and RMSE, and — when requested — the snapshot
    models recorded at every validation point.
    """
    resolved, digest = _run_key(kind, replicate)
    run_dir = CACHE_DIR / f"{kind}-r{replicate}-{digest}"
    best_path = run_dir / "best.nbck"
    meta_path = run_dir / "run.json"
    snap_dir = run_dir / "snapshots"

    if not (best_path.exists() and meta_path.exists()):
        run_dir.mkdir(parents=True, exist_ok=True)
        train_b, val_b, _ = window_splits(kind)
        model = NeuralBetaModel(ModelConfig(**MODEL_CONFIG))
        cfg = TrainConfig(**TRAIN_CONFIG, keep_snapshots=True)
        t0 = time.time()
        result = train(model, train_b, val_b, cfg,
                       progress=lambda u, l, v: print(
                           f"[{kind}-r{replicate}] update {u}: loss={l:.5f} val={v:.5f}",
                           flush=True))
        if result.diverged:
            raise RuntimeError(f"{kind} acceptance run diverged")
        snap_dir.mkdir(exist_ok=True)
        for ckpt in result.snapshots:
            save_params(snap_dir / f"update{ckpt.update_index:06d}.nbck", ckpt.state,
                        meta={"model_config": asdict(model.config),
                              "update": ckpt.update_index,
                              "validation_rmse": ckpt.validation_rmse})
        model.save(best_path)
        meta_path.write_text(json.dumps({
            "resolved": resolved,
            "history": result.history,
            "best_update": result.best.update_index,
            "best_validation_rmse": result.best.validation_rmse,
            "wall_seconds": time.time() - t0,
        }, indent=2))

    meta = json.loads(meta_path.read_text())
    out = {"model": NeuralBetaModel.load(best_path),
           "history": [tuple(row) for row in meta["history"]],
           "best_update": meta["best_update"],
           "best_validation_rmse": meta["best_validation_rmse"]}
    if keep_snapshots:
        snapshots = []
        for path in sorted(snap_dir.glob("update*.nbck")):
            state, snap_meta = load_params(path)
            m = NeuralBetaModel(ModelConfig(**snap_meta["model_config"]))
            m.load_state_dict(state)
            snapshots.append((snap_meta["update"], m))
        out["snapshots"] = snapshots
    return out


def warm(argv):
    runs = [("stepwise", 0), ("stepwise", 1), ("cyclical", 0), ("constant", 0)]
    if argv:
        runs = [(k, int(r)) for k, r in (a.split(":") for a in argv)]
    for kind, rep in runs:
        print(f"=== warming {kind} replicate {rep} ===", flush=True)
        info = get_run(kind, rep)
        print(f"best val rmse {info['best_validation_rmse']:.6f} "
              f"at update {info['best_update']}", flush=True)


if __name__ == "__main__":
    if len(sys.argv) > 1 and sys.argv[1] == "warm":
        warm(sys.argv[2:])
    else:
        print("usage: acceptance_support.py warm [kind:replicate ...]")
