"""Train a small NeuralBeta model end to end on stepwise data.

The interpretable (NBI) variant never predicts beta directly: the sequence
model looks at the lookback window and emits one positive weight per lag,
and beta comes out of the regularized weighted-least-squares closed form
under a learned Gaussian prior. Training minimizes the mean squared hedging
error of the one-step prediction.

This is a scaled-down run (a few minutes); the full desk-scale protocol is
20,000 updates at batch 256 and takes about an hour per scenario.

Run:  python3 demos/04_train_neuralbeta.py
"""

import numpy as np

from neuralbeta.data import SplitSpec, split_dataset, windows_from_dataset
from neuralbeta.evaluation import build_report, evaluate_baselines, evaluate_model
from neuralbeta.models import ModelConfig, NeuralBetaModel
from neuralbeta.synthetic import ScenarioConfig, generate_scenario
from neuralbeta.training import TrainConfig, train

cfg = ScenarioConfig("stepwise", series_length=65, n_samples=6000, seed=3)
samples = generate_scenario(cfg)
splits = split_dataset(samples, SplitSpec(fractions=(0.7, 0.2, 0.1)), seed=3)
train_b, val_b, test_b = (windows_from_dataset(s, 64) for s in splits)
print(f"windows: {train_b.n} train / {val_b.n} validation / {test_b.n} test")

model = NeuralBetaModel(ModelConfig(
    sequence_kind="attention", head_kind="nbi",
    hidden_size=32, lookback=64, d=1, n_layers=1, n_heads=2, seed=0,
))
n_params = sum(p.size for p in model.params.values())
print(f"model: causal self-attention -> per-lag weights -> regularized WLS "
      f"({n_params} parameters)")

result = train(
    model, train_b, val_b,
    TrainConfig(learning_rate=1e-4, max_updates=1500, validate_every=250,
                batch_size=256, seed=0),
    progress=lambda u, l, v: print(f"  update {u:>5d}  train loss {l:.4f}  val rmse {v:.4f}"),
)
print(f"best checkpoint: update {result.best.update_index}, "
      f"validation rmse {result.best.validation_rmse:.4f}")

estimators = {"ols": evaluate_baselines(test_b)["ols"],
              "nbi": evaluate_model(model, test_b)}
report = build_report("stepwise", test_b, estimators)
print("\nheld-out test set:")
for row in report.rows():
    print(f"  {row['estimator']:>4s}: rmse(y) {row['rmse_y']:.4f}  "
          f"rmse(beta) {row['rmse_beta']:.4f}  "
          f"improvement {row['improvement_pct']:+.2f} pp")

weights = estimators["nbi"]["weights"]
print(f"\nmean learned weight by lag (oldest -> newest), averaged over test windows:")
mean_w = weights.mean(axis=0)
for lo in range(0, 64, 16):
    chunk = " ".join(f"{v:.2f}" for v in mean_w[lo:lo + 16])
    print(f"  lags {lo:>2}-{lo + 15:>2}: {chunk}")
print("""
Even in this short run the model has learned to overweight recent lags on
average — and unlike an exponential schedule, the profile is conditional:
windows whose regime jump is recent get a much sharper cutoff (see demo 05).
""")
