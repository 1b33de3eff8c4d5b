"""Rolling OLS against exponentially weighted WLS, and why the half-life
matters.

On stepwise data the newest observations carry all the signal after a regime
jump, so down-weighting old data helps a lot; on constant data every
observation is equally informative and weighting only adds variance. This
demo tunes the half-life on a validation split and reports the improvement
over OLS on held-out data for each scenario.

Run:  python3 demos/03_rolling_baselines.py   (about a minute)
"""

import numpy as np

from neuralbeta.baselines import exponential_weights, tune_half_life
from neuralbeta.data import SplitSpec, split_dataset, windows_from_dataset
from neuralbeta.evaluation import build_report, evaluate_baselines
from neuralbeta.synthetic import ScenarioConfig, generate_scenario

GRID = (1, 2, 4, 8, 16, 32, 64, 128)

print("half-life -> normalized weight on the newest / 8th-newest point (h=64):")
for hl in (2, 8, 32):
    w = exponential_weights(64, hl)
    print(f"  hl={hl:>3}: newest {w[-1]:.4f}, lag 8 {w[-9]:.4f}, oldest {w[0]:.2e}")

for kind in ("stepwise", "cyclical", "constant"):
    cfg = ScenarioConfig(kind, series_length=65, n_samples=20_000, seed=1)
    samples = generate_scenario(cfg)
    splits = split_dataset(samples, SplitSpec(fractions=(0.7, 0.2, 0.1)), seed=1)
    _, val_b, test_b = (windows_from_dataset(s, 64) for s in splits)

    scheme = tune_half_life(val_b, GRID)
    report = build_report(kind, test_b, evaluate_baselines(test_b, scheme))

    print(f"\n=== {kind} (tuned half-life: {scheme.half_life}) ===")
    for row in report.rows():
        print(f"  {row['estimator']:>4s}: rmse(y) {row['rmse_y']:.4f}  "
              f"rmse(beta) {row['rmse_beta']:.4f}  "
              f"improvement {row['improvement_pct']:+.2f} pp")

print("""
The pattern: weighting buys a large improvement when beta moves (stepwise),
a modest one when it oscillates (cyclical - a fixed decay profile cannot
align itself with the phase of the cycle), and nothing when beta is constant
(the tuner correctly walks to the longest half-life on the grid).
""")
