"""NeuralBeta: time-varying regression coefficients from sequence models.

A numpy/scipy library for estimating conditional betas: synthetic scenario
generators with known ground truth, rolling OLS/WLS baselines, GRU and
attention sequence models (built on an in-package autodiff engine) with a
direct and an interpretable weighted-least-squares head, plus training,
evaluation and a command-line front end.
"""

from .baselines import (BetaEstimate, WeightScheme, batched_regularized_wls_beta,
                        batched_wls_beta, exponential_weights, regularized_wls,
                        rolling_ols, rolling_wls, tune_half_life)
from .data import (SeriesSample, SplitSpec, WindowBatch, concat_batches,
                   make_windows, slice_series, split_dataset, windows_from_dataset)
from .errors import (ConfigError, ContractError, InsufficientHistoryError,
                     NeuralBetaError, NonFiniteError, ShapeError, SingularSystemError)
from .evaluation import (EvaluationReport, WeightProfile, build_report, correlation_study,
                         evaluate_baselines, evaluate_model, improvement_vs_ols,
                         period_sweep, rmse_beta, rmse_y, stepwise_jump_cohort_profiles,
                         volatility_overlay, weight_profile)
from .models import ModelConfig, NeuralBetaModel, predict_y
from .panel import DataFormatError, export_csv, ingest_csv
from .serialize import load_params, save_params
from .synthetic import (ScenarioConfig, bayes_posterior_mean, cyclical_beta_path,
                        gen_constant, gen_cyclical, gen_market_like_panel,
                        gen_stepwise, gen_xy, generate_scenario)
from .tensor import Tensor
from .training import (AdamState, Checkpoint, TrainConfig, TrainResult, adam_step,
                       mse_loss, train, validation_rmse)

__version__ = "0.1.0"
