"""Return-series data model: samples, dataset slicing, lookback windows,
and train/validation/test splits.

Time indices follow the 1-based slicing convention used throughout the
package: a series of length T covers times 1..T, and ``slice_series(s, t)``
returns the observations in the half-open interval (s, t], i.e. rows
s..t-1 of the underlying arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ContractError, InsufficientHistoryError

__all__ = ["SeriesSample", "WindowBatch", "SplitSpec", "slice_series", "make_windows",
           "windows_from_dataset", "split_dataset"]


@dataclass(frozen=True)
class SeriesSample:
    """One response series y against d explanatory series x, with optional
    ground-truth coefficients (synthetic data only)."""

    x: np.ndarray               # (T, d)
    y: np.ndarray               # (T,)
    beta_true: np.ndarray | None = None     # (T, d)
    id: str = ""
    dates: np.ndarray | None = None         # (T,), optional ISO-8601 strings
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim != 2:
            raise ContractError(f"x must be 2-d (T, d), got {x.shape}")
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ContractError(f"y length {y.shape} does not match x rows {x.shape}")
        if x.shape[0] < 2 or x.shape[1] < 1:
            raise ContractError(f"need T >= 2 and d >= 1, got {x.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.beta_true is not None:
            bt = np.asarray(self.beta_true, dtype=np.float64)
            if bt.shape != x.shape:
                raise ContractError(f"beta_true shape {bt.shape} does not match x {x.shape}")
            object.__setattr__(self, "beta_true", bt)
        if self.dates is not None and len(self.dates) != x.shape[0]:
            raise ContractError("dates length does not match series length")

    @property
    def length(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class WindowBatch:
    """A batch of lookback windows plus their strictly-later next-step targets."""

    windows_x: np.ndarray       # (n, h, d)
    windows_y: np.ndarray       # (n, h)
    next_x: np.ndarray          # (n, d)
    next_y: np.ndarray          # (n,)
    beta_next_true: np.ndarray | None = None    # (n, d)
    origin: tuple = ()          # n pairs (sample id, window-end time index t)

    def __post_init__(self):
        n, h, d = self.windows_x.shape
        if self.windows_y.shape != (n, h) or self.next_x.shape != (n, d) or self.next_y.shape != (n,):
            raise ContractError("window batch arrays are inconsistent")
        if len(self.origin) != n:
            raise ContractError("origin must identify every row")

    @property
    def n(self) -> int:
        return self.windows_x.shape[0]

    @property
    def h(self) -> int:
        return self.windows_x.shape[1]

    @property
    def d(self) -> int:
        return self.windows_x.shape[2]

    def take(self, idx) -> "WindowBatch":
        idx = np.asarray(idx)
        return WindowBatch(
            self.windows_x[idx], self.windows_y[idx], self.next_x[idx], self.next_y[idx],
            None if self.beta_next_true is None else self.beta_next_true[idx],
            tuple(self.origin[i] for i in idx),
        )


def concat_batches(batches) -> WindowBatch:
    batches = list(batches)
    if not batches:
        raise ContractError("no window batches to concatenate")
    has_beta = all(b.beta_next_true is not None for b in batches)
    origin = tuple(o for b in batches for o in b.origin)
    return WindowBatch(
        np.concatenate([b.windows_x for b in batches]),
        np.concatenate([b.windows_y for b in batches]),
        np.concatenate([b.next_x for b in batches]),
        np.concatenate([b.next_y for b in batches]),
        np.concatenate([b.beta_next_true for b in batches]) if has_beta else None,
        origin,
    )


def slice_series(sample: SeriesSample, s: int, t: int) -> SeriesSample:
    """Observations of `sample` in the time interval (s, t], length t - s."""
    if not (0 <= s < t <= sample.length):
        raise ContractError(f"invalid slice ({s}, {t}] for series of length {sample.length}")
    return SeriesSample(
        sample.x[s:t], sample.y[s:t],
        None if sample.beta_true is None else sample.beta_true[s:t],
        sample.id,
        None if sample.dates is None else sample.dates[s:t],
        dict(sample.meta),
    )


def make_windows(sample: SeriesSample, h: int) -> WindowBatch:
    """All lookback windows of length h: the window ending at time t (rows
    t-h..t-1) is paired with the target observation at time t+1 (row t).
    A series of length T yields exactly T - h windows."""
    T, d = sample.x.shape
    if h < 1:
        raise ConfigError(f"lookback must be positive, got {h}")
    if T <= h:
        raise InsufficientHistoryError(f"series {sample.id!r} has length {T} <= lookback {h}")
    n = T - h
    idx = np.arange(n)[:, None] + np.arange(h)[None, :]
    return WindowBatch(
        windows_x=sample.x[idx],
        windows_y=sample.y[idx],
        next_x=sample.x[h:],
        next_y=sample.y[h:],
        beta_next_true=None if sample.beta_true is None else sample.beta_true[h:],
        origin=tuple((sample.id, h + k) for k in range(n)),
    )


def windows_from_dataset(samples, h: int) -> WindowBatch:
    """Pool the windows of every sample into one batch."""
    return concat_batches(make_windows(s, h) for s in samples)


@dataclass(frozen=True)
class SplitSpec:
    """Either a seeded random split by sample fractions, or a date-based split
    (each sample assigned by its window-target dates)."""

    mode: str = "by_sample_fraction"                    # or "by_date_range"
    fractions: tuple = (0.7, 0.2, 0.1)
    date_boundaries: tuple | None = None                # (train_end, val_end) ISO strings

    def __post_init__(self):
        if self.mode not in ("by_sample_fraction", "by_date_range"):
            raise ConfigError(f"unknown split mode {self.mode!r}")
        if self.mode == "by_sample_fraction":
            if len(self.fractions) != 3 or abs(sum(self.fractions) - 1.0) > 1e-9:
                raise ConfigError(f"fractions must be 3 values summing to 1, got {self.fractions}")
            if any(f < 0 for f in self.fractions):
                raise ConfigError("fractions must be non-negative")
        else:
            if not self.date_boundaries or len(self.date_boundaries) != 2:
                raise ConfigError("date mode needs (train_end, val_end) boundaries")


def split_dataset(samples, spec: SplitSpec, seed: int = 0):
    """Partition `samples` into (train, validation, test).

    Fraction mode shuffles deterministically by seed, floors each partition
    size and gives the remainder to train. Date mode cuts each sample's
    timeline at the boundaries so no window target straddles a boundary.
    """
    samples = list(samples)
    if not samples:
        raise ConfigError("empty dataset")
    if spec.mode == "by_sample_fraction":
        rng = np.random.default_rng(seed)
        order = rng.permutation(len(samples))
        n = len(samples)
        n_val = int(n * spec.fractions[1])
        n_test = int(n * spec.fractions[2])
        n_train = n - n_val - n_test
        if min(n_train, n_val, n_test) < 1 and min(spec.fractions) > 0:
            raise ConfigError(f"dataset of {n} samples leaves an empty partition")
        train = [samples[i] for i in order[:n_train]]
        val = [samples[i] for i in order[n_train:n_train + n_val]]
        test = [samples[i] for i in order[n_train + n_val:]]
        return train, val, test
    # date mode: each sample contributes its dated segments to each period
    train_end, val_end = spec.date_boundaries
    train, val, test = [], [], []
    for s in samples:
        if s.dates is None:
            raise ConfigError(f"sample {s.id!r} has no dates; date split impossible")
        d = np.asarray(s.dates)
        cut1 = int(np.searchsorted(d, train_end, side="right"))
        cut2 = int(np.searchsorted(d, val_end, side="right"))
        if cut1 >= 2:
            train.append(slice_series(s, 0, cut1))
        if cut2 - cut1 >= 2:
            val.append(slice_series(s, cut1, cut2))
        if s.length - cut2 >= 2:
            test.append(slice_series(s, cut2, s.length))
    if not train or not val or not test:
        raise ConfigError("date boundaries leave an empty partition")
    return train, val, test
