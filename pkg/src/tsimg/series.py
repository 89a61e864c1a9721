"""Time-series containers, windowing, split standardization and synthetic
generators.

A univariate series is a plain 1-D float64 ndarray. Multivariate series are
wrapped in :class:`MultivariateSeries` so variate names and the (d, T)
orientation travel with the data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyResultError,
    InvalidPeriodError,
    ShapeMismatchError,
    UnstableCoefficientError,
)


@dataclass
class MultivariateSeries:
    """d variates observed over T time steps, stored as a (d, T) matrix."""

    values: np.ndarray
    variate_names: list[str] | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim == 1:
            self.values = self.values[None, :]
        if self.values.ndim != 2 or self.values.shape[0] < 1:
            raise ShapeMismatchError(f"expected (d, T) matrix, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ShapeMismatchError("series contains NaN/Inf")
        if self.variate_names is not None and len(self.variate_names) != self.values.shape[0]:
            raise ShapeMismatchError("variate_names length != d")

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]


@dataclass
class WindowSample:
    """One sliding-window sample: a look-back block plus either a forecast
    target or a class label (exactly one of the two)."""

    lookback: np.ndarray                 # (d, H)
    target: np.ndarray | None = None     # (d, T') for forecasting
    class_label: int | None = None       # for classification

    def __post_init__(self):
        if (self.target is None) == (self.class_label is None):
            raise ShapeMismatchError("exactly one of target/class_label must be set")


@dataclass
class SplitStats:
    """Per-variate mean/std computed on the training split only."""

    mean: np.ndarray                     # (d,)
    std: np.ndarray                      # (d,)
    degenerate: np.ndarray = field(default=None)  # bool (d,), True where std == 0

    def __post_init__(self):
        if self.degenerate is None:
            self.degenerate = self.std == 0.0


def slide_windows(series: MultivariateSeries, lookback: int, horizon: int,
                  stride: int = 1) -> list[WindowSample]:
    """Cut contiguous (lookback, target) pairs out of a series.

    Raises EmptyResultError when the series is shorter than
    lookback + horizon.
    """
    if lookback < 1 or horizon < 0 or stride < 1:
        raise ShapeMismatchError("lookback >= 1, horizon >= 0, stride >= 1 required")
    T = series.length
    if T < lookback + horizon:
        raise EmptyResultError(
            f"series length {T} < lookback {lookback} + horizon {horizon}")
    n = (T - lookback - horizon) // stride + 1
    out = []
    for s in range(n):
        start = s * stride
        lb = series.values[:, start:start + lookback]
        tg = series.values[:, start + lookback:start + lookback + horizon]
        out.append(WindowSample(lookback=lb.copy(), target=tg.copy()))
    return out


def chronological_split(series: MultivariateSeries,
                        ratios: tuple[float, float, float] = (0.7, 0.1, 0.2),
                        ) -> tuple[MultivariateSeries, MultivariateSeries, MultivariateSeries]:
    """Split a series into chronological train/val/test blocks."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ShapeMismatchError("split ratios must sum to 1")
    T = series.length
    n_train = int(T * ratios[0])
    n_val = int(T * ratios[1])
    v = series.values
    return (MultivariateSeries(v[:, :n_train].copy(), series.variate_names),
            MultivariateSeries(v[:, n_train:n_train + n_val].copy(), series.variate_names),
            MultivariateSeries(v[:, n_train + n_val:].copy(), series.variate_names))


def standardize_by_train(train: MultivariateSeries, val: MultivariateSeries,
                         test: MultivariateSeries,
                         ) -> tuple[MultivariateSeries, MultivariateSeries,
                                    MultivariateSeries, SplitStats]:
    """Per-variate z-score of all three splits using train statistics.

    Variates with zero train std are mapped to all zeros and flagged in the
    returned SplitStats instead of raising.
    """
    if not (train.d == val.d == test.d):
        raise ShapeMismatchError("splits disagree on number of variates")
    mean = train.values.mean(axis=1)
    std = train.values.std(axis=1)
    degenerate = std == 0.0
    safe_std = np.where(degenerate, 1.0, std)

    def transform(s: MultivariateSeries) -> MultivariateSeries:
        z = (s.values - mean[:, None]) / safe_std[:, None]
        z[degenerate, :] = 0.0
        return MultivariateSeries(z, s.variate_names)

    stats = SplitStats(mean=mean, std=std, degenerate=degenerate)
    return transform(train), transform(val), transform(test), stats


def destandardize(series: MultivariateSeries, stats: SplitStats) -> MultivariateSeries:
    """Inverse of :func:`standardize_by_train` (non-degenerate variates)."""
    safe_std = np.where(stats.degenerate, 1.0, stats.std)
    v = series.values * safe_std[:, None] + stats.mean[:, None]
    return MultivariateSeries(v, series.variate_names)


def gen_periodic(period: int, length: int, waveform: str = "sine",
                 seed: int = 0, noise_std: float = 0.0) -> np.ndarray:
    """Generate a perfectly periodic series plus optional Gaussian noise.

    With noise_std=0 the output satisfies x[t] == x[t + period] exactly.
    waveform is one of {"sine", "sawtooth", "composite"}.
    """
    if period < 1 or period > length:
        raise InvalidPeriodError(f"period {period} outside [1, {length}]")
    t = np.arange(length)
    phase = (t % period).astype(np.float64) / period
    if waveform == "sine":
        base = np.sin(2 * np.pi * phase)
    elif waveform == "sawtooth":
        base = 2.0 * phase - 1.0
    elif waveform == "composite":
        base = (np.sin(2 * np.pi * phase)
                + 0.5 * np.sin(4 * np.pi * phase)
                + 0.25 * np.cos(6 * np.pi * phase))
    else:
        raise ShapeMismatchError(f"unknown waveform {waveform!r}")
    if noise_std > 0:
        rng = np.random.default_rng(seed)
        base = base + rng.normal(0.0, noise_std, size=length)
    return base


def gen_ar1(phi: float, length: int, seed: int = 0) -> np.ndarray:
    """AR(1) process x[t] = phi * x[t-1] + eps with unit-variance Gaussian
    innovations; deterministic given the seed."""
    if abs(phi) >= 1.0:
        raise UnstableCoefficientError(f"|phi| must be < 1, got {phi}")
    rng = np.random.default_rng(seed)
    eps = rng.normal(0.0, 1.0, size=length)
    x = np.empty(length)
    prev = 0.0
    for t in range(length):
        prev = phi * prev + eps[t]
        x[t] = prev
    return x
