"""Causal window sampling and standardization.

Slides a fixed-size window over a series, standardizes each window and
its next-value label with statistics of the points strictly before the
window (so no future information leaks in), and splits the resulting
samples chronologically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

DEFAULT_WINDOW = 32
DEFAULT_STRIDE = 1
STD_EPSILON = 1e-8
# standardized labels past this magnitude only arise when the epsilon
# guard fired on a degenerate (empty-ish or constant) history; real
# labels sit orders of magnitude below it
TRAIN_LABEL_LIMIT = 1e6


@dataclass(frozen=True)
class StandardizationStats:
    """Mean/std (indicator units) used to standardize one sample."""

    mean: float
    std: float

    @property
    def guarded_std(self) -> float:
        return max(self.std, STD_EPSILON)


@dataclass(frozen=True)
class WindowSample:
    """A standardized window, its standardized next-value label, and the
    raw values needed to undo the transform later."""

    window: np.ndarray
    label: float
    stats: StandardizationStats
    index: int
    raw_label: float
    raw_last: float  # last raw window value; the persistence prediction


def slide_windows(values, width: int = DEFAULT_WINDOW, stride: int = DEFAULT_STRIDE):
    """Enumerate (raw window, raw label, start index) triples.

    One entry per start i (stepping by stride) with i + width < len(values);
    the label is the value immediately after the window. A series no longer
    than the window yields an empty list.
    """
    if width < 2:
        raise ConfigError(f"window width must be >= 2, got {width}")
    if stride < 1:
        raise ConfigError(f"stride must be >= 1, got {stride}")
    values = np.asarray(values, dtype=np.float64)
    out = []
    for i in range(0, max(len(values) - width, 0), stride):
        out.append((values[i:i + width].copy(), float(values[i + width]), i))
    return out


def history_stats(history) -> StandardizationStats:
    """Mean and population std of the points before a window.

    An empty history falls back to (0, 1) so the first window passes
    through unchanged.
    """
    history = np.asarray(history, dtype=np.float64)
    if history.size == 0:
        return StandardizationStats(mean=0.0, std=1.0)
    return StandardizationStats(
        mean=float(np.mean(history)), std=float(np.std(history))
    )


def causal_standardize(window, label: float, history, index: int = 0) -> WindowSample:
    """Standardize a window and its label with pre-window statistics.

    The divisor is max(std, epsilon), which keeps the transform total on
    constant histories (zero-filled gaps are common in sanitized logs).
    """
    stats = history_stats(history)
    window = np.asarray(window, dtype=np.float64)
    scale = stats.guarded_std
    std_window = (window - stats.mean) / scale
    std_label = (label - stats.mean) / scale
    return WindowSample(
        window=std_window,
        label=float(std_label),
        stats=stats,
        index=index,
        raw_label=float(label),
        raw_last=float(window[-1]),
    )


def destandardize(value, stats: StandardizationStats):
    """Map a standardized value back to indicator units."""
    return np.asarray(value, dtype=np.float64) * stats.guarded_std + stats.mean


def make_samples(values, width: int = DEFAULT_WINDOW,
                 stride: int = DEFAULT_STRIDE) -> list[WindowSample]:
    """Slide windows over a series and causally standardize each one."""
    values = np.asarray(values, dtype=np.float64)
    return [
        causal_standardize(window, label, values[:index], index=index)
        for window, label, index in slide_windows(values, width, stride)
    ]


def filter_trainable(samples) -> list[WindowSample]:
    """Drop samples whose standardized label is a guard artifact.

    A window standardized against a constant or single-point history
    divides by the epsilon floor, blowing the label up to ~1e8 or more.
    Such labels carry no learnable signal at any reasonable scale and
    destabilize training, so they are excluded from training sets.
    Evaluation keeps every sample; only fitting uses this filter.
    """
    return [s for s in samples if abs(s.label) <= TRAIN_LABEL_LIMIT]


def split_train_test(samples, ratio: float = 0.8):
    """Chronological split: first floor(ratio * n) samples train, rest test.

    No shuffling, so overlapping windows never leak across the split.
    """
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"split ratio must be in (0, 1), got {ratio}")
    n_train = int(ratio * len(samples))
    return samples[:n_train], samples[n_train:]
