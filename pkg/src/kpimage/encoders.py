"""Window-to-image encoders.

Four encodings of a 1-D window into an N x N matrix:

* recurrence plot: pairwise absolute differences |x_i - x_j|
* Gramian angular summation field: cos(phi_i + phi_j) of polar angles
* Gramian angular difference field: sin(phi_i - phi_j)
* Markov transition field: empirical bin-transition probabilities

plus channel stacking (1 or 3 encodings) and sklearn-style transformer
wrappers so the encoders drop into ordinary pipelines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import ConfigError

ENCODER_KINDS = ("rp", "gasf", "gadf", "mtf")
DEFAULT_MTF_BINS = 8


@dataclass(frozen=True)
class EncoderSpec:
    """One encoding choice; mtf_bins only matters for kind='mtf'."""

    kind: str
    mtf_bins: int = DEFAULT_MTF_BINS

    def __post_init__(self):
        if self.kind not in ENCODER_KINDS:
            raise ConfigError(
                f"unknown encoder {self.kind!r}; expected one of {ENCODER_KINDS}"
            )
        if self.kind == "mtf" and self.mtf_bins < 2:
            raise ConfigError(f"mtf_bins must be >= 2, got {self.mtf_bins}")

    @property
    def label(self) -> str:
        return self.kind


def parse_encoders(names, mtf_bins: int = DEFAULT_MTF_BINS) -> list[EncoderSpec]:
    """Build encoder specs from names like ['gasf', 'gadf', 'mtf']."""
    if isinstance(names, str):
        names = [n for n in names.split(",") if n]
    specs = [EncoderSpec(kind=n.strip().lower(), mtf_bins=mtf_bins) for n in names]
    if len(specs) not in (1, 3):
        raise ConfigError(
            f"expected exactly 1 or 3 encoders, got {len(specs)}: "
            f"{[s.kind for s in specs]}"
        )
    return specs


def _as_window(window) -> np.ndarray:
    w = np.asarray(window, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ConfigError(f"window must be a nonempty 1-D vector, got shape {w.shape}")
    return w


def recurrence_plot(window) -> np.ndarray:
    """M[i, j] = |x_i - x_j|: symmetric, zero diagonal, nonnegative."""
    w = _as_window(window)
    return np.abs(w[:, None] - w[None, :])


def rescale_unit(window) -> np.ndarray:
    """Min-max map onto [-1, 1]; a constant window maps to all zeros.

    Output endpoints are exact: the subtraction/division chain is monotone,
    so no value ever escapes [-1, 1].
    """
    w = _as_window(window)
    lo, hi = w.min(), w.max()
    if hi == lo:
        return np.zeros_like(w)
    return 2.0 * (w - lo) / (hi - lo) - 1.0


def _polar_angles(window) -> np.ndarray:
    scaled = rescale_unit(window)
    return np.arccos(np.clip(scaled, -1.0, 1.0))


def gasf(window) -> np.ndarray:
    """Gramian angular summation field: cos(phi_i + phi_j)."""
    phi = _polar_angles(window)
    return np.cos(phi[:, None] + phi[None, :])


def gadf(window) -> np.ndarray:
    """Gramian angular difference field: sin(phi_i - phi_j)."""
    phi = _polar_angles(window)
    return np.sin(phi[:, None] - phi[None, :])


def bin_indices(window, n_bins: int) -> np.ndarray:
    """Uniform-width bin index per point over [min, max] of the window.

    The last bin is right-closed (the max lands in bin n_bins - 1); a
    constant window occupies bin 0 only.
    """
    w = _as_window(window)
    lo, hi = w.min(), w.max()
    if hi == lo:
        return np.zeros(w.shape, dtype=np.intp)
    idx = np.floor((w - lo) * n_bins / (hi - lo)).astype(np.intp)
    return np.clip(idx, 0, n_bins - 1)


def transition_matrix(bins: np.ndarray, n_bins: int) -> np.ndarray:
    """Row-normalized first-order transition counts between bins.

    Rows of bins never visited as a source stay all zero (no smoothing).
    """
    counts = np.zeros((n_bins, n_bins), dtype=np.float64)
    if bins.size >= 2:
        np.add.at(counts, (bins[:-1], bins[1:]), 1.0)
    sums = counts.sum(axis=1, keepdims=True)
    out = np.zeros_like(counts)
    np.divide(counts, sums, out=out, where=sums > 0)
    return out


def mtf(window, n_bins: int = DEFAULT_MTF_BINS) -> np.ndarray:
    """Markov transition field: M[i, j] = W[bin(x_i), bin(x_j)]."""
    if n_bins < 2:
        raise ConfigError(f"mtf requires n_bins >= 2, got {n_bins}")
    idx = bin_indices(window, n_bins)
    trans = transition_matrix(idx, n_bins)
    return trans[idx[:, None], idx[None, :]]


_ENCODE_FUNCS = {
    "rp": lambda w, spec: recurrence_plot(w),
    "gasf": lambda w, spec: gasf(w),
    "gadf": lambda w, spec: gadf(w),
    "mtf": lambda w, spec: mtf(w, spec.mtf_bins),
}


def encode_window(window, specs) -> np.ndarray:
    """Encode one window into a (C, N, N) image, one channel per spec.

    Exactly 1 or 3 specs are accepted, mirroring grayscale vs color input
    to the downstream network.
    """
    specs = list(specs)
    if len(specs) not in (1, 3):
        raise ConfigError(f"expected exactly 1 or 3 encoder specs, got {len(specs)}")
    return np.stack([_ENCODE_FUNCS[s.kind](window, s) for s in specs])


def encode_batch(windows, specs) -> np.ndarray:
    """Encode (n, W) windows into an (n, C, W, W) image stack."""
    windows = np.asarray(windows, dtype=np.float64)
    if windows.ndim != 2:
        raise ConfigError(f"expected (n, window) array, got shape {windows.shape}")
    return np.stack([encode_window(w, specs) for w in windows])


class _WindowTransformer(TransformerMixin, BaseEstimator):
    """Stateless base: fit records the window length, transform encodes."""

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.n_features_in_ = X.shape[1]
        return self

    def _validate(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ConfigError(
                f"window length {X.shape[1]} does not match fitted "
                f"length {self.n_features_in_}"
            )
        return X


class RecurrencePlot(_WindowTransformer):
    """Transforms (n, W) windows into (n, W, W) recurrence plots."""

    def transform(self, X):
        X = self._validate(X)
        return np.abs(X[:, :, None] - X[:, None, :])


class GramianAngularField(_WindowTransformer):
    """Transforms windows into GASF ('summation') or GADF ('difference')."""

    def __init__(self, method: str = "summation"):
        self.method = method

    def fit(self, X, y=None):
        if self.method not in ("summation", "difference"):
            raise ConfigError(
                f"method must be 'summation' or 'difference', got {self.method!r}"
            )
        return super().fit(X, y)

    def transform(self, X):
        X = self._validate(X)
        lo = X.min(axis=1, keepdims=True)
        hi = X.max(axis=1, keepdims=True)
        span = hi - lo
        scaled = np.zeros_like(X)
        np.divide(2.0 * (X - lo), span, out=scaled, where=span > 0)
        scaled -= np.where(span > 0, 1.0, 0.0)
        phi = np.arccos(np.clip(scaled, -1.0, 1.0))
        if self.method == "summation":
            return np.cos(phi[:, :, None] + phi[:, None, :])
        return np.sin(phi[:, :, None] - phi[:, None, :])


class MarkovTransitionField(_WindowTransformer):
    """Transforms windows into (n, W, W) Markov transition fields."""

    def __init__(self, n_bins: int = DEFAULT_MTF_BINS):
        self.n_bins = n_bins

    def fit(self, X, y=None):
        if self.n_bins < 2:
            raise ConfigError(f"n_bins must be >= 2, got {self.n_bins}")
        return super().fit(X, y)

    def transform(self, X):
        X = self._validate(X)
        return np.stack([mtf(w, self.n_bins) for w in X])


class WindowImager(_WindowTransformer):
    """Stacks 1 or 3 encodings into (n, C, W, W) images for the regressor."""

    def __init__(self, encoders=("mtf",), mtf_bins: int = DEFAULT_MTF_BINS):
        self.encoders = encoders
        self.mtf_bins = mtf_bins

    def fit(self, X, y=None):
        self.specs_ = parse_encoders(self.encoders, self.mtf_bins)
        return super().fit(X, y)

    def transform(self, X):
        X = self._validate(X)
        return encode_batch(X, self.specs_)
