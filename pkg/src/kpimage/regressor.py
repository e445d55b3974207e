"""Estimator wrapper: encoded windows in, next-value predictions out."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, column_or_1d

from .engine import TrainConfig, fit_network
from .errors import ConfigError, ShapeError
from .models import MODEL_KINDS, build_model

_PREDICT_CHUNK = 256


class ConvImageRegressor(RegressorMixin, BaseEstimator):
    """Convolutional regressor over encoded windows.

    X is (n, C, H, W) for the image architectures ('hatami',
    'resnet20') or (n, C, L) for 'cnn1d'; y is the scalar next value
    per sample. With loss='quantile' the network grows one head per
    level and predict() returns the median head; loss='mse' trains a
    single head.
    """

    def __init__(self, architecture="hatami", loss="quantile",
                 quantiles=(0.05, 0.50, 0.95), epochs=120, batch_size=32,
                 lr=0.01, weight_decay=5e-4, lr_milestones=(50, 90),
                 lr_factor=0.1, seed=0, shortcut="identity", widths=None,
                 val_ratio=0.0, early_stop_patience=None):
        self.architecture = architecture
        self.loss = loss
        self.quantiles = quantiles
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.weight_decay = weight_decay
        self.lr_milestones = lr_milestones
        self.lr_factor = lr_factor
        self.seed = seed
        self.shortcut = shortcut
        self.widths = widths
        self.val_ratio = val_ratio
        self.early_stop_patience = early_stop_patience

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs, batch_size=self.batch_size, lr=self.lr,
            weight_decay=self.weight_decay,
            lr_milestones=tuple(self.lr_milestones),
            lr_factor=self.lr_factor, loss=self.loss,
            quantiles=tuple(self.quantiles), seed=self.seed,
            val_ratio=self.val_ratio,
            early_stop_patience=self.early_stop_patience,
        ).validate()

    def fit(self, X, y):
        if self.architecture not in MODEL_KINDS:
            raise ConfigError(
                f"unknown architecture {self.architecture!r}; "
                f"expected one of {MODEL_KINDS}"
            )
        config = self._train_config()
        want_ndim = 3 if self.architecture == "cnn1d" else 4
        X = check_array(X, allow_nd=True, dtype=np.float32)
        if X.ndim != want_ndim:
            raise ShapeError(
                f"{self.architecture} expects {want_ndim}-d input "
                f"(batch first), got shape {X.shape}"
            )
        y = column_or_1d(y).astype(np.float32)
        if len(X) != len(y):
            raise ShapeError(f"X has {len(X)} samples but y has {len(y)}")
        if want_ndim == 4 and X.shape[2] != X.shape[3]:
            raise ShapeError(f"images must be square, got shape {X.shape}")

        init_seq, shuffle_seq = np.random.SeedSequence(self.seed).spawn(2)
        size = X.shape[2] if want_ndim == 4 else X.shape[2]
        self.network_ = build_model(
            self.architecture, in_channels=X.shape[1],
            out_heads=config.output_heads, image_size=size,
            shortcut=self.shortcut, widths=self.widths,
            rng=np.random.default_rng(init_seq),
        )
        # chronological tail as validation: shuffling would leak future
        n_train = int((1.0 - config.val_ratio) * len(X)) \
            if config.val_ratio > 0 else len(X)
        X_val = X[n_train:] if n_train < len(X) else None
        y_val = y[n_train:] if n_train < len(X) else None
        record = fit_network(
            self.network_, X[:n_train], y[:n_train], config,
            rng=np.random.default_rng(shuffle_seq),
            X_val=X_val, y_val=y_val,
        )
        self.config_ = config
        self.loss_history_ = record["history"]
        self.val_history_ = record["val_history"]
        self.epochs_run_ = record["epochs_run"]
        self.input_shape_ = self.network_.input_shape
        self.n_outputs_ = config.output_heads
        return self

    def _forward(self, X) -> np.ndarray:
        check_is_fitted(self, "network_")
        X = check_array(X, allow_nd=True, dtype=np.float32)
        if X.shape[1:] != self.input_shape_:
            raise ShapeError(
                f"expected samples of shape {self.input_shape_}, "
                f"got array of shape {X.shape}"
            )
        out = [self.network_.forward(X[i:i + _PREDICT_CHUNK], training=False)
               for i in range(0, len(X), _PREDICT_CHUNK)]
        return np.concatenate(out, axis=0)

    def _median_index(self) -> int:
        levels = tuple(self.config_.quantiles)
        return levels.index(0.5) if 0.5 in levels else len(levels) // 2

    def predict(self, X) -> np.ndarray:
        out = self._forward(X)
        if self.config_.loss == "quantile":
            return out[:, self._median_index()].astype(np.float64)
        return out[:, 0].astype(np.float64)

    def predict_quantiles(self, X) -> np.ndarray:
        out = self._forward(X)
        if self.config_.loss != "quantile":
            raise ConfigError("predict_quantiles needs loss='quantile'")
        return out.astype(np.float64)

    def predict_interval(self, X):
        """Lower and upper head predictions as a (lo, hi) pair."""
        q = self.predict_quantiles(X)
        return q[:, 0], q[:, -1]
