"""Training losses: each returns (scalar loss, gradient wrt predictions)."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, ShapeError


def mse_loss(pred, target):
    """Mean squared error over every element of pred."""
    pred = np.asarray(pred)
    target = np.asarray(target).reshape(pred.shape)
    diff = pred - target
    loss = float(np.mean(diff * diff))
    grad = (2.0 / diff.size) * diff
    return loss, grad.astype(pred.dtype, copy=False)


def quantile_loss(pred, target, quantiles):
    """Mean pinball loss across a batch and K quantile heads.

    pred has shape (B, K); target has shape (B,) or (B, 1). For residual
    d = y - yhat the per-element loss is max(q * d, (q - 1) * d); the
    subgradient at the kink (d == 0) is taken as zero.
    """
    q = np.asarray(quantiles, dtype=np.float64)
    if q.ndim != 1 or q.size == 0 or np.any(q <= 0.0) or np.any(q >= 1.0):
        raise ConfigError("quantile levels must lie strictly inside (0, 1)")
    pred = np.asarray(pred)
    if pred.ndim != 2 or pred.shape[1] != q.size:
        raise ShapeError(
            f"quantile predictions must have shape (B, {q.size}), got {pred.shape}"
        )
    target = np.asarray(target).reshape(pred.shape[0], 1)
    d = target - pred
    q = q[None, :].astype(pred.dtype)
    loss = float(np.mean(np.where(d > 0, q * d, (q - 1.0) * d)))
    grad = np.where(d > 0, -q, np.where(d < 0, 1.0 - q, 0.0))
    grad = grad / d.size
    return loss, grad.astype(pred.dtype, copy=False)


def make_loss(name: str, quantiles=None):
    """Resolve a loss name to a (pred, target) -> (loss, grad) callable."""
    if name == "mse":
        return mse_loss
    if name == "quantile":
        if quantiles is None:
            raise ConfigError("quantile loss needs quantile levels")
        levels = tuple(float(g) for g in quantiles)

        def _loss(pred, target):
            return quantile_loss(pred, target, levels)

        return _loss
    raise ConfigError(f"unknown loss {name!r}; expected 'mse' or 'quantile'")
