"""Mini-batch training loop with optional early stopping."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, ShapeError
from .losses import make_loss
from .optim import Adam, TrainConfig, lr_at


def _epoch_order(rng, n):
    return rng.permutation(n)


def fit_network(net, X, y, config: TrainConfig, rng=None,
                X_val=None, y_val=None) -> dict:
    """Train net on (X, y) in place and return the training record.

    Shuffles each epoch with rng, keeps the final partial batch, and
    averages batch losses weighted by batch size. When validation data
    and early_stop_patience are set, stops after that many epochs
    without improvement and restores the best-scoring state.
    """
    config.validate()
    X = np.asarray(X)
    y = np.asarray(y)
    if len(X) != len(y):
        raise ShapeError(f"X has {len(X)} samples but y has {len(y)}")
    if len(X) == 0:
        raise ConfigError("cannot train on an empty sample set")
    if rng is None:
        rng = np.random.default_rng(config.seed)
    loss_fn = make_loss(config.loss, config.quantiles)
    optimizer = Adam(net, weight_decay=config.weight_decay)
    n = len(X)
    history = []
    val_history = []
    best_val = np.inf
    best_state = None
    best_epoch = -1
    use_early_stop = (config.early_stop_patience is not None
                      and X_val is not None and len(X_val) > 0)
    epochs_run = 0
    for epoch in range(config.epochs):
        lr = lr_at(epoch, config)
        order = _epoch_order(rng, n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            pred = net.forward(X[idx], training=True)
            loss, grad = loss_fn(pred, y[idx])
            net.backward(grad)
            optimizer.step(net, lr)
            total += loss * len(idx)
        history.append(total / n)
        epochs_run = epoch + 1
        if use_early_stop:
            val_loss, _ = loss_fn(net.forward(X_val, training=False), y_val)
            val_history.append(val_loss)
            if val_loss < best_val:
                best_val = val_loss
                best_state = net.copy_state()
                best_epoch = epoch
            elif epoch - best_epoch >= config.early_stop_patience:
                break
    if best_state is not None:
        net.load_state(best_state)
    return {
        "history": history,
        "val_history": val_history,
        "epochs_run": epochs_run,
        "best_epoch": best_epoch if best_state is not None else None,
    }
