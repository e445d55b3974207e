"""Adam optimizer, step learning-rate schedule, and training config."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError


@dataclass
class TrainConfig:
    """Hyperparameters of one training run.

    Defaults follow the image-regressor recipe: 120 epochs, batches of
    32, Adam at lr 0.01 decayed by 10x at epochs 50 and 90, weight decay
    5e-4, pinball loss at the 0.05/0.50/0.95 levels.
    """

    epochs: int = 120
    batch_size: int = 32
    lr: float = 0.01
    weight_decay: float = 5e-4
    lr_milestones: tuple = (50, 90)
    lr_factor: float = 0.1
    loss: str = "quantile"
    quantiles: tuple = (0.05, 0.50, 0.95)
    seed: int = 0
    val_ratio: float = 0.0
    early_stop_patience: int | None = None

    def problems(self) -> list:
        out = []
        if self.epochs < 1:
            out.append(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            out.append(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.lr > 0:
            out.append(f"lr must be positive, got {self.lr}")
        if self.weight_decay < 0:
            out.append(f"weight_decay must be >= 0, got {self.weight_decay}")
        if not 0 < self.lr_factor <= 1:
            out.append(f"lr_factor must be in (0, 1], got {self.lr_factor}")
        if any(m < 0 for m in self.lr_milestones):
            out.append(f"lr_milestones must be >= 0, got {self.lr_milestones}")
        if self.loss not in ("mse", "quantile"):
            out.append(f"loss must be 'mse' or 'quantile', got {self.loss!r}")
        if self.loss == "quantile":
            qs = tuple(self.quantiles)
            if not qs or any(not 0 < g < 1 for g in qs):
                out.append(f"quantiles must lie in (0, 1), got {qs}")
            elif list(qs) != sorted(qs):
                out.append(f"quantiles must be sorted ascending, got {qs}")
        if not 0 <= self.val_ratio < 1:
            out.append(f"val_ratio must be in [0, 1), got {self.val_ratio}")
        if self.early_stop_patience is not None and self.early_stop_patience < 1:
            out.append(
                f"early_stop_patience must be >= 1, got {self.early_stop_patience}"
            )
        return out

    def validate(self) -> "TrainConfig":
        problems = self.problems()
        if problems:
            raise ConfigError(problems)
        return self

    @property
    def output_heads(self) -> int:
        return len(self.quantiles) if self.loss == "quantile" else 1


def lr_at(epoch: int, config: TrainConfig) -> float:
    """Learning rate for a 0-based epoch under the step schedule."""
    lr = config.lr
    for _ in range(sum(1 for m in config.lr_milestones if m <= epoch)):
        lr *= config.lr_factor
    return lr


class Adam:
    """Adam with additive L2 weight decay folded into the gradient."""

    def __init__(self, net, weight_decay: float = 0.0,
                 betas=(0.9, 0.999), eps: float = 1e-8):
        self.weight_decay = weight_decay
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.t = 0
        self._m = {path: np.zeros_like(p) for path, p, _ in net.parameters()}
        self._v = {path: np.zeros_like(p) for path, p, _ in net.parameters()}

    def step(self, net, lr: float):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1 ** self.t
        bc2 = 1.0 - b2 ** self.t
        for path, p, g in net.parameters():
            if self.weight_decay:
                g = g + self.weight_decay * p
            m = self._m[path]
            v = self._v[path]
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * (g * g)
            p -= lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
