"""Reference architectures built on the engine.

Three regressors share the same head convention: out_heads is 1 for a
plain point estimate (mse loss) or one unit per quantile level.
"""

from __future__ import annotations

import numpy as np

from .engine import (
    BatchNorm2D,
    Conv1D,
    Conv2D,
    Dense,
    Flatten,
    GlobalAvgPool,
    MaxPool1D,
    MaxPool2D,
    Network,
    ReLU,
    ResidualBlock,
    TrainConfig,
)
from .errors import ConfigError

MODEL_KINDS = ("hatami", "resnet20", "cnn1d")

HATAMI_WIDTHS = (16, 32)
RESNET_WIDTHS = (16, 32, 64)
RESNET_BLOCKS_PER_STAGE = 3


def build_hatami(in_channels: int, out_heads: int, image_size: int = 32,
                 widths=HATAMI_WIDTHS, rng=None, dtype=np.float32) -> Network:
    """Two conv/pool stages and a dense head: 3 learnable layers total."""
    w1, w2 = widths
    layers = [
        Conv2D(w1, kernel=3, padding=1), ReLU(), MaxPool2D(2),
        Conv2D(w2, kernel=3, padding=1), ReLU(), MaxPool2D(2),
        Flatten(), Dense(out_heads),
    ]
    return Network(layers, (in_channels, image_size, image_size),
                   dtype=dtype, rng=rng)


def build_resnet20(in_channels: int, out_heads: int, image_size: int = 32,
                   shortcut: str = "identity", rng=None,
                   dtype=np.float32) -> Network:
    """20-weight-layer residual net: 3x3 stem, 3 stages of 3 blocks.

    Stage widths are 16/32/64 with a stride-2 first block at each stage
    transition. The default parameter-free shortcut keeps the weight
    layer count at exactly 20; shortcut='projection' swaps in strided
    1x1 convolutions where shapes change.
    """
    layers = [Conv2D(16, kernel=3, padding=1, bias=False), BatchNorm2D(), ReLU()]
    for stage, width in enumerate(RESNET_WIDTHS):
        for block in range(RESNET_BLOCKS_PER_STAGE):
            stride = 2 if stage > 0 and block == 0 else 1
            layers.append(ResidualBlock(width, stride=stride, shortcut=shortcut))
    layers += [GlobalAvgPool(), Dense(out_heads)]
    return Network(layers, (in_channels, image_size, image_size),
                   dtype=dtype, rng=rng)


def build_cnn1d(in_channels: int, out_heads: int, length: int = 32,
                widths=HATAMI_WIDTHS, rng=None, dtype=np.float32) -> Network:
    """Raw-window baseline: two conv/pool stages over the time axis."""
    w1, w2 = widths
    layers = [
        Conv1D(w1, kernel=3, padding=1), ReLU(), MaxPool1D(2),
        Conv1D(w2, kernel=3, padding=1), ReLU(), MaxPool1D(2),
        Flatten(), Dense(out_heads),
    ]
    return Network(layers, (in_channels, length), dtype=dtype, rng=rng)


def build_model(kind: str, in_channels: int, out_heads: int,
                image_size: int = 32, shortcut: str = "identity",
                widths=None, rng=None, dtype=np.float32) -> Network:
    if kind == "hatami":
        return build_hatami(in_channels, out_heads, image_size,
                            widths or HATAMI_WIDTHS, rng, dtype)
    if kind == "resnet20":
        return build_resnet20(in_channels, out_heads, image_size,
                              shortcut, rng, dtype)
    if kind == "cnn1d":
        return build_cnn1d(in_channels, out_heads, image_size,
                           widths or HATAMI_WIDTHS, rng, dtype)
    raise ConfigError(f"unknown model {kind!r}; expected one of {MODEL_KINDS}")


def default_train_config(kind: str, loss: str = "quantile",
                         seed: int = 0) -> TrainConfig:
    """Per-architecture training recipe.

    Image models: 120 epochs, batch 32, Adam lr 0.01 stepped down 10x at
    epochs 50 and 90, weight decay 5e-4. The 1-D baseline instead runs
    up to 300 epochs at a flat lr 0.001 with batch 128 and early
    stopping (patience 20) on a 20% validation tail.
    """
    if kind == "cnn1d":
        return TrainConfig(epochs=300, batch_size=128, lr=0.001,
                           weight_decay=0.0, lr_milestones=(), loss=loss,
                           seed=seed, val_ratio=0.2, early_stop_patience=20)
    if kind in ("hatami", "resnet20"):
        return TrainConfig(loss=loss, seed=seed)
    raise ConfigError(f"unknown model {kind!r}; expected one of {MODEL_KINDS}")
