"""From-scratch numpy network engine: layers, losses, Adam, training."""

from .checkpoint import checkpoint_bytes, load_checkpoint, save_checkpoint
from .gradcheck import GradCheckReport, grad_check
from .layers import (
    BatchNorm2D,
    Conv1D,
    Conv2D,
    Dense,
    Flatten,
    GlobalAvgPool,
    Layer,
    MaxPool1D,
    MaxPool2D,
    ReLU,
    ResidualBlock,
    layer_from_spec,
)
from .losses import make_loss, mse_loss, quantile_loss
from .network import (
    Network,
    count_macs,
    count_params,
    layer_table,
    learnable_layer_count,
    network_from_specs,
)
from .optim import Adam, TrainConfig, lr_at
from .train import fit_network

__all__ = [
    "Adam", "BatchNorm2D", "Conv1D", "Conv2D", "Dense", "Flatten",
    "GlobalAvgPool", "GradCheckReport", "Layer", "MaxPool1D", "MaxPool2D",
    "Network", "ReLU", "ResidualBlock", "TrainConfig", "checkpoint_bytes",
    "count_macs", "count_params", "fit_network", "grad_check",
    "layer_from_spec", "layer_table", "learnable_layer_count", "lr_at",
    "load_checkpoint", "make_loss", "mse_loss", "network_from_specs",
    "quantile_loss", "save_checkpoint",
]
