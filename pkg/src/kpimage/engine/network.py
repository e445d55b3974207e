"""Sequential network container with build-time shape resolution."""

from __future__ import annotations

import numpy as np

from ..errors import EngineStateError, ShapeError
from .layers import Layer, layer_from_spec


class Network:
    """An ordered stack of layers acting on batches.

    Shapes (without the batch axis) are resolved once at construction;
    a mismatch anywhere raises ShapeError naming the offending layer.
    """

    def __init__(self, layers, input_shape, dtype=np.float32, rng=None):
        if rng is None:
            rng = np.random.default_rng(0)
        self.layers = list(layers)
        self.input_shape = tuple(int(d) for d in input_shape)
        self.dtype = np.dtype(dtype)
        shape = self.input_shape
        for i, layer in enumerate(self.layers):
            if not isinstance(layer, Layer):
                raise ShapeError(f"layer {i} is not a Layer: {layer!r}")
            try:
                shape = layer.build(shape, rng, self.dtype)
            except ShapeError as exc:
                raise ShapeError(f"layer {i} ({layer.kind}): {exc}") from None
        self.output_shape = shape
        self._forwarded = False

    def forward(self, x, training: bool = True):
        x = np.ascontiguousarray(x, dtype=self.dtype)
        if x.ndim != len(self.input_shape) + 1 or x.shape[1:] != self.input_shape:
            raise ShapeError(
                f"network expects batches of shape {self.input_shape}, "
                f"got array of shape {x.shape}"
            )
        for layer in self.layers:
            x = layer.forward(x, training)
        self._forwarded = True
        return x

    def backward(self, gy):
        if not self._forwarded:
            raise EngineStateError("backward called without a preceding forward")
        gy = np.ascontiguousarray(gy, dtype=self.dtype)
        for layer in reversed(self.layers):
            gy = layer.backward(gy)
        self._forwarded = False
        return gy

    def parameters(self):
        """Yield (path, param, grad) triples in deterministic layer order."""
        for i, layer in enumerate(self.layers):
            grads = layer.grads()
            for name, p in layer.params().items():
                yield f"{i}.{name}", p, grads[name]

    def state_tensors(self):
        """Yield (path, array) for every param and buffer, in layer order."""
        for i, layer in enumerate(self.layers):
            for name, p in layer.params().items():
                yield f"{i}.{name}", p
            for name, b in layer.buffers().items():
                yield f"{i}.buffers.{name}", b

    def layer_specs(self):
        return [layer.spec() for layer in self.layers]

    def copy_state(self):
        return {path: arr.copy() for path, arr in self.state_tensors()}

    def load_state(self, state: dict):
        for path, arr in self.state_tensors():
            src = state[path]
            if src.shape != arr.shape:
                raise ShapeError(
                    f"state tensor {path}: shape {src.shape} != {arr.shape}"
                )
            arr[...] = src


def count_params(net: Network) -> int:
    return sum(p.size for _, p, _ in net.parameters())


def count_macs(net: Network) -> int:
    """Multiply-accumulate ops for one sample: conv and dense only."""
    return sum(layer.macs() for layer in net.layers)


def learnable_layer_count(net: Network) -> int:
    """Number of weight-bearing layers (conv/dense), unrolling residuals."""
    total = 0
    for layer in net.layers:
        if hasattr(layer, "weight_layer_count"):
            total += layer.weight_layer_count()
        elif layer.has_weights:
            total += 1
    return total


def layer_table(net: Network) -> list[dict]:
    """Per-layer summary rows: kind, output shape, params, MACs."""
    rows = []
    for i, layer in enumerate(net.layers):
        rows.append({
            "index": i,
            "kind": layer.kind,
            "out_shape": layer.out_shape,
            "params": layer.param_count(),
            "macs": layer.macs(),
        })
    return rows


def network_from_specs(specs, input_shape, dtype=np.float32, rng=None) -> Network:
    return Network([layer_from_spec(s) for s in specs], input_shape,
                   dtype=dtype, rng=rng)
