"""Layers of the minimal differentiable-network engine.

Every layer resolves its shapes at build time, caches what its backward
pass needs during forward, and exposes learnable parameters, gradients,
and persistent buffers as ordered name -> array dicts. Weights use He
initialization (zero-mean normal, std sqrt(2 / fan_in)); biases start at
zero.
"""

from __future__ import annotations

import numpy as np

from ..errors import EngineStateError, ShapeError


def _he_normal(rng, shape, fan_in, dtype):
    std = np.sqrt(2.0 / fan_in)
    return (rng.standard_normal(shape) * std).astype(dtype)


def _im2col(x, kh, kw, sh, sw, ph, pw):
    """Extract sliding patches into a (B, C, kh, kw, Ho, Wo) view copy."""
    if ph or pw:
        x = np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
    B, C, H, W = x.shape
    Ho = (H - kh) // sh + 1
    Wo = (W - kw) // sw + 1
    cols = np.empty((B, C, kh, kw, Ho, Wo), dtype=x.dtype)
    for i in range(kh):
        for j in range(kw):
            cols[:, :, i, j] = x[:, :, i:i + sh * Ho:sh, j:j + sw * Wo:sw]
    return cols, Ho, Wo


def _col2im(cols, x_shape, kh, kw, sh, sw, ph, pw):
    """Scatter-add patch gradients back to the (unpadded) input shape."""
    B, C, H, W = x_shape
    Ho, Wo = cols.shape[-2:]
    out = np.zeros((B, C, H + 2 * ph, W + 2 * pw), dtype=cols.dtype)
    for i in range(kh):
        for j in range(kw):
            out[:, :, i:i + sh * Ho:sh, j:j + sw * Wo:sw] += cols[:, :, i, j]
    if ph or pw:
        out = out[:, :, ph:ph + H, pw:pw + W]
    return out


class Layer:
    kind = "base"
    has_weights = False  # True for conv/dense: counts toward network depth

    def __init__(self):
        self.in_shape = None
        self.out_shape = None
        self._p = {}  # learnable parameters
        self._g = {}  # their gradients
        self._b = {}  # persistent non-learnable buffers

    def build(self, in_shape, rng, dtype):
        self.in_shape = tuple(in_shape)
        self.out_shape = self.in_shape
        return self.out_shape

    def forward(self, x, training=True):
        raise NotImplementedError

    def backward(self, gy):
        raise NotImplementedError

    def params(self):
        return self._p

    def grads(self):
        return self._g

    def buffers(self):
        return self._b

    def param_count(self) -> int:
        return sum(p.size for p in self.params().values())

    def macs(self) -> int:
        return 0

    def spec(self) -> dict:
        return {"kind": self.kind}

    def _need_cache(self, cache):
        if cache is None:
            raise EngineStateError(
                f"{self.kind}: backward called without a cached forward"
            )
        return cache


class Dense(Layer):
    kind = "dense"
    has_weights = True

    def __init__(self, units: int, bias: bool = True):
        super().__init__()
        self.units = units
        self.use_bias = bias
        self._x = None

    def build(self, in_shape, rng, dtype):
        if len(in_shape) != 1:
            raise ShapeError(f"dense expects flat input, got shape {in_shape}")
        self.in_shape = tuple(in_shape)
        fan_in = in_shape[0]
        self._p["w"] = _he_normal(rng, (fan_in, self.units), fan_in, dtype)
        if self.use_bias:
            self._p["b"] = np.zeros(self.units, dtype=dtype)
        self._g = {k: np.zeros_like(v) for k, v in self._p.items()}
        self.out_shape = (self.units,)
        return self.out_shape

    def forward(self, x, training=True):
        self._x = x
        y = x @ self._p["w"]
        if self.use_bias:
            y = y + self._p["b"]
        return y

    def backward(self, gy):
        x = self._need_cache(self._x)
        self._g["w"][...] = x.T @ gy
        if self.use_bias:
            self._g["b"][...] = gy.sum(axis=0)
        self._x = None
        return gy @ self._p["w"].T

    def macs(self) -> int:
        return self.in_shape[0] * self.units

    def spec(self) -> dict:
        return {"kind": self.kind, "units": self.units, "bias": self.use_bias}


class Conv2D(Layer):
    kind = "conv2d"
    has_weights = True

    def __init__(self, out_channels: int, kernel: int = 3, stride: int = 1,
                 padding: int = 0, bias: bool = True):
        super().__init__()
        self.out_channels = out_channels
        self.kernel = kernel
        self.stride = stride
        self.padding = padding
        self.use_bias = bias
        self._mat = None

    def build(self, in_shape, rng, dtype):
        if len(in_shape) != 3:
            raise ShapeError(f"conv2d expects (C, H, W) input, got {in_shape}")
        C, H, W = in_shape
        k, s, p = self.kernel, self.stride, self.padding
        Ho = (H + 2 * p - k) // s + 1
        Wo = (W + 2 * p - k) // s + 1
        if Ho < 1 or Wo < 1:
            raise ShapeError(
                f"conv2d kernel {k} stride {s} padding {p} does not fit {in_shape}"
            )
        self.in_shape = tuple(in_shape)
        fan_in = C * k * k
        self._p["w"] = _he_normal(rng, (self.out_channels, C, k, k), fan_in, dtype)
        if self.use_bias:
            self._p["b"] = np.zeros(self.out_channels, dtype=dtype)
        self._g = {k_: np.zeros_like(v) for k_, v in self._p.items()}
        self.out_shape = (self.out_channels, Ho, Wo)
        return self.out_shape

    def forward(self, x, training=True):
        k, s, p = self.kernel, self.stride, self.padding
        cols, Ho, Wo = _im2col(x, k, k, s, s, p, p)
        B = x.shape[0]
        mat = cols.transpose(0, 4, 5, 1, 2, 3).reshape(B * Ho * Wo, -1)
        self._mat = mat
        self._batch = B
        w2d = self._p["w"].reshape(self.out_channels, -1).T
        y = mat @ w2d
        if self.use_bias:
            y = y + self._p["b"]
        return y.reshape(B, Ho, Wo, self.out_channels).transpose(0, 3, 1, 2)

    def backward(self, gy):
        mat = self._need_cache(self._mat)
        B = self._batch
        C, Ho, Wo = self.out_shape
        gmat = np.ascontiguousarray(gy.transpose(0, 2, 3, 1)).reshape(-1, C)
        self._g["w"][...] = (mat.T @ gmat).T.reshape(self._p["w"].shape)
        if self.use_bias:
            self._g["b"][...] = gmat.sum(axis=0)
        w2d = self._p["w"].reshape(self.out_channels, -1)
        gcols = (gmat @ w2d).reshape(B, Ho, Wo, self.in_shape[0],
                                     self.kernel, self.kernel)
        gcols = gcols.transpose(0, 3, 4, 5, 1, 2)
        self._mat = None
        k, s, p = self.kernel, self.stride, self.padding
        return _col2im(gcols, (B,) + self.in_shape, k, k, s, s, p, p)

    def macs(self) -> int:
        _, Ho, Wo = self.out_shape
        C = self.in_shape[0]
        return Ho * Wo * self.out_channels * C * self.kernel * self.kernel

    def spec(self) -> dict:
        return {
            "kind": self.kind, "out_channels": self.out_channels,
            "kernel": self.kernel, "stride": self.stride,
            "padding": self.padding, "bias": self.use_bias,
        }


class Conv1D(Layer):
    kind = "conv1d"
    has_weights = True

    def __init__(self, out_channels: int, kernel: int = 3, stride: int = 1,
                 padding: int = 0, bias: bool = True):
        super().__init__()
        self.out_channels = out_channels
        self.kernel = kernel
        self.stride = stride
        self.padding = padding
        self.use_bias = bias
        self._mat = None

    def build(self, in_shape, rng, dtype):
        if len(in_shape) != 2:
            raise ShapeError(f"conv1d expects (C, L) input, got {in_shape}")
        C, L = in_shape
        k, s, p = self.kernel, self.stride, self.padding
        Lo = (L + 2 * p - k) // s + 1
        if Lo < 1:
            raise ShapeError(
                f"conv1d kernel {k} stride {s} padding {p} does not fit {in_shape}"
            )
        self.in_shape = tuple(in_shape)
        fan_in = C * k
        self._p["w"] = _he_normal(rng, (self.out_channels, C, k), fan_in, dtype)
        if self.use_bias:
            self._p["b"] = np.zeros(self.out_channels, dtype=dtype)
        self._g = {k_: np.zeros_like(v) for k_, v in self._p.items()}
        self.out_shape = (self.out_channels, Lo)
        return self.out_shape

    def forward(self, x, training=True):
        k, s, p = self.kernel, self.stride, self.padding
        cols, _, Lo = _im2col(x[:, :, None, :], 1, k, 1, s, 0, p)
        B = x.shape[0]
        mat = cols.transpose(0, 4, 5, 1, 2, 3).reshape(B * Lo, -1)
        self._mat = mat
        self._batch = B
        w2d = self._p["w"].reshape(self.out_channels, -1).T
        y = mat @ w2d
        if self.use_bias:
            y = y + self._p["b"]
        return y.reshape(B, Lo, self.out_channels).transpose(0, 2, 1)

    def backward(self, gy):
        mat = self._need_cache(self._mat)
        B = self._batch
        C, Lo = self.out_shape
        gmat = np.ascontiguousarray(gy.transpose(0, 2, 1)).reshape(-1, C)
        self._g["w"][...] = (mat.T @ gmat).T.reshape(self._p["w"].shape)
        if self.use_bias:
            self._g["b"][...] = gmat.sum(axis=0)
        w2d = self._p["w"].reshape(self.out_channels, -1)
        gcols = (gmat @ w2d).reshape(B, 1, Lo, self.in_shape[0], 1, self.kernel)
        gcols = gcols.transpose(0, 3, 4, 5, 1, 2)
        self._mat = None
        k, s, p = self.kernel, self.stride, self.padding
        Cin, L = self.in_shape
        gx = _col2im(gcols, (B, Cin, 1, L), 1, k, 1, s, 0, p)
        return gx[:, :, 0, :]

    def macs(self) -> int:
        _, Lo = self.out_shape
        return Lo * self.out_channels * self.in_shape[0] * self.kernel

    def spec(self) -> dict:
        return {
            "kind": self.kind, "out_channels": self.out_channels,
            "kernel": self.kernel, "stride": self.stride,
            "padding": self.padding, "bias": self.use_bias,
        }


class _PoolBase(Layer):
    def __init__(self, kernel: int = 2, stride: int | None = None):
        super().__init__()
        self.kernel = kernel
        self.stride = stride if stride is not None else kernel
        self._cache = None

    def _pool_forward(self, x4):
        k, s = self.kernel, self.stride
        cols, Ho, Wo = _im2col(x4, self._kh, k, self._sh, s, 0, 0)
        B, C = x4.shape[:2]
        patches = cols.reshape(B, C, self._kh * k, Ho, Wo)
        arg = patches.argmax(axis=2)
        y = np.take_along_axis(patches, arg[:, :, None], axis=2)[:, :, 0]
        self._cache = (x4.shape, arg)
        return y

    def _pool_backward(self, gy4):
        x_shape, arg = self._need_cache(self._cache)
        k, s = self.kernel, self.stride
        B, C = x_shape[:2]
        Ho, Wo = arg.shape[-2:]
        gpatches = np.zeros((B, C, self._kh * k, Ho, Wo), dtype=gy4.dtype)
        np.put_along_axis(gpatches, arg[:, :, None], gy4[:, :, None], axis=2)
        gcols = gpatches.reshape(B, C, self._kh, k, Ho, Wo)
        self._cache = None
        return _col2im(gcols, x_shape, self._kh, k, self._sh, s, 0, 0)


class MaxPool2D(_PoolBase):
    kind = "maxpool2d"

    def build(self, in_shape, rng, dtype):
        if len(in_shape) != 3:
            raise ShapeError(f"maxpool2d expects (C, H, W) input, got {in_shape}")
        C, H, W = in_shape
        k, s = self.kernel, self.stride
        Ho = (H - k) // s + 1
        Wo = (W - k) // s + 1
        if Ho < 1 or Wo < 1:
            raise ShapeError(f"pool kernel {k} stride {s} does not fit {in_shape}")
        self._kh, self._sh = k, s
        self.in_shape = tuple(in_shape)
        self.out_shape = (C, Ho, Wo)
        return self.out_shape

    def forward(self, x, training=True):
        return self._pool_forward(x)

    def backward(self, gy):
        return self._pool_backward(gy)

    def spec(self) -> dict:
        return {"kind": self.kind, "kernel": self.kernel, "stride": self.stride}


class MaxPool1D(_PoolBase):
    kind = "maxpool1d"

    def build(self, in_shape, rng, dtype):
        if len(in_shape) != 2:
            raise ShapeError(f"maxpool1d expects (C, L) input, got {in_shape}")
        C, L = in_shape
        k, s = self.kernel, self.stride
        Lo = (L - k) // s + 1
        if Lo < 1:
            raise ShapeError(f"pool kernel {k} stride {s} does not fit {in_shape}")
        self._kh, self._sh = 1, 1
        self.in_shape = tuple(in_shape)
        self.out_shape = (C, Lo)
        return self.out_shape

    def forward(self, x, training=True):
        return self._pool_forward(x[:, :, None, :])[:, :, 0]

    def backward(self, gy):
        return self._pool_backward(gy[:, :, None, :])[:, :, 0]

    def spec(self) -> dict:
        return {"kind": self.kind, "kernel": self.kernel, "stride": self.stride}


class ReLU(Layer):
    kind = "relu"

    def __init__(self):
        super().__init__()
        self._mask = None

    def forward(self, x, training=True):
        self._mask = x > 0
        return np.where(self._mask, x, 0)

    def backward(self, gy):
        mask = self._need_cache(self._mask)
        self._mask = None
        return np.where(mask, gy, 0)


class Flatten(Layer):
    kind = "flatten"

    def build(self, in_shape, rng, dtype):
        self.in_shape = tuple(in_shape)
        self.out_shape = (int(np.prod(in_shape)),)
        return self.out_shape

    def forward(self, x, training=True):
        return x.reshape(x.shape[0], -1)

    def backward(self, gy):
        return gy.reshape((gy.shape[0],) + self.in_shape)


class GlobalAvgPool(Layer):
    """Mean over the spatial dimensions: (B, C, H, W) -> (B, C)."""

    kind = "globalavgpool"

    def build(self, in_shape, rng, dtype):
        if len(in_shape) != 3:
            raise ShapeError(f"globalavgpool expects (C, H, W) input, got {in_shape}")
        self.in_shape = tuple(in_shape)
        self.out_shape = (in_shape[0],)
        return self.out_shape

    def forward(self, x, training=True):
        return x.mean(axis=(2, 3))

    def backward(self, gy):
        _, H, W = self.in_shape
        g = gy / (H * W)
        return np.broadcast_to(
            g[:, :, None, None], (gy.shape[0],) + self.in_shape
        ).astype(gy.dtype, copy=True)


class BatchNorm2D(Layer):
    """Per-channel batch normalization with running statistics.

    Training normalizes with biased batch statistics and folds them into
    the running estimates (momentum 0.9); evaluation normalizes with the
    running estimates.
    """

    kind = "batchnorm2d"

    def __init__(self, momentum: float = 0.9, eps: float = 1e-5):
        super().__init__()
        self.momentum = momentum
        self.eps = eps
        self._cache = None

    def build(self, in_shape, rng, dtype):
        if len(in_shape) != 3:
            raise ShapeError(f"batchnorm2d expects (C, H, W) input, got {in_shape}")
        C = in_shape[0]
        self._p["gamma"] = np.ones(C, dtype=dtype)
        self._p["beta"] = np.zeros(C, dtype=dtype)
        self._g = {k: np.zeros_like(v) for k, v in self._p.items()}
        self._b["running_mean"] = np.zeros(C, dtype=dtype)
        self._b["running_var"] = np.ones(C, dtype=dtype)
        self.in_shape = tuple(in_shape)
        self.out_shape = self.in_shape
        return self.out_shape

    def forward(self, x, training=True):
        gamma = self._p["gamma"][None, :, None, None]
        beta = self._p["beta"][None, :, None, None]
        if training:
            mu = x.mean(axis=(0, 2, 3))
            var = x.var(axis=(0, 2, 3))
            ivar = 1.0 / np.sqrt(var + self.eps)
            xhat = (x - mu[None, :, None, None]) * ivar[None, :, None, None]
            m = self.momentum
            self._b["running_mean"][...] = m * self._b["running_mean"] + (1 - m) * mu
            self._b["running_var"][...] = m * self._b["running_var"] + (1 - m) * var
            self._cache = ("train", xhat, ivar)
        else:
            ivar = 1.0 / np.sqrt(self._b["running_var"] + self.eps)
            xhat = (x - self._b["running_mean"][None, :, None, None]) \
                * ivar[None, :, None, None]
            self._cache = ("eval", None, ivar)
        return gamma * xhat + beta

    def backward(self, gy):
        mode, xhat, ivar = self._need_cache(self._cache)
        gamma = self._p["gamma"][None, :, None, None]
        self._cache = None
        if mode == "eval":
            self._g["gamma"][...] = 0  # eval backward only scales; stats frozen
            self._g["beta"][...] = gy.sum(axis=(0, 2, 3))
            return gy * gamma * ivar[None, :, None, None]
        m = gy.shape[0] * gy.shape[2] * gy.shape[3]
        self._g["gamma"][...] = (gy * xhat).sum(axis=(0, 2, 3))
        self._g["beta"][...] = gy.sum(axis=(0, 2, 3))
        gxhat = gy * gamma
        sum_g = gxhat.sum(axis=(0, 2, 3), keepdims=True)
        sum_gx = (gxhat * xhat).sum(axis=(0, 2, 3), keepdims=True)
        return (ivar[None, :, None, None] / m) * (m * gxhat - sum_g - xhat * sum_gx)

    def spec(self) -> dict:
        return {"kind": self.kind, "momentum": self.momentum, "eps": self.eps}


class _PadShortcut:
    """Parameter-free residual shortcut: spatial subsample + channel zero-pad."""

    def __init__(self, in_ch, out_ch, stride):
        self.in_ch = in_ch
        self.out_ch = out_ch
        self.stride = stride
        pad = out_ch - in_ch
        self.front = pad // 2
        self.back = pad - pad // 2

    def forward(self, x):
        s = self.stride
        sub = x[:, :, ::s, ::s]
        if self.front or self.back:
            sub = np.pad(sub, ((0, 0), (self.front, self.back), (0, 0), (0, 0)))
        return sub

    def backward(self, gy, x_shape):
        g = gy[:, self.front:self.front + self.in_ch]
        gx = np.zeros(x_shape, dtype=gy.dtype)
        s = self.stride
        gx[:, :, ::s, ::s] = g
        return gx


class ResidualBlock(Layer):
    """Two 3x3 conv/batch-norm stages plus a shortcut, rectified at the end.

    shortcut='identity' uses the parameter-free subsample/zero-pad form
    when shapes change; shortcut='projection' uses a strided 1x1
    convolution followed by batch norm.
    """

    kind = "residual"

    def __init__(self, out_channels: int, stride: int = 1,
                 shortcut: str = "identity"):
        super().__init__()
        if shortcut not in ("identity", "projection"):
            raise ShapeError(f"unknown shortcut kind {shortcut!r}")
        self.out_channels = out_channels
        self.stride = stride
        self.shortcut_kind = shortcut
        self.conv1 = Conv2D(out_channels, kernel=3, stride=stride, padding=1,
                            bias=False)
        self.bn1 = BatchNorm2D()
        self.relu1 = ReLU()
        self.conv2 = Conv2D(out_channels, kernel=3, stride=1, padding=1,
                            bias=False)
        self.bn2 = BatchNorm2D()
        self.relu_out = ReLU()
        self.short_conv = None
        self.short_bn = None
        self._pad_short = None
        self._x_shape = None

    def _sublayers(self):
        subs = [("conv1", self.conv1), ("bn1", self.bn1),
                ("conv2", self.conv2), ("bn2", self.bn2)]
        if self.short_conv is not None:
            subs += [("short_conv", self.short_conv), ("short_bn", self.short_bn)]
        return subs

    def build(self, in_shape, rng, dtype):
        if len(in_shape) != 3:
            raise ShapeError(f"residual block expects (C, H, W) input, got {in_shape}")
        in_ch = in_shape[0]
        shape = self.conv1.build(in_shape, rng, dtype)
        shape = self.bn1.build(shape, rng, dtype)
        shape = self.relu1.build(shape, rng, dtype)
        shape = self.conv2.build(shape, rng, dtype)
        shape = self.bn2.build(shape, rng, dtype)
        if self.stride != 1 or in_ch != self.out_channels:
            if self.shortcut_kind == "projection":
                self.short_conv = Conv2D(self.out_channels, kernel=1,
                                         stride=self.stride, bias=False)
                short_shape = self.short_conv.build(in_shape, rng, dtype)
                self.short_bn = BatchNorm2D()
                short_shape = self.short_bn.build(short_shape, rng, dtype)
            else:
                self._pad_short = _PadShortcut(in_ch, self.out_channels, self.stride)
                short_shape = (self.out_channels,
                               (in_shape[1] + self.stride - 1) // self.stride,
                               (in_shape[2] + self.stride - 1) // self.stride)
            if short_shape != shape:
                raise ShapeError(
                    f"residual shortcut shape {short_shape} != branch shape {shape}"
                )
        self.relu_out.build(shape, rng, dtype)
        self.in_shape = tuple(in_shape)
        self.out_shape = shape
        return shape

    def forward(self, x, training=True):
        self._x_shape = x.shape
        h = self.conv1.forward(x, training)
        h = self.bn1.forward(h, training)
        h = self.relu1.forward(h, training)
        h = self.conv2.forward(h, training)
        h = self.bn2.forward(h, training)
        if self.short_conv is not None:
            s = self.short_bn.forward(self.short_conv.forward(x, training), training)
        elif self._pad_short is not None:
            s = self._pad_short.forward(x)
        else:
            s = x
        return self.relu_out.forward(h + s, training)

    def backward(self, gy):
        x_shape = self._need_cache(self._x_shape)
        g = self.relu_out.backward(gy)
        gh = self.bn2.backward(g)
        gh = self.conv2.backward(gh)
        gh = self.relu1.backward(gh)
        gh = self.bn1.backward(gh)
        gx = self.conv1.backward(gh)
        if self.short_conv is not None:
            gx = gx + self.short_conv.backward(self.short_bn.backward(g))
        elif self._pad_short is not None:
            gx = gx + self._pad_short.backward(g, x_shape)
        else:
            gx = gx + g
        self._x_shape = None
        return gx

    def params(self):
        out = {}
        for name, sub in self._sublayers():
            for k, v in sub.params().items():
                out[f"{name}.{k}"] = v
        return out

    def grads(self):
        out = {}
        for name, sub in self._sublayers():
            for k, v in sub.grads().items():
                out[f"{name}.{k}"] = v
        return out

    def buffers(self):
        out = {}
        for name, sub in self._sublayers():
            for k, v in sub.buffers().items():
                out[f"{name}.{k}"] = v
        return out

    def macs(self) -> int:
        total = self.conv1.macs() + self.conv2.macs()
        if self.short_conv is not None:
            total += self.short_conv.macs()
        return total

    def weight_layer_count(self) -> int:
        """Weight layers on the main path plus any projection shortcut."""
        return 2 + (1 if self.short_conv is not None else 0)

    def spec(self) -> dict:
        return {
            "kind": self.kind, "out_channels": self.out_channels,
            "stride": self.stride, "shortcut": self.shortcut_kind,
        }


LAYER_REGISTRY = {
    "dense": lambda s: Dense(s["units"], bias=s["bias"]),
    "conv2d": lambda s: Conv2D(s["out_channels"], kernel=s["kernel"],
                               stride=s["stride"], padding=s["padding"],
                               bias=s["bias"]),
    "conv1d": lambda s: Conv1D(s["out_channels"], kernel=s["kernel"],
                               stride=s["stride"], padding=s["padding"],
                               bias=s["bias"]),
    "maxpool2d": lambda s: MaxPool2D(kernel=s["kernel"], stride=s["stride"]),
    "maxpool1d": lambda s: MaxPool1D(kernel=s["kernel"], stride=s["stride"]),
    "relu": lambda s: ReLU(),
    "flatten": lambda s: Flatten(),
    "globalavgpool": lambda s: GlobalAvgPool(),
    "batchnorm2d": lambda s: BatchNorm2D(momentum=s["momentum"], eps=s["eps"]),
    "residual": lambda s: ResidualBlock(s["out_channels"], stride=s["stride"],
                                        shortcut=s["shortcut"]),
}


def layer_from_spec(spec: dict) -> Layer:
    try:
        factory = LAYER_REGISTRY[spec["kind"]]
    except KeyError:
        raise ShapeError(f"unknown layer kind {spec.get('kind')!r}") from None
    return factory(spec)
