"""On-disk formats: encoded-window tensor files, series CSV, previews.

Tensor file layout (little-endian):

    bytes 0-3    magic "K5GT"
    bytes 4-5    format version, u16 (currently 1)
    bytes 6-21   u32 dims: sample count, channels, height, width
    images       count * channels * height * width float32
    labels       count float32 (standardized next values, window order)
    stats        count pairs of float32 (mean, std), one per sample

All writes are atomic (temp file + rename). A human-readable sidecar at
"<path>.meta" carries key=value provenance lines.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._util import atomic_write_bytes, atomic_write_text
from .errors import DataError, ParseError, ShapeError
from .ingest import KpiSeries, LogMeta

TENSOR_MAGIC = b"K5GT"
TENSOR_VERSION = 1


@dataclass
class TensorSet:
    """Encoded windows plus everything needed to undo standardization."""

    images: np.ndarray  # (n, C, N, N) float32
    labels: np.ndarray  # (n,) float32, standardized
    stats: np.ndarray   # (n, 2) float32, (mean, std) per sample

    def __post_init__(self):
        self.images = np.ascontiguousarray(self.images, dtype=np.float32)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.float32)
        self.stats = np.ascontiguousarray(self.stats, dtype=np.float32)
        n = len(self.images)
        if self.images.ndim != 4:
            raise ShapeError(f"images must be 4-d, got shape {self.images.shape}")
        if self.labels.shape != (n,):
            raise ShapeError(
                f"labels shape {self.labels.shape} != ({n},)"
            )
        if self.stats.shape != (n, 2):
            raise ShapeError(f"stats shape {self.stats.shape} != ({n}, 2)")

    def __len__(self) -> int:
        return len(self.images)

    def raw_labels(self) -> np.ndarray:
        """Labels destandardized back to indicator units (float64)."""
        mean = self.stats[:, 0].astype(np.float64)
        std = np.maximum(self.stats[:, 1].astype(np.float64), 1e-8)
        return self.labels.astype(np.float64) * std + mean


def tensor_bytes(ts: TensorSet) -> bytes:
    n, c, h, w = ts.images.shape
    head = TENSOR_MAGIC + struct.pack("<HIIII", TENSOR_VERSION, n, c, h, w)
    return b"".join([
        head,
        ts.images.astype("<f4", copy=False).tobytes(),
        ts.labels.astype("<f4", copy=False).tobytes(),
        ts.stats.astype("<f4", copy=False).tobytes(),
    ])


def write_tensor_file(path, ts: TensorSet) -> None:
    atomic_write_bytes(Path(path), tensor_bytes(ts))


def read_tensor_file(path) -> TensorSet:
    data = Path(path).read_bytes()
    if len(data) < 22 or data[:4] != TENSOR_MAGIC:
        raise ParseError(f"{path}: not a tensor file (bad magic)")
    version, n, c, h, w = struct.unpack("<HIIII", data[4:22])
    if version != TENSOR_VERSION:
        raise ParseError(f"{path}: unsupported tensor version {version}")
    counts = (n * c * h * w, n, 2 * n)
    want = 22 + 4 * sum(counts)
    if len(data) != want:
        raise ParseError(
            f"{path}: expected {want} bytes for {n} samples, got {len(data)}"
        )
    offset = 22
    parts = []
    for count in counts:
        parts.append(np.frombuffer(data, dtype="<f4", count=count, offset=offset))
        offset += 4 * count
    return TensorSet(
        images=parts[0].reshape(n, c, h, w),
        labels=parts[1].copy(),
        stats=parts[2].reshape(n, 2),
    )


def write_meta(path, fields: dict) -> None:
    """key=value sidecar next to a tensor file, keys sorted."""
    lines = []
    for key in sorted(fields):
        value = fields[key]
        if "\n" in str(key) or "=" in str(key):
            raise DataError(f"meta key {key!r} must not contain '=' or newlines")
        lines.append(f"{key}={value}")
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def read_meta(path) -> dict:
    out = {}
    for ln, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        if not line.strip():
            continue
        if "=" not in line:
            raise ParseError(f"{path}: line {ln}: expected key=value")
        key, _, value = line.partition("=")
        out[key] = value
    return out


def series_csv_text(series: KpiSeries) -> str:
    meta = series.meta
    rows = ["log_id,service,mobility,indicator,value"]
    rows += [
        f"{meta.log_id},{meta.service},{meta.mobility},"
        f"{series.indicator},{value!r}"
        for value in series.values.tolist()
    ]
    return "\n".join(rows) + "\n"


def write_series_csv(path, series: KpiSeries) -> None:
    atomic_write_text(Path(path), series_csv_text(series))


def read_series_csv(path) -> KpiSeries:
    lines = Path(path).read_text("utf-8").splitlines()
    if not lines or lines[0] != "log_id,service,mobility,indicator,value":
        raise ParseError(f"{path}: missing series header")
    values = []
    ident = None
    for ln, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 5:
            raise ParseError(f"{path}: line {ln}: expected 5 cells")
        if ident is None:
            ident = cells[:4]
        elif cells[:4] != ident:
            raise ParseError(f"{path}: line {ln}: mixed series identity")
        try:
            values.append(float(cells[4]))
        except ValueError:
            raise ParseError(f"{path}: line {ln}: bad value {cells[4]!r}") from None
    if ident is None:
        raise ParseError(f"{path}: series has no rows")
    meta = LogMeta(log_id=ident[0], service=ident[1], mobility=ident[2])
    return KpiSeries(indicator=ident[3], values=np.asarray(values, dtype=np.float64),
                     meta=meta)


def _to_gray(img: np.ndarray) -> np.ndarray:
    """Min-max map one 2-d array to uint8; constant images go to 0."""
    img = np.asarray(img, dtype=np.float64)
    lo = img.min()
    hi = img.max()
    if hi > lo:
        scaled = np.round(255.0 * (img - lo) / (hi - lo))
    else:
        scaled = np.zeros_like(img)
    return scaled.astype(np.uint8)


def pgm_bytes(img: np.ndarray) -> bytes:
    img = np.asarray(img)
    if img.ndim != 2:
        raise ShapeError(f"PGM needs a 2-d image, got shape {img.shape}")
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + _to_gray(img).tobytes()


def ppm_bytes(img: np.ndarray) -> bytes:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[0] != 3:
        raise ShapeError(f"PPM needs a (3, H, W) image, got shape {img.shape}")
    planes = np.stack([_to_gray(p) for p in img])  # each channel scaled alone
    h, w = img.shape[1:]
    return (f"P6\n{w} {h}\n255\n".encode("ascii")
            + planes.transpose(1, 2, 0).tobytes())


def write_preview(path, image: np.ndarray) -> Path:
    """Write a PGM (1 channel) or PPM (3 channels) preview; returns path."""
    image = np.asarray(image)
    if image.ndim == 2:
        image = image[None]
    path = Path(path)
    if image.shape[0] == 1:
        path = path.with_suffix(".pgm")
        atomic_write_bytes(path, pgm_bytes(image[0]))
    elif image.shape[0] == 3:
        path = path.with_suffix(".ppm")
        atomic_write_bytes(path, ppm_bytes(image))
    else:
        raise ShapeError(
            f"previews need 1 or 3 channels, got {image.shape[0]}"
        )
    return path
