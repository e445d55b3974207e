"""Binary checkpoint format for trained networks.

Layout (little-endian):

    bytes 0-3   magic "K5GC"
    bytes 4-5   format version, u16 (currently 1)
    bytes 6-9   header length in bytes, u32
    header      UTF-8 JSON, keys sorted, no whitespace
    payload     every parameter and buffer tensor in network order,
                raw little-endian values of the network dtype

The header records the layer specs, input shape, dtype, and the tensor
manifest (path, shape) so a load can rebuild the network and validate
the payload before touching it. Writes go to a temp file in the target
directory and are renamed into place.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .._util import atomic_write_bytes
from ..errors import ParseError, ShapeError
from .network import Network, network_from_specs

MAGIC = b"K5GC"
VERSION = 1

_DTYPE_CODES = {"float32": "<f4", "float64": "<f8"}


def checkpoint_bytes(net: Network, extra: dict | None = None) -> bytes:
    tensors = list(net.state_tensors())
    header = {
        "layers": net.layer_specs(),
        "input_shape": list(net.input_shape),
        "dtype": net.dtype.name,
        "tensors": [[path, list(arr.shape)] for path, arr in tensors],
    }
    if extra:
        overlap = set(extra) & set(header)
        if overlap:
            raise ShapeError(f"extra header keys collide: {sorted(overlap)}")
        header.update(extra)
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    code = _DTYPE_CODES[net.dtype.name]
    parts = [MAGIC, struct.pack("<HI", VERSION, len(blob)), blob]
    parts += [np.ascontiguousarray(arr, dtype=code).tobytes() for _, arr in tensors]
    return b"".join(parts)


def save_checkpoint(net: Network, path, extra: dict | None = None) -> None:
    atomic_write_bytes(Path(path), checkpoint_bytes(net, extra))


def load_checkpoint(path) -> tuple:
    """Read a checkpoint and return (network, header)."""
    data = Path(path).read_bytes()
    if len(data) < 10 or data[:4] != MAGIC:
        raise ParseError(f"{path}: not a checkpoint file (bad magic)")
    version, header_len = struct.unpack("<HI", data[4:10])
    if version != VERSION:
        raise ParseError(f"{path}: unsupported checkpoint version {version}")
    if len(data) < 10 + header_len:
        raise ParseError(f"{path}: truncated header")
    try:
        header = json.loads(data[10:10 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: corrupt header: {exc}") from None
    for key in ("layers", "input_shape", "dtype", "tensors"):
        if key not in header:
            raise ParseError(f"{path}: header missing {key!r}")
    dtype = header["dtype"]
    if dtype not in _DTYPE_CODES:
        raise ParseError(f"{path}: unsupported dtype {dtype!r}")
    net = network_from_specs(header["layers"], header["input_shape"], dtype=dtype)
    code = _DTYPE_CODES[dtype]
    itemsize = np.dtype(code).itemsize
    offset = 10 + header_len
    manifest = header["tensors"]
    live = list(net.state_tensors())
    if len(manifest) != len(live):
        raise ParseError(
            f"{path}: header lists {len(manifest)} tensors, "
            f"network has {len(live)}"
        )
    for (want_path, want_shape), (have_path, arr) in zip(manifest, live):
        if want_path != have_path or tuple(want_shape) != arr.shape:
            raise ParseError(
                f"{path}: tensor mismatch: header ({want_path}, {want_shape}) "
                f"vs network ({have_path}, {arr.shape})"
            )
        nbytes = arr.size * itemsize
        if offset + nbytes > len(data):
            raise ParseError(f"{path}: truncated payload at {want_path}")
        arr[...] = np.frombuffer(
            data, dtype=code, count=arr.size, offset=offset
        ).reshape(arr.shape)
        offset += nbytes
    if offset != len(data):
        raise ParseError(f"{path}: {len(data) - offset} trailing bytes")
    return net, header
