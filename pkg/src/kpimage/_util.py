"""Small shared helpers: atomic writes and seed derivation."""

from __future__ import annotations

import os
import tempfile
import zlib
from pathlib import Path


def atomic_write_bytes(path, data: bytes) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".",
                               suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def derive_seed(base_seed: int, label: str) -> int:
    """Stable per-label seed: crc32 of "{base}:{label}"."""
    return zlib.crc32(f"{base_seed}:{label}".encode("utf-8"))
