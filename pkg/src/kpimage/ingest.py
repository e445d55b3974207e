"""Transmission-log ingestion.

Parses raw CSV transmission logs, zero-fills missing numeric entries,
restricts rows to the 5G network mode, and extracts per-indicator
time-series with their service/mobility metadata.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import DataError, ParseError, SchemaError

INDICATORS = ("CQI", "SNR", "RSRP", "RSRQ", "RSSI")
SERVICES = ("download", "amazon_prime", "netflix")
MOBILITIES = ("static", "vehicular")

# Tokens treated as missing in numeric columns, on top of anything that
# fails to parse as a finite float.
MISSING_TOKENS = frozenset({"", "NaN", "nan", "-"})

DEFAULT_MODE_COLUMN = "NetworkMode"
DEFAULT_5G_DESIGNATOR = "5G"

_SERVICE_ALIASES = {
    "download": "download",
    "amazonprime": "amazon_prime",
    "amazon_prime": "amazon_prime",
    "amazon-prime": "amazon_prime",
    "netflix": "netflix",
}
_MOBILITY_ALIASES = {
    "static": "static",
    "vehicular": "vehicular",
    # the public trace collection labels its vehicular runs "Driving"
    "driving": "vehicular",
}


def normalize_service(value: str) -> str:
    key = value.strip().lower().replace(" ", "_")
    try:
        return _SERVICE_ALIASES[key]
    except KeyError:
        raise SchemaError(
            f"unknown service {value!r}; expected one of {SERVICES}"
        ) from None


def normalize_mobility(value: str) -> str:
    key = value.strip().lower()
    try:
        return _MOBILITY_ALIASES[key]
    except KeyError:
        raise SchemaError(
            f"unknown mobility {value!r}; expected one of {MOBILITIES}"
        ) from None


@dataclass(frozen=True)
class LogMeta:
    """Identity and evaluation group of one transmission log."""

    log_id: str
    service: str
    mobility: str

    def __post_init__(self):
        if self.service not in SERVICES:
            raise SchemaError(f"invalid service {self.service!r}")
        if self.mobility not in MOBILITIES:
            raise SchemaError(f"invalid mobility {self.mobility!r}")

    @property
    def group(self) -> str:
        return f"{self.service}/{self.mobility}"


@dataclass(frozen=True)
class TransmissionLog:
    """A parsed log: header columns plus rows of string cells in file order."""

    columns: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    meta: LogMeta

    def __len__(self) -> int:
        return len(self.rows)

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise SchemaError(
                f"log {self.meta.log_id!r} has no column {name!r}"
            ) from None

    def column(self, name: str) -> list[str]:
        i = self.column_index(name)
        return [row[i] for row in self.rows]


@dataclass(frozen=True)
class KpiSeries:
    """One indicator's ordered samples, all finite after sanitization."""

    indicator: str
    values: np.ndarray
    meta: LogMeta

    def __len__(self) -> int:
        return len(self.values)


def parse_log(content: bytes | str, meta: LogMeta) -> TransmissionLog:
    """Parse raw CSV content into a TransmissionLog.

    Cells stay strings at this stage; sanitize() handles numeric cleanup.
    Raises ParseError for an empty file, a malformed header, or any row
    whose cell count differs from the header (the error names the
    1-based line number).
    """
    if isinstance(content, bytes):
        content = content.decode("utf-8-sig")
    reader = csv.reader(io.StringIO(content))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(f"log {meta.log_id!r}: empty file") from None
    header = [c.strip() for c in header]
    if not header or any(c == "" for c in header):
        raise ParseError(f"log {meta.log_id!r}: malformed header (empty column name)")
    if len(set(header)) != len(header):
        raise ParseError(f"log {meta.log_id!r}: malformed header (duplicate column)")

    rows = []
    for lineno, cells in enumerate(reader, start=2):
        if not cells:
            continue  # skip blank lines
        if len(cells) != len(header):
            raise ParseError(
                f"log {meta.log_id!r}: line {lineno} has {len(cells)} cells, "
                f"expected {len(header)}"
            )
        rows.append(tuple(cells))
    return TransmissionLog(columns=tuple(header), rows=tuple(rows), meta=meta)


def _is_missing(cell: str) -> bool:
    stripped = cell.strip()
    if stripped in MISSING_TOKENS:
        return True
    try:
        return not np.isfinite(float(stripped))
    except ValueError:
        return True


def sanitize(log: TransmissionLog, numeric_columns) -> TransmissionLog:
    """Zero-fill missing entries in the given numeric columns.

    Idempotent and total: every cell of a numeric column parses as a
    finite real afterwards.
    """
    numeric_columns = set(numeric_columns)
    unknown = numeric_columns - set(log.columns)
    if unknown:
        raise SchemaError(
            f"log {log.meta.log_id!r}: numeric columns not in header: {sorted(unknown)}"
        )
    indices = {log.column_index(c) for c in numeric_columns}
    rows = tuple(
        tuple("0" if i in indices and _is_missing(cell) else cell
              for i, cell in enumerate(row))
        for row in log.rows
    )
    return replace(log, rows=rows)


def filter_5g(
    log: TransmissionLog,
    mode_column: str = DEFAULT_MODE_COLUMN,
    designator: str = DEFAULT_5G_DESIGNATOR,
) -> TransmissionLog:
    """Keep only rows whose network mode equals the 5G designator."""
    if mode_column in log.columns:
        idx = log.column_index(mode_column)
    else:
        lowered = [c.lower() for c in log.columns]
        try:
            idx = lowered.index(mode_column.lower())
        except ValueError:
            raise SchemaError(
                f"log {log.meta.log_id!r} has no network-mode column "
                f"{mode_column!r}"
            ) from None
    rows = tuple(row for row in log.rows if row[idx].strip() == designator)
    return replace(log, rows=rows)


def extract_series(log: TransmissionLog, indicator: str) -> KpiSeries:
    """Project one indicator column to a float series in row order."""
    if indicator not in INDICATORS:
        raise SchemaError(
            f"unknown indicator {indicator!r}; expected one of {INDICATORS}"
        )
    cells = log.column(indicator)
    try:
        values = np.array([float(c) for c in cells], dtype=np.float64)
    except ValueError as exc:
        raise DataError(
            f"log {log.meta.log_id!r}: non-numeric cell in column "
            f"{indicator!r} ({exc}); run sanitize first"
        ) from None
    return KpiSeries(indicator=indicator, values=values, meta=log.meta)


def read_manifest(path) -> list[tuple[Path, LogMeta]]:
    """Read a manifest CSV mapping log files to their service/mobility.

    Columns: path, service, mobility, and optionally log_id (defaults to
    the file stem). Relative paths resolve against the manifest location.
    """
    path = Path(path)
    base = path.parent
    entries = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"path", "service", "mobility"}
        fields = set(reader.fieldnames or [])
        if not required <= fields:
            raise SchemaError(
                f"manifest {path}: missing columns {sorted(required - fields)}"
            )
        for lineno, row in enumerate(reader, start=2):
            raw = row["path"].strip()
            if not raw:
                raise ParseError(f"manifest {path}: line {lineno} has empty path")
            log_path = Path(raw)
            if not log_path.is_absolute():
                log_path = base / log_path
            log_id = (row.get("log_id") or "").strip() or log_path.stem
            meta = LogMeta(
                log_id=log_id,
                service=normalize_service(row["service"]),
                mobility=normalize_mobility(row["mobility"]),
            )
            entries.append((log_path, meta))
    return entries


def load_log(path, meta: LogMeta) -> TransmissionLog:
    return parse_log(Path(path).read_bytes(), meta)
