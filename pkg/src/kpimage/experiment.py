"""Per-log experiments, metrics, and report aggregation.

One experiment trains one model on one (log, indicator) pair and scores
it on the chronological test tail in raw indicator units. NRMSE follows
the min-max convention: within each service/mobility group the member
logs' RMSEs are rescaled to [0, 1] by the group's min and max. The
per-log RMSE over its own truth range is kept alongside as range_nrmse.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ._util import derive_seed
from .encoders import encode_batch, parse_encoders
from .errors import ConfigError
from .ingest import KpiSeries
from .models import MODEL_KINDS, default_train_config
from .regressor import ConvImageRegressor
from .windowing import (
    DEFAULT_STRIDE,
    DEFAULT_WINDOW,
    TRAIN_LABEL_LIMIT,
    make_samples,
    split_train_test,
)


def rmse(pred, truth) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape:
        raise ConfigError(
            f"rmse needs matching shapes, got {pred.shape} and {truth.shape}"
        )
    if pred.size == 0:
        raise ConfigError("rmse of an empty vector is undefined")
    return float(np.sqrt(np.mean((pred - truth) ** 2)))


def ci_coverage(lo, hi, truth) -> float:
    """Fraction of truths inside [lo, hi] (inclusive both ends)."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    return float(np.mean((truth >= lo) & (truth <= hi)))


def crossing_fraction(quantile_pred) -> float:
    """Fraction of rows whose quantile heads are not non-decreasing."""
    q = np.asarray(quantile_pred, dtype=np.float64)
    if q.ndim != 2 or q.shape[1] < 2:
        return 0.0
    return float(np.mean(np.any(np.diff(q, axis=1) < 0, axis=1)))


@dataclass
class ExperimentConfig:
    """Everything one per-log run needs beyond the series itself."""

    indicator: str = "CQI"
    encoders: tuple = ("mtf",)
    mtf_bins: int = 8
    model: str = "hatami"
    loss: str = "quantile"
    quantiles: tuple = (0.05, 0.50, 0.95)
    window: int = DEFAULT_WINDOW
    stride: int = DEFAULT_STRIDE
    split: float = 0.8
    seed: int = 0
    min_samples: int = 16
    shortcut: str = "identity"
    # None: use the model's training recipe defaults
    epochs: Optional[int] = None
    batch_size: Optional[int] = None
    lr: Optional[float] = None
    weight_decay: Optional[float] = None
    lr_milestones: Optional[tuple] = None

    def train_config(self):
        if self.model not in MODEL_KINDS:
            raise ConfigError(
                f"unknown model {self.model!r}; expected one of {MODEL_KINDS}"
            )
        cfg = default_train_config(self.model, loss=self.loss)
        overrides = {
            name: getattr(self, name)
            for name in ("epochs", "batch_size", "lr", "weight_decay",
                         "lr_milestones")
            if getattr(self, name) is not None
        }
        overrides["quantiles"] = tuple(self.quantiles)
        return replace(cfg, **overrides).validate()


@dataclass
class LogReport:
    log_id: str
    group: str
    indicator: str
    encoder: str
    model: str
    loss: str
    n_train: int
    n_test: int
    seed: int
    rmse: float
    persistence_rmse: float
    range_nrmse: float
    coverage: Optional[float] = None
    crossing_fraction: Optional[float] = None
    nrmse: Optional[float] = None  # filled by fill_nrmse across the group


@dataclass
class SkippedLog:
    log_id: str
    group: str
    indicator: str
    reason: str


def _model_inputs(samples, config: ExperimentConfig):
    """Encoded images for the 2-d models, standardized windows for cnn1d."""
    windows = np.stack([s.window for s in samples])
    if config.model == "cnn1d":
        return windows[:, None, :].astype(np.float32), "raw"
    specs = parse_encoders(config.encoders, config.mtf_bins)
    name = "+".join(s.kind for s in specs)
    return encode_batch(windows, specs), name


def run_log(series: KpiSeries, config: ExperimentConfig):
    """Train and score one log; returns LogReport or SkippedLog."""
    meta = series.meta
    train_cfg = config.train_config()
    samples = make_samples(series.values, config.window, config.stride)
    if len(samples) < config.min_samples:
        return SkippedLog(
            meta.log_id, meta.group, config.indicator,
            f"only {len(samples)} windows "
            f"(need {config.min_samples})",
        )
    train, test = split_train_test(samples, config.split)
    if not train or not test:
        return SkippedLog(
            meta.log_id, meta.group, config.indicator,
            f"split {config.split} left train={len(train)} test={len(test)}",
        )
    n_split = len(train)
    train_idx = [i for i, s in enumerate(train)
                 if abs(s.label) <= TRAIN_LABEL_LIMIT]
    if not train_idx:
        return SkippedLog(
            meta.log_id, meta.group, config.indicator,
            "no trainable samples (all labels were guard artifacts)",
        )
    X_all, encoder_name = _model_inputs(samples, config)
    y_all = np.asarray([s.label for s in samples], dtype=np.float32)
    n_train = len(train_idx)
    seed = derive_seed(config.seed, meta.log_id)
    reg = ConvImageRegressor(
        architecture=config.model, loss=train_cfg.loss,
        quantiles=train_cfg.quantiles, epochs=train_cfg.epochs,
        batch_size=train_cfg.batch_size, lr=train_cfg.lr,
        weight_decay=train_cfg.weight_decay,
        lr_milestones=train_cfg.lr_milestones,
        lr_factor=train_cfg.lr_factor, seed=seed,
        shortcut=config.shortcut, val_ratio=train_cfg.val_ratio,
        early_stop_patience=train_cfg.early_stop_patience,
    )
    reg.fit(X_all[train_idx], y_all[train_idx])
    X_test = X_all[n_split:]
    mean = np.asarray([s.stats.mean for s in test])
    gstd = np.asarray([s.stats.guarded_std for s in test])
    truth = np.asarray([s.raw_label for s in test])
    persistence = np.asarray([s.raw_last for s in test])
    pred = reg.predict(X_test) * gstd + mean
    coverage = None
    crossing = None
    if train_cfg.loss == "quantile":
        q = reg.predict_quantiles(X_test)
        q = q * gstd[:, None] + mean[:, None]
        coverage = ci_coverage(q[:, 0], q[:, -1], truth)
        crossing = crossing_fraction(q)
    model_rmse = rmse(pred, truth)
    span = float(truth.max() - truth.min())
    return LogReport(
        log_id=meta.log_id, group=meta.group, indicator=config.indicator,
        encoder=encoder_name, model=config.model, loss=train_cfg.loss,
        n_train=n_train, n_test=len(test), seed=seed, rmse=model_rmse,
        persistence_rmse=rmse(persistence, truth),
        range_nrmse=model_rmse / span if span > 0 else 0.0,
        coverage=coverage, crossing_fraction=crossing,
    )


def fill_nrmse(reports: list) -> list:
    """Min-max rescale RMSEs within each group; degenerate groups get 0."""
    by_group: dict = {}
    for rep in reports:
        by_group.setdefault(rep.group, []).append(rep)
    for members in by_group.values():
        values = [m.rmse for m in members]
        lo, hi = min(values), max(values)
        span = hi - lo
        for member in members:
            member.nrmse = (member.rmse - lo) / span if span > 0 else 0.0
    return reports


@dataclass
class GroupSummary:
    group: str
    n_logs: int
    rmse_mean: float
    rmse_std: float
    nrmse_mean: float
    nrmse_std: float
    coverage_mean: Optional[float]
    coverage_std: Optional[float]


def _mean_std(values) -> tuple:
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std())  # population std


def summarize(reports: list) -> list:
    """Per-group rows plus an 'overall' row across every log."""
    if not reports:
        return []
    if any(rep.nrmse is None for rep in reports):
        fill_nrmse(reports)
    by_group: dict = {}
    for rep in reports:
        by_group.setdefault(rep.group, []).append(rep)
    rows = []
    for group in sorted(by_group) + ["overall"]:
        members = reports if group == "overall" else by_group[group]
        r_mean, r_std = _mean_std([m.rmse for m in members])
        n_mean, n_std = _mean_std([m.nrmse for m in members])
        covs = [m.coverage for m in members if m.coverage is not None]
        c_mean, c_std = _mean_std(covs) if covs else (None, None)
        rows.append(GroupSummary(
            group=group, n_logs=len(members), rmse_mean=r_mean,
            rmse_std=r_std, nrmse_mean=n_mean, nrmse_std=n_std,
            coverage_mean=c_mean, coverage_std=c_std,
        ))
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))  # plain float repr even for numpy scalars
    return str(value)


LOG_REPORT_COLUMNS = (
    "log_id", "group", "indicator", "encoder", "model", "loss", "n_train",
    "n_test", "seed", "rmse", "nrmse", "range_nrmse", "coverage",
    "crossing_fraction", "persistence_rmse",
)

GROUP_REPORT_COLUMNS = (
    "group", "n_logs", "rmse_mean", "rmse_std", "nrmse_mean", "nrmse_std",
    "coverage_mean", "coverage_std",
)


def log_report_csv(reports: list) -> str:
    """Per-log CSV, sorted by (group, log_id) for stable output."""
    if any(rep.nrmse is None for rep in reports):
        fill_nrmse(reports)
    lines = [",".join(LOG_REPORT_COLUMNS)]
    for rep in sorted(reports, key=lambda r: (r.group, r.log_id)):
        lines.append(",".join(
            _fmt(getattr(rep, col)) for col in LOG_REPORT_COLUMNS
        ))
    return "\n".join(lines) + "\n"


def group_report_csv(reports: list) -> str:
    lines = [",".join(GROUP_REPORT_COLUMNS)]
    for row in summarize(reports):
        lines.append(",".join(
            _fmt(getattr(row, col)) for col in GROUP_REPORT_COLUMNS
        ))
    return "\n".join(lines) + "\n"


def skipped_csv(skips: list) -> str:
    lines = ["log_id,group,indicator,reason"]
    for skip in sorted(skips, key=lambda s: (s.group, s.log_id)):
        reason = skip.reason.replace(",", ";")
        lines.append(f"{skip.log_id},{skip.group},{skip.indicator},{reason}")
    return "\n".join(lines) + "\n"
