"""Command-line interface.

Subcommands cover the pipeline stages: preprocess raw logs to series
CSVs, encode series to tensor files, train and evaluate a model on one
tensor file, run the whole per-log experiment from a manifest, merge
reports, and inspect any artifact.

Options resolve in three layers: command-line flag, then a --config
file of key=value lines (keys are the long option names with '-'
replaced by '_'), then the built-in default. Exit codes: 0 success,
1 configuration problem, 2 unreadable or invalid data, 3 internal
error.
"""

from __future__ import annotations

import argparse
import multiprocessing
import sys
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from ._util import atomic_write_text
from .encoders import (
    DEFAULT_MTF_BINS,
    ENCODER_KINDS,
    encode_batch,
    parse_encoders,
)
from .engine import layer_table, learnable_layer_count, load_checkpoint, \
    save_checkpoint
from .engine.network import count_macs, count_params
from .errors import ConfigError, DataError, KpimageError, ParseError, \
    SchemaError
from .experiment import (
    LOG_REPORT_COLUMNS,
    ExperimentConfig,
    LogReport,
    SkippedLog,
    ci_coverage,
    crossing_fraction,
    fill_nrmse,
    group_report_csv,
    log_report_csv,
    rmse,
    run_log,
    skipped_csv,
)
from .ingest import (
    DEFAULT_5G_DESIGNATOR,
    DEFAULT_MODE_COLUMN,
    INDICATORS,
    extract_series,
    filter_5g,
    load_log,
    read_manifest,
    sanitize,
)
from .models import MODEL_KINDS
from .regressor import ConvImageRegressor
from .storage import (
    TENSOR_MAGIC,
    TensorSet,
    read_meta,
    read_series_csv,
    read_tensor_file,
    write_meta,
    write_preview,
    write_series_csv,
    write_tensor_file,
)
from .windowing import DEFAULT_STRIDE, DEFAULT_WINDOW, TRAIN_LABEL_LIMIT, \
    make_samples

_REQUIRED = object()


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in str(text).split(",") if x.strip())


def _ints(text: str) -> tuple:
    return tuple(int(x) for x in str(text).split(",") if x.strip())


def _names(text: str) -> tuple:
    return tuple(x.strip() for x in str(text).split(",") if x.strip())


class Opt:
    """One resolvable option: flag name, converter, default, help."""

    def __init__(self, name, conv, default, help, flag=False):
        self.name = name
        self.dest = name.replace("-", "_")
        self.conv = conv
        self.default = default
        self.help = help
        self.flag = flag

    def add_to(self, parser):
        if self.flag:
            parser.add_argument(f"--{self.name}", action="store_true",
                                default=None, help=self.help)
        else:
            parser.add_argument(f"--{self.name}", default=None, type=str,
                                help=self.help)

    def resolve(self, args, file_cfg):
        raw = getattr(args, self.dest)
        if raw is not None:
            return raw if self.flag else self._convert(raw, "flag")
        if self.dest in file_cfg:
            value = file_cfg[self.dest]
            return _bool(value) if self.flag else self._convert(value, "config")
        if self.default is _REQUIRED:
            raise ConfigError(f"--{self.name} is required")
        return self.default

    def _convert(self, value, source: str):
        try:
            return self.conv(value)
        except (TypeError, ValueError):
            raise ConfigError(
                f"bad {source} value for --{self.name}: {value!r}"
            ) from None


_PIPELINE_OPTS = [
    Opt("indicator", str, "CQI", f"KPI to model, one of {'/'.join(INDICATORS)}"),
    Opt("encoders", _names, ("mtf",),
        f"comma list from {'/'.join(ENCODER_KINDS)}: one name or three"),
    Opt("mtf-bins", int, DEFAULT_MTF_BINS, "quantization bins for mtf"),
    Opt("window", int, DEFAULT_WINDOW, "sliding window width"),
    Opt("stride", int, DEFAULT_STRIDE, "sliding window stride"),
]

_TRAIN_OPTS = [
    Opt("model", str, "hatami", f"architecture, one of {'/'.join(MODEL_KINDS)}"),
    Opt("loss", str, "quantile", "training loss: quantile or mse"),
    Opt("quantiles", _floats, (0.05, 0.50, 0.95),
        "comma list of quantile levels"),
    Opt("epochs", int, None, "override the architecture's epoch count"),
    Opt("batch-size", int, None, "override the training batch size"),
    Opt("lr", float, None, "override the initial learning rate"),
    Opt("weight-decay", float, None, "override the L2 weight decay"),
    Opt("milestones", _ints, None, "override the lr drop epochs"),
    Opt("split", float, 0.8, "chronological train fraction"),
    Opt("seed", int, 0, "base random seed"),
    Opt("shortcut", str, "identity",
        "resnet shortcut kind: identity or projection"),
]


def _resolve(opts, args, file_cfg) -> dict:
    known = {o.dest for o in opts}
    unknown = sorted(set(file_cfg) - known)
    if unknown:
        raise ConfigError(
            f"unknown config keys: {', '.join(unknown)}"
        )
    return {o.dest: o.resolve(args, file_cfg) for o in opts}


def _load_config_file(path) -> dict:
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    out = {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: line {ln}: expected key=value")
        key, _, value = line.partition("=")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are config errors (exit 1)
        raise ConfigError(message)


def _build_parser():
    parser = _Parser(prog="kpimage",
                     description="Image-encoded KPI forecasting pipeline")
    parser.add_argument("--version", action="version",
                        version=f"kpimage {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands = {}

    def command(name, opts, help):
        p = sub.add_parser(name, help=help, description=help)
        p.add_argument("--config", default=None,
                       help="key=value file of option defaults")
        for o in opts:
            o.add_to(p)
        commands[name] = opts
        return p

    command("preprocess", [
        Opt("manifest", str, _REQUIRED,
            "CSV manifest: path,service,mobility[,log_id]"),
        Opt("out", str, _REQUIRED, "directory for series CSVs"),
        Opt("indicator", str, "CQI",
            f"KPI to extract, one of {'/'.join(INDICATORS)}"),
        Opt("mode-column", str, DEFAULT_MODE_COLUMN,
            "column naming the radio mode"),
        Opt("designator", str, DEFAULT_5G_DESIGNATOR,
            "mode value kept by the 5G filter"),
        Opt("keep-all-modes", None, False,
            "skip the 5G-only row filter", flag=True),
    ], "parse raw logs from a manifest into per-log series CSVs")

    command("encode", _PIPELINE_OPTS + [
        Opt("series", str, _REQUIRED, "series CSV file, or directory of them"),
        Opt("out", str, _REQUIRED, "directory for tensor files"),
        Opt("previews", int, 0, "write image previews for the first N windows"),
    ], "slide, standardize, and encode series into tensor files")

    command("train", _TRAIN_OPTS + [
        Opt("tensors", str, _REQUIRED, "tensor file from encode"),
        Opt("out", str, _REQUIRED, "checkpoint path to write"),
    ], "train a model on the chronological train split of a tensor file")

    command("evaluate", [
        Opt("tensors", str, _REQUIRED, "tensor file from encode"),
        Opt("checkpoint", str, _REQUIRED, "checkpoint from train"),
        Opt("split", float, 0.8, "chronological train fraction"),
        Opt("out", str, None, "also write metrics as key=value lines"),
    ], "score a checkpoint on the test tail of a tensor file")

    command("experiment", _PIPELINE_OPTS + _TRAIN_OPTS + [
        Opt("manifest", str, _REQUIRED,
            "CSV manifest: path,service,mobility[,log_id]"),
        Opt("out", str, _REQUIRED, "directory for report CSVs"),
        Opt("mode-column", str, DEFAULT_MODE_COLUMN,
            "column naming the radio mode"),
        Opt("designator", str, DEFAULT_5G_DESIGNATOR,
            "mode value kept by the 5G filter"),
        Opt("keep-all-modes", None, False,
            "skip the 5G-only row filter", flag=True),
        Opt("min-samples", int, 16, "skip logs with fewer windows"),
        Opt("workers", int, 1, "parallel worker processes"),
    ], "run the full per-log pipeline from a manifest and write reports")

    command("report", [
        Opt("per-log", str, _REQUIRED, "per_log.csv from experiment"),
        Opt("out", str, _REQUIRED, "directory for merged report CSVs"),
    ], "recompute group NRMSE and summaries from a per-log report")

    command("inspect", [
        Opt("target", str, _REQUIRED,
            "tensor file, checkpoint, or series CSV"),
    ], "print a summary of any pipeline artifact")

    return parser, commands


# ---------------------------------------------------------------- commands


def _cmd_preprocess(cfg) -> int:
    out_dir = Path(cfg["out"])
    entries = read_manifest(cfg["manifest"])
    for path, meta in entries:
        log = load_log(path, meta)
        if not cfg["keep_all_modes"]:
            log = filter_5g(log, mode_column=cfg["mode_column"],
                            designator=cfg["designator"])
        log = sanitize(log, [cfg["indicator"]])
        series = extract_series(log, cfg["indicator"])
        dest = out_dir / f"{meta.log_id}.csv"
        write_series_csv(dest, series)
        print(f"{meta.log_id}: {len(series.values)} values -> {dest}")
    print(f"preprocessed {len(entries)} logs")
    return 0


def _series_paths(target: Path) -> list:
    if target.is_dir():
        paths = sorted(target.glob("*.csv"))
        if not paths:
            raise DataError(f"{target}: no series CSVs found")
        return paths
    return [target]


def _cmd_encode(cfg) -> int:
    out_dir = Path(cfg["out"])
    specs = parse_encoders(cfg["encoders"], cfg["mtf_bins"])
    encoder_name = "+".join(s.kind for s in specs)
    for path in _series_paths(Path(cfg["series"])):
        series = read_series_csv(path)
        if series.indicator != cfg["indicator"]:
            raise DataError(
                f"{path}: series holds {series.indicator}, "
                f"expected {cfg['indicator']}"
            )
        samples = make_samples(series.values, cfg["window"], cfg["stride"])
        if not samples:
            print(f"{series.meta.log_id}: no complete windows, skipped")
            continue
        windows = np.stack([s.window for s in samples])
        images = encode_batch(windows, specs)
        ts = TensorSet(
            images=images,
            labels=np.asarray([s.label for s in samples], dtype=np.float32),
            stats=np.asarray([(s.stats.mean, s.stats.std) for s in samples],
                             dtype=np.float32),
        )
        dest = out_dir / f"{series.meta.log_id}.k5gt"
        write_tensor_file(dest, ts)
        write_meta(dest.with_suffix(".k5gt.meta"), {
            "log_id": series.meta.log_id,
            "service": series.meta.service,
            "mobility": series.meta.mobility,
            "indicator": series.indicator,
            "encoders": ",".join(s.kind for s in specs),
            "mtf_bins": cfg["mtf_bins"],
            "window": cfg["window"],
            "stride": cfg["stride"],
            "count": len(ts),
        })
        for i in range(min(cfg["previews"], len(ts))):
            write_preview(out_dir / f"{series.meta.log_id}_w{i:04d}",
                          ts.images[i])
        print(f"{series.meta.log_id}: {len(ts)} windows "
              f"({encoder_name}) -> {dest}")
    return 0


def _tensor_meta(tensor_path: Path) -> dict:
    meta_path = tensor_path.with_suffix(tensor_path.suffix + ".meta")
    return read_meta(meta_path) if meta_path.exists() else {}


def _cmd_train(cfg) -> int:
    ts = read_tensor_file(cfg["tensors"])
    n_train = int(cfg["split"] * len(ts))
    if not 0 < cfg["split"] < 1:
        raise ConfigError(f"split must be in (0, 1), got {cfg['split']}")
    if n_train < 1:
        raise DataError(
            f"{cfg['tensors']}: split {cfg['split']} leaves no training samples"
        )
    if cfg["model"] == "cnn1d":
        raise ConfigError(
            "train works on encoded tensors; cnn1d consumes raw windows "
            "and is available through the experiment command"
        )
    keep = np.abs(ts.labels[:n_train]) <= TRAIN_LABEL_LIMIT
    if not keep.any():
        raise DataError(
            f"{cfg['tensors']}: every training label is a standardization "
            "guard artifact"
        )
    X = ts.images[:n_train][keep]
    y = ts.labels[:n_train][keep]
    reg = ConvImageRegressor(
        architecture=cfg["model"], loss=cfg["loss"],
        quantiles=cfg["quantiles"], seed=cfg["seed"],
        shortcut=cfg["shortcut"],
        **{k: v for k, v in (
            ("epochs", cfg["epochs"]), ("batch_size", cfg["batch_size"]),
            ("lr", cfg["lr"]), ("weight_decay", cfg["weight_decay"]),
            ("lr_milestones", cfg["milestones"]),
        ) if v is not None},
    )
    reg.fit(X, y)
    meta = _tensor_meta(Path(cfg["tensors"]))
    extra = {
        "model": cfg["model"], "loss": reg.config_.loss,
        "quantiles": list(reg.config_.quantiles), "seed": cfg["seed"],
        "split": cfg["split"], "source_meta": meta,
        "final_train_loss": reg.loss_history_[-1],
    }
    save_checkpoint(reg.network_, cfg["out"], extra)
    print(f"trained {cfg['model']} on {len(y)} samples, "
          f"final loss {reg.loss_history_[-1]:.6f}")
    print(f"checkpoint -> {cfg['out']}")
    return 0


def _predict_heads(net, X, chunk: int = 256) -> np.ndarray:
    out = [net.forward(X[i:i + chunk], training=False)
           for i in range(0, len(X), chunk)]
    return np.concatenate(out, axis=0).astype(np.float64)


def _cmd_evaluate(cfg) -> int:
    ts = read_tensor_file(cfg["tensors"])
    net, header = load_checkpoint(cfg["checkpoint"])
    if not 0 < cfg["split"] < 1:
        raise ConfigError(f"split must be in (0, 1), got {cfg['split']}")
    n_train = int(cfg["split"] * len(ts))
    if n_train < 1 or n_train >= len(ts):
        raise DataError(
            f"{cfg['tensors']}: split {cfg['split']} leaves an empty side"
        )
    raw = ts.raw_labels()
    truth = raw[n_train:]
    mean = ts.stats[n_train:, 0].astype(np.float64)
    gstd = np.maximum(ts.stats[n_train:, 1].astype(np.float64), 1e-8)
    heads = _predict_heads(net, ts.images[n_train:])
    loss = header.get("loss", "mse")
    metrics = {}
    if loss == "quantile":
        levels = [float(q) for q in header.get("quantiles", [])]
        med = levels.index(0.5) if 0.5 in levels else len(levels) // 2
        q = heads * gstd[:, None] + mean[:, None]
        pred = q[:, med]
        metrics["coverage"] = ci_coverage(q[:, 0], q[:, -1], truth)
        metrics["crossing_fraction"] = crossing_fraction(q)
    else:
        pred = heads[:, 0] * gstd + mean
    # one step back in the label stream is the last observed value
    persistence = raw[n_train - 1:-1]
    metrics["rmse"] = rmse(pred, truth)
    metrics["persistence_rmse"] = rmse(persistence, truth)
    span = float(truth.max() - truth.min())
    metrics["range_nrmse"] = metrics["rmse"] / span if span > 0 else 0.0
    metrics["n_train"] = n_train
    metrics["n_test"] = len(truth)
    lines = [f"{key}={metrics[key]!r}" if isinstance(metrics[key], float)
             else f"{key}={metrics[key]}" for key in sorted(metrics)]
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if cfg["out"]:
        atomic_write_text(Path(cfg["out"]), text)
    return 0


def _experiment_config(cfg) -> ExperimentConfig:
    return ExperimentConfig(
        indicator=cfg["indicator"], encoders=tuple(cfg["encoders"]),
        mtf_bins=cfg["mtf_bins"], model=cfg["model"], loss=cfg["loss"],
        quantiles=tuple(cfg["quantiles"]), window=cfg["window"],
        stride=cfg["stride"], split=cfg["split"], seed=cfg["seed"],
        min_samples=cfg["min_samples"], shortcut=cfg["shortcut"],
        epochs=cfg["epochs"], batch_size=cfg["batch_size"], lr=cfg["lr"],
        weight_decay=cfg["weight_decay"], lr_milestones=cfg["milestones"],
    )


def _experiment_worker(item):
    series, config = item
    return run_log(series, config)


def _cmd_experiment(cfg) -> int:
    config = _experiment_config(cfg)
    config.train_config()  # fail fast on bad hyperparameters
    entries = read_manifest(cfg["manifest"])
    jobs = []
    for path, meta in entries:
        log = load_log(path, meta)
        if not cfg["keep_all_modes"]:
            log = filter_5g(log, mode_column=cfg["mode_column"],
                            designator=cfg["designator"])
        log = sanitize(log, [cfg["indicator"]])
        jobs.append((extract_series(log, cfg["indicator"]), config))
    if cfg["workers"] > 1:
        with multiprocessing.Pool(cfg["workers"]) as pool:
            results = pool.map(_experiment_worker, jobs)
    else:
        results = [_experiment_worker(job) for job in jobs]
    reports = [r for r in results if isinstance(r, LogReport)]
    skips = [r for r in results if isinstance(r, SkippedLog)]
    fill_nrmse(reports)
    out_dir = Path(cfg["out"])
    atomic_write_text(out_dir / "per_log.csv", log_report_csv(reports))
    atomic_write_text(out_dir / "groups.csv", group_report_csv(reports))
    atomic_write_text(out_dir / "skipped.csv", skipped_csv(skips))
    for line in group_report_csv(reports).splitlines():
        print(line)
    print(f"{len(reports)} logs scored, {len(skips)} skipped -> {out_dir}")
    return 0


def _parse_per_log_csv(path) -> list:
    lines = Path(path).read_text("utf-8").splitlines()
    if not lines or lines[0] != ",".join(LOG_REPORT_COLUMNS):
        raise ParseError(f"{path}: not a per-log report")
    reports = []
    for ln, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(LOG_REPORT_COLUMNS):
            raise ParseError(f"{path}: line {ln}: wrong cell count")
        row = dict(zip(LOG_REPORT_COLUMNS, cells))
        try:
            reports.append(LogReport(
                log_id=row["log_id"], group=row["group"],
                indicator=row["indicator"], encoder=row["encoder"],
                model=row["model"], loss=row["loss"],
                n_train=int(row["n_train"]), n_test=int(row["n_test"]),
                seed=int(row["seed"]), rmse=float(row["rmse"]),
                persistence_rmse=float(row["persistence_rmse"]),
                range_nrmse=float(row["range_nrmse"]),
                coverage=float(row["coverage"]) if row["coverage"] else None,
                crossing_fraction=(float(row["crossing_fraction"])
                                   if row["crossing_fraction"] else None),
            ))
        except ValueError as exc:
            raise ParseError(f"{path}: line {ln}: {exc}") from None
    return reports


def _cmd_report(cfg) -> int:
    reports = _parse_per_log_csv(cfg["per_log"])
    fill_nrmse(reports)
    out_dir = Path(cfg["out"])
    atomic_write_text(out_dir / "per_log.csv", log_report_csv(reports))
    atomic_write_text(out_dir / "groups.csv", group_report_csv(reports))
    for line in group_report_csv(reports).splitlines():
        print(line)
    return 0


def _cmd_inspect(cfg) -> int:
    target = Path(cfg["target"])
    if not target.exists():
        raise DataError(f"{target}: no such file")
    head = target.read_bytes()[:4]
    if head == TENSOR_MAGIC:
        ts = read_tensor_file(target)
        n, c, h, w = ts.images.shape
        print("kind=tensor_file")
        print(f"samples={n}")
        print(f"channels={c}")
        print(f"image_size={h}x{w}")
        raw = ts.raw_labels()
        print(f"label_min={float(raw.min())!r}")
        print(f"label_max={float(raw.max())!r}")
        for key, value in sorted(_tensor_meta(target).items()):
            print(f"meta.{key}={value}")
        return 0
    if head == b"K5GC":
        net, header = load_checkpoint(target)
        print("kind=checkpoint")
        print(f"model={header.get('model', '?')}")
        print(f"loss={header.get('loss', '?')}")
        print(f"input_shape={tuple(header['input_shape'])}")
        print(f"params={count_params(net)}")
        print(f"macs={count_macs(net)}")
        print(f"learnable_layers={learnable_layer_count(net)}")
        for row in layer_table(net):
            print(f"layer.{row['index']}={row['kind']} "
                  f"out={row['out_shape']} params={row['params']} "
                  f"macs={row['macs']}")
        return 0
    if target.suffix == ".csv":
        series = read_series_csv(target)
        print("kind=series")
        print(f"log_id={series.meta.log_id}")
        print(f"group={series.meta.group}")
        print(f"indicator={series.indicator}")
        print(f"values={len(series.values)}")
        print(f"min={float(series.values.min())!r}")
        print(f"max={float(series.values.max())!r}")
        return 0
    raise DataError(f"{target}: unrecognized artifact")


_HANDLERS = {
    "preprocess": _cmd_preprocess,
    "encode": _cmd_encode,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "experiment": _cmd_experiment,
    "report": _cmd_report,
    "inspect": _cmd_inspect,
}


def main(argv=None) -> int:
    parser, commands = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return 1
        file_cfg = _load_config_file(args.config) if args.config else {}
        cfg = _resolve(commands[args.command], args, file_cfg)
        return _HANDLERS[args.command](cfg)
    except ConfigError as exc:
        print(f"kpimage: config error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, SchemaError, DataError) as exc:
        print(f"kpimage: data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"kpimage: cannot read input: {exc}", file=sys.stderr)
        return 2
    except KpimageError as exc:
        print(f"kpimage: error: {exc}", file=sys.stderr)
        return 3
    except Exception:
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
