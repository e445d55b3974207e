"""kpimage: image-encoded forecasting of 5G radio quality series.

The pipeline slides fixed windows over a KPI series, standardizes each
window against only its own past, encodes windows as small images
(recurrence plot, Gramian angular fields, Markov transition field), and
trains a compact convolutional regressor to predict the next value,
optionally with calibrated quantile heads.
"""

from .encoders import (
    DEFAULT_MTF_BINS,
    ENCODER_KINDS,
    EncoderSpec,
    GramianAngularField,
    MarkovTransitionField,
    RecurrencePlot,
    WindowImager,
    encode_batch,
    encode_window,
    gadf,
    gasf,
    mtf,
    parse_encoders,
    recurrence_plot,
)
from .errors import (
    ConfigError,
    DataError,
    EngineStateError,
    KpimageError,
    ParseError,
    SchemaError,
    ShapeError,
)
from .experiment import (
    ExperimentConfig,
    GroupSummary,
    LogReport,
    SkippedLog,
    ci_coverage,
    crossing_fraction,
    fill_nrmse,
    group_report_csv,
    log_report_csv,
    rmse,
    run_log,
    summarize,
)
from .ingest import (
    INDICATORS,
    MOBILITIES,
    SERVICES,
    KpiSeries,
    LogMeta,
    TransmissionLog,
    extract_series,
    filter_5g,
    load_log,
    parse_log,
    read_manifest,
    sanitize,
)
from .models import (
    MODEL_KINDS,
    build_cnn1d,
    build_hatami,
    build_model,
    build_resnet20,
    default_train_config,
)
from .regressor import ConvImageRegressor
from .storage import (
    TensorSet,
    read_series_csv,
    read_tensor_file,
    write_preview,
    write_series_csv,
    write_tensor_file,
)
from .synthetic import synthetic_series, synthetic_values
from .windowing import (
    DEFAULT_STRIDE,
    DEFAULT_WINDOW,
    STD_EPSILON,
    TRAIN_LABEL_LIMIT,
    StandardizationStats,
    WindowSample,
    causal_standardize,
    destandardize,
    filter_trainable,
    history_stats,
    make_samples,
    slide_windows,
    split_train_test,
)

__version__ = "1.0.0"

__all__ = [
    "ConfigError", "ConvImageRegressor", "DataError", "DEFAULT_MTF_BINS",
    "DEFAULT_STRIDE", "DEFAULT_WINDOW", "ENCODER_KINDS", "EncoderSpec",
    "EngineStateError", "ExperimentConfig", "GramianAngularField",
    "GroupSummary", "INDICATORS", "KpiSeries", "KpimageError", "LogMeta",
    "LogReport", "MOBILITIES", "MODEL_KINDS", "MarkovTransitionField",
    "ParseError", "RecurrencePlot", "SERVICES", "STD_EPSILON", "SchemaError",
    "ShapeError", "SkippedLog", "StandardizationStats", "TRAIN_LABEL_LIMIT",
    "TensorSet", "TransmissionLog", "WindowImager", "WindowSample",
    "build_cnn1d", "build_hatami", "build_model", "build_resnet20",
    "causal_standardize", "ci_coverage", "crossing_fraction",
    "default_train_config", "destandardize", "encode_batch", "encode_window",
    "extract_series", "fill_nrmse", "filter_5g", "filter_trainable", "gadf",
    "gasf", "group_report_csv",
    "history_stats", "load_log", "log_report_csv", "make_samples", "mtf",
    "parse_encoders", "parse_log", "read_manifest", "read_series_csv",
    "read_tensor_file", "recurrence_plot", "rmse", "run_log", "sanitize",
    "slide_windows", "split_train_test", "summarize", "synthetic_series",
    "synthetic_values", "write_preview", "write_series_csv",
    "write_tensor_file",
]
