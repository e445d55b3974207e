"""Seeded synthetic series for smoke tests and the acceptance run."""

from __future__ import annotations

import numpy as np

from .ingest import KpiSeries, LogMeta


def synthetic_values(n: int = 5000, seed: int = 0, amplitude: float = 10.0,
                     period: float = 12.0, harmonic: float = 0.5,
                     phi: float = 0.8, sigma: float = 0.3) -> np.ndarray:
    """Distorted sinusoid plus AR(1) noise: predictable shape, large steps.

    The second harmonic is load-bearing. A pure sinusoid is symmetric
    around its midline, and the image encodings that rescale each window
    to [-1, 1] cannot tell a window from its sign-flipped twin half a
    period away: recurrence plots and summation fields are exactly
    invariant under that flip, transition fields nearly so. The next
    value differs by sign between the twins, so no model could beat a
    constant predictor on a pure sinusoid. The harmonic breaks the
    symmetry; the AR(1) term keeps the task noisy without handing
    one-step persistence a win.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(n, dtype=np.float64)
    theta = 2.0 * np.pi * t / period
    wave = amplitude * (np.sin(theta) + harmonic * np.sin(2.0 * theta))
    ar = np.empty(n, dtype=np.float64)
    eps = rng.standard_normal(n) * sigma
    prev = 0.0
    for i in range(n):
        prev = phi * prev + eps[i]
        ar[i] = prev
    return wave + ar


def synthetic_series(n: int = 5000, seed: int = 0, log_id: str = "synthetic",
                     indicator: str = "CQI", **kwargs) -> KpiSeries:
    meta = LogMeta(log_id=log_id, service="download", mobility="static")
    return KpiSeries(indicator=indicator,
                     values=synthetic_values(n=n, seed=seed, **kwargs),
                     meta=meta)
