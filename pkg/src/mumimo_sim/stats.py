"""Batch-means confidence intervals."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy import stats


class EstimationError(ValueError):
    pass


def confidence_half_width(batch_means: Sequence[float], confidence: float = 0.95) -> float:
    """Student-t half-width of the mean of non-overlapping batch means."""
    x = np.asarray(batch_means, dtype=float)
    if x.size < 2:
        raise EstimationError(f"need at least 2 batches, got {x.size}")
    if not np.all(np.isfinite(x)):
        return math.nan
    s = x.std(ddof=1)
    if s == 0.0:
        return 0.0
    t = stats.t.ppf(0.5 + confidence / 2, df=x.size - 1)
    return float(t * s / math.sqrt(x.size))


def confidence_intervals(samples: dict[str, Sequence[float]], confidence: float = 0.95) -> dict[str, float]:
    return {name: confidence_half_width(values, confidence) for name, values in samples.items()}
