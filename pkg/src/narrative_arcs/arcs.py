"""From raw per-segment scores to comparable arcs.

standardize -> smooth -> downsample_lttb, plus the pointwise ensemble
median used as the reference arc.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadFraction,
    ConstantSeries,
    LengthMismatch,
    StageError,
    ThresholdExceedsLength,
    ThresholdTooSmall,
    TooFewArcs,
    TooShort,
)
from .scorers import ModelDescriptor, SentimentSeries

log = logging.getLogger(__name__)

STAGES = ("standardized", "smoothed", "downsampled")
MEDIAN_MODEL = ModelDescriptor("ensemble_median", "ensemble")
LTTB_TIE_RTOL = 1e-10


@dataclass(frozen=True)
class Arc:
    model: ModelDescriptor
    corpus_id: str
    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    stage: str = "standardized"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("x and y must be 1-d arrays of equal length")
        if self.stage not in STAGES:
            raise StageError(f"unknown stage {self.stage!r}")
        if len(x) > 1 and not np.all(np.diff(x) > 0):
            raise ValueError("x must be strictly increasing")
        if not np.all(np.isfinite(y)):
            raise ValueError("arc values must be finite")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return len(self.y)

    @property
    def points(self):
        return list(zip(self.x.tolist(), self.y.tolist()))

    @classmethod
    def from_values(cls, values, model=None, corpus_id="corpus", stage="standardized"):
        y = np.asarray(values, dtype=float)
        return cls(model or ModelDescriptor("arc", "external"), corpus_id, np.arange(len(y), dtype=float), y, stage)


@dataclass(frozen=True)
class EnsembleArcs:
    corpus_id: str
    arcs: tuple[Arc, ...]
    median: Arc
    excluded: tuple[str, ...] = ()

    def __post_init__(self):
        n = len(self.median)
        if any(len(a) != n for a in self.arcs):
            raise LengthMismatch("ensemble arcs and median must share one length")


def standardize(series: SentimentSeries) -> Arc:
    """Z-score with the population standard deviation."""
    x = np.asarray(series.values, dtype=float)
    n = len(x)
    if n < 2:
        raise TooShort(f"{series.model.model_id}: need at least 2 values, got {n}")
    mu = float(np.sum(x)) / n
    centered = x - mu
    sigma = math.sqrt(float(np.dot(centered, centered)) / n)
    scale = max(1.0, float(np.max(np.abs(x))))
    if sigma <= 1e-12 * scale:
        raise ConstantSeries(f"{series.model.model_id} is constant on {series.corpus_id}")
    z = centered / sigma
    # second pass removes the residual rounding in mean and spread
    z = z - float(np.sum(z)) / n
    z = z / math.sqrt(float(np.dot(z, z)) / n)
    return Arc(series.model, series.corpus_id, np.arange(n, dtype=float), z, "standardized")


def round_half_away(v: float) -> int:
    return int(math.floor(abs(v) + 0.5)) * (1 if v >= 0 else -1)


def window_size(fraction: float, n: int) -> int:
    if not (0 < fraction <= 1):
        raise BadFraction(f"smoothing fraction must be in (0, 1], got {fraction}")
    return max(1, round_half_away(fraction * n))


def smooth(arc: Arc, fraction: float = 0.10) -> Arc:
    """Centered simple moving average whose window shrinks at both ends.

    Window width is ``round(fraction * N)`` (at least 1); point i averages
    indices ``i - w//2 .. i + w//2`` clipped to the series.
    """
    if arc.stage != "standardized":
        raise StageError(f"smooth expects a standardized arc, got {arc.stage}")
    y = arc.y
    n = len(y)
    half = window_size(fraction, n) // 2
    if half == 0:
        out = y.copy()
    else:
        csum = np.concatenate(([0.0], np.cumsum(y)))
        idx = np.arange(n)
        lo = np.maximum(idx - half, 0)
        hi = np.minimum(idx + half + 1, n)
        out = (csum[hi] - csum[lo]) / (hi - lo)
        # cumulative-sum rounding must not leave the input's range
        out = np.clip(out, y.min(), y.max())
    return Arc(arc.model, arc.corpus_id, arc.x, out, "smoothed")


def _pick_python(ax, ay, cx, cy, xa, ya, xs, ys, lo, hi):
    areas, size = [], 0.0
    for j in range(lo, hi):
        t1 = (ax - cx) * (ys[j] - ay)
        t2 = (ax - xs[j]) * (cy - ay)
        areas.append(0.5 * abs(t1 - t2))
        mag = (abs(ax) + abs(cx)) * (abs(ys[j]) + abs(ay)) + (abs(ax) + abs(xs[j])) * (abs(cy) + abs(ay))
        size = max(size, 0.5 * mag)
    floor_ = max(areas) - LTTB_TIE_RTOL * size
    return next(i for i, v in enumerate(areas) if v >= floor_)


def _pick_numpy(ax, ay, cx, cy, xa, ya, xs, ys, lo, hi):
    # same arithmetic as _pick_python, elementwise; faster for wide buckets
    bx, by = xa[lo:hi], ya[lo:hi]
    areas = 0.5 * np.abs((ax - cx) * (by - ay) - (ax - bx) * (cy - ay))
    mag = (abs(ax) + abs(cx)) * (np.abs(by) + abs(ay)) + (abs(ax) + np.abs(bx)) * (abs(cy) + abs(ay))
    floor_ = areas.max() - LTTB_TIE_RTOL * float((0.5 * mag).max())
    return int(np.flatnonzero(areas >= floor_)[0])


def lttb_indices(x: np.ndarray, y: np.ndarray, threshold: int) -> np.ndarray:
    """Indices kept by Largest-Triangle-Three-Buckets.

    Interior points are split into ``threshold - 2`` buckets; from each the
    point forming the largest triangle with the previously kept point and
    the mean of the next bucket is kept. Areas within ``LTTB_TIE_RTOL`` of
    the largest (relative to the coordinate magnitudes) count as tied and
    the lowest index wins, so rounding noise cannot flip an exact tie.
    """
    n = len(y)
    if threshold < 3:
        raise ThresholdTooSmall(f"threshold must be >= 3, got {threshold}")
    if threshold > n:
        raise ThresholdExceedsLength(f"threshold {threshold} exceeds series length {n}")
    if threshold == n:
        return np.arange(n)
    xa, ya = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    xs, ys = xa.tolist(), ya.tolist()
    # bucket i starts at floor(i * (n - 2) / (threshold - 2)) + 1, in exact integers
    k = threshold - 2
    edges = [(i * (n - 2)) // k + 1 for i in range(k)] + [n - 1]
    # the point each bucket aims at: next bucket's centroid, or the last point
    starts = edges[1:k]
    widths = np.diff(edges[1:])
    tx = (np.add.reduceat(xa[: n - 1], starts) / widths).tolist() if k > 1 else []
    ty = (np.add.reduceat(ya[: n - 1], starts) / widths).tolist() if k > 1 else []
    targets = list(zip(tx, ty)) + [(xs[n - 1], ys[n - 1])]
    keep = [0]
    for b in range(k):
        a = keep[-1]
        lo, hi = edges[b], edges[b + 1]
        pick = _pick_numpy if hi - lo > 32 else _pick_python
        keep.append(lo + pick(xs[a], ys[a], *targets[b], xa, ya, xs, ys, lo, hi))
    keep.append(n - 1)
    return np.asarray(keep)


def downsample_lttb(arc: Arc, threshold: int = 25) -> Arc:
    idx = lttb_indices(arc.x, arc.y, threshold)
    return Arc(arc.model, arc.corpus_id, arc.x[idx], arc.y[idx], "downsampled")


def ensemble_median(arcs: Sequence[Arc]) -> Arc:
    """Pointwise median; even counts take the mean of the two middle values."""
    if len(arcs) < 2:
        raise TooFewArcs(f"need at least 2 arcs, got {len(arcs)}")
    n = len(arcs[0])
    if any(len(a) != n for a in arcs):
        raise LengthMismatch("arcs differ in length")
    stages = {a.stage for a in arcs}
    if len(stages) != 1:
        raise StageError(f"arcs mix stages {sorted(stages)}")
    ys = np.vstack([a.y for a in arcs])
    med = np.median(ys, axis=0)
    x0 = arcs[0].x
    x = x0 if all(np.array_equal(a.x, x0) for a in arcs) else np.arange(n, dtype=float)
    return Arc(MEDIAN_MODEL, arcs[0].corpus_id, x, med, arcs[0].stage)


def build_ensemble(series: Sequence[SentimentSeries], fraction: float = 0.10) -> EnsembleArcs:
    """Standardize and smooth every series, then take the median.

    Constant series cannot be standardized; they are dropped with a warning
    instead of failing the whole ensemble.
    """
    if not series:
        raise TooFewArcs("no series to build an ensemble from")
    lengths = {len(s) for s in series}
    if len(lengths) != 1:
        raise LengthMismatch(f"series lengths differ: {sorted(lengths)}")
    arcs, excluded = [], []
    for s in series:
        try:
            arcs.append(smooth(standardize(s), fraction))
        except ConstantSeries:
            log.warning("excluding constant model %s on corpus %s", s.model.model_id, s.corpus_id)
            excluded.append(s.model.model_id)
    median = ensemble_median(arcs)
    return EnsembleArcs(series[0].corpus_id, tuple(arcs), median, tuple(excluded))
