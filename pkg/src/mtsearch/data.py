"""Series ingestion, sliding windows, per-track normalization, downsampling.

A multivariate series is an (n, d) float matrix: n time steps, d named
tracks.  Retrieval never looks at raw windows; every window is z-normalized
per track so only the shape matters, not offset or amplitude.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    EmptyDataset,
    FormatError,
    ParseError,
    UnknownTrack,
    WindowTooLarge,
)

# Tracks with population std below this are treated as flat and map to zeros.
DEGENERATE_STD = 1e-9

PROVENANCE_USER = "user-selected"
PROVENANCE_DBA = "dba-updated"


@dataclass(frozen=True)
class MultivariateTimeSeries:
    """Immutable (n, d) series with one name per track."""

    values: np.ndarray
    track_names: tuple[str, ...]
    sampling_note: Optional[str] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("values must be a non-empty (n, d) matrix")
        if not np.isfinite(v).all():
            raise ValueError("series contains non-finite values")
        names = tuple(self.track_names)
        if len(names) != v.shape[1]:
            raise ValueError("track_names must have one entry per track")
        if len(set(names)) != len(names):
            raise ValueError("track names must be distinct")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "track_names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Window:
    """One z-normalized slice of the source series."""

    start: int
    values: np.ndarray  # (t, d), normalized per track


@dataclass(frozen=True)
class Query:
    """A search pattern; same normalization contract as Window."""

    values: np.ndarray  # (t, d)
    provenance: str = PROVENANCE_USER

    @property
    def t(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class WindowSet:
    """Ordered sliding windows with their shared geometry.

    ``stacked`` holds all window values as one (N, t, d) array; the Window
    objects are views into it, so vectorized code can work on the array while
    per-window code keeps offsets attached.
    """

    windows: tuple[Window, ...]
    t: int
    stride: int
    stacked: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.windows)

    @property
    def starts(self) -> np.ndarray:
        return np.arange(len(self.windows)) * self.stride

    @property
    def d(self) -> int:
        return self.stacked.shape[2]


def load_csv(path, has_header: bool = False) -> MultivariateTimeSeries:
    """Read one series from a CSV file: columns are tracks, rows time steps."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row and any(c.strip() for c in row)]
    if not rows:
        raise EmptyDataset("no rows in CSV")

    names: Optional[list[str]] = None
    if has_header:
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise EmptyDataset("header but no data rows")

    d = len(rows[0])
    values = np.empty((len(rows), d), dtype=np.float64)
    for i, row in enumerate(rows):
        if len(row) != d:
            raise FormatError(i)
        for j, cell in enumerate(row):
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise ParseError(i, j) from None
    if not np.isfinite(values).all():
        bad = np.argwhere(~np.isfinite(values))[0]
        raise ParseError(int(bad[0]), int(bad[1]))

    if names is None:
        names = [f"track_{j}" for j in range(d)]
    return MultivariateTimeSeries(values=values, track_names=tuple(names))


def normalize_window(raw: np.ndarray) -> np.ndarray:
    """Z-normalize each track with the population standard deviation.

    Flat tracks (std < 1e-9) become all zeros instead of raising, so
    retrieval survives constant sensor segments.
    """
    raw = np.asarray(raw, dtype=np.float64)
    mean = raw.mean(axis=0)
    std = raw.std(axis=0)  # population std (ddof=0)
    out = raw - mean
    degenerate = std < DEGENERATE_STD
    safe = np.where(degenerate, 1.0, std)
    out /= safe
    out[:, degenerate] = 0.0
    return out


def extract_windows(
    series: MultivariateTimeSeries, t: int, stride: int = 1
) -> WindowSet:
    """Slide a length-t window over the series and normalize every slice."""
    if t > series.n:
        raise WindowTooLarge(f"t={t} exceeds series length n={series.n}")
    if t < 2:
        raise ValueError("window length must be at least 2")
    if stride < 1:
        raise ValueError("stride must be >= 1")

    count = (series.n - t) // stride + 1
    starts = np.arange(count) * stride
    stacked = np.empty((count, t, series.d), dtype=np.float64)
    for i, s in enumerate(starts):
        stacked[i] = series.values[s : s + t]

    # Vectorized per-track z-normalization across all windows at once.
    mean = stacked.mean(axis=1, keepdims=True)
    std = stacked.std(axis=1, keepdims=True)
    degenerate = std < DEGENERATE_STD
    stacked -= mean
    stacked /= np.where(degenerate, 1.0, std)
    stacked[np.broadcast_to(degenerate, stacked.shape)] = 0.0
    stacked.setflags(write=False)

    windows = tuple(
        Window(start=int(s), values=stacked[i]) for i, s in enumerate(starts)
    )
    return WindowSet(windows=windows, t=t, stride=stride, stacked=stacked)


def query_from_series(
    series: MultivariateTimeSeries, start: int, t: int
) -> Query:
    """Cut a query out of the series; normalized exactly like a window."""
    if start < 0 or start > series.n - t:
        raise WindowTooLarge(
            f"query start {start} out of range for t={t}, n={series.n}"
        )
    return Query(values=normalize_window(series.values[start : start + t]))


def downsample_track(
    series: MultivariateTimeSeries, track: int, target_points: int
) -> list[tuple[int, float, float, float]]:
    """Reduce one track to (time, min, max, mean) tuples over equal chunks.

    With target_points == n every chunk is a single sample, so the result is
    lossless.
    """
    if track < 0 or track >= series.d:
        raise UnknownTrack(f"track index {track} out of range (d={series.d})")
    if not 1 <= target_points <= series.n:
        raise ValueError("target_points must be in [1, n]")

    col = series.values[:, track]
    n = series.n
    bounds = [(i * n) // target_points for i in range(target_points + 1)]
    out = []
    for i in range(target_points):
        lo, hi = bounds[i], bounds[i + 1]
        chunk = col[lo:hi]
        out.append((lo, float(chunk.min()), float(chunk.max()), float(chunk.mean())))
    return out


def series_to_csv(series: MultivariateTimeSeries, path) -> None:
    """Write a series back to the CSV shape load_csv reads (with header)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(series.track_names)
        writer.writerows(series.values.tolist())
