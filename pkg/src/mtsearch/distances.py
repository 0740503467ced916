"""Exact distance kernels: ED, banded DTW, dependent multivariate DTW, DBA.

The DTW recursions are the classic O(t1*t2) dynamic programs restricted to a
Sakoe-Chiba band, jitted with numba.  Univariate DTW uses absolute local
cost; the dependent multivariate variant uses squared L2 per step pair.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import EmptyInput, ShapeError


@dataclass(frozen=True)
class DtwParams:
    """Sakoe-Chiba band as a fraction of the (longer) input length."""

    band_frac: float = 0.05

    def __post_init__(self):
        if not 0 < self.band_frac <= 1:
            raise ValueError("band_frac must be in (0, 1]")


DEFAULT_DTW = DtwParams()


def band_width(t1: int, t2: int, band_frac: float) -> int:
    """Band half-width in steps; widened if no warping path would fit."""
    w = math.ceil(band_frac * max(t1, t2))
    if w < abs(t1 - t2):
        warnings.warn(
            f"Sakoe-Chiba band {w} narrower than length gap {abs(t1 - t2)}; widening",
            stacklevel=2,
        )
        w = abs(t1 - t2) + 1
    return w


def euclidean(x: np.ndarray, y: np.ndarray) -> float:
    """Plain Euclidean distance over all entries of equal-shaped arrays."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeError(f"shape mismatch {x.shape} vs {y.shape}")
    return float(np.sqrt(np.sum((x - y) ** 2)))


@njit(cache=True, nogil=True)
def _dtw_1d(x, y, w, squared):
    n = x.shape[0]
    m = y.shape[0]
    D = np.full((n + 1, m + 1), np.inf)
    D[0, 0] = 0.0
    for i in range(1, n + 1):
        lo = max(1, i - w)
        hi = min(m, i + w)
        for j in range(lo, hi + 1):
            diff = x[i - 1] - y[j - 1]
            c = diff * diff if squared else abs(diff)
            best = D[i - 1, j - 1]
            if D[i - 1, j] < best:
                best = D[i - 1, j]
            if D[i, j - 1] < best:
                best = D[i, j - 1]
            D[i, j] = c + best
    return D[n, m]


@njit(cache=True, nogil=True)
def _dtw_nd_table(X, Y, w):
    n = X.shape[0]
    m = Y.shape[0]
    d = X.shape[1]
    D = np.full((n + 1, m + 1), np.inf)
    D[0, 0] = 0.0
    for i in range(1, n + 1):
        lo = max(1, i - w)
        hi = min(m, i + w)
        for j in range(lo, hi + 1):
            c = 0.0
            for p in range(d):
                diff = X[i - 1, p] - Y[j - 1, p]
                c += diff * diff
            best = D[i - 1, j - 1]
            if D[i - 1, j] < best:
                best = D[i - 1, j]
            if D[i, j - 1] < best:
                best = D[i, j - 1]
            D[i, j] = c + best
    return D


@njit(cache=True, nogil=True)
def _dtw_backtrack(D):
    # Walk the filled table back from the corner, diagonal preferred on ties.
    n = D.shape[0] - 1
    m = D.shape[1] - 1
    pi = np.empty(n + m, dtype=np.int64)
    pj = np.empty(n + m, dtype=np.int64)
    k = 0
    i, j = n, m
    while i > 0 and j > 0:
        pi[k] = i - 1
        pj[k] = j - 1
        k += 1
        diag = D[i - 1, j - 1]
        up = D[i - 1, j]
        left = D[i, j - 1]
        if diag <= up and diag <= left:
            i -= 1
            j -= 1
        elif up <= left:
            i -= 1
        else:
            j -= 1
    return pi[:k][::-1], pj[:k][::-1]


@njit(cache=True, nogil=True)
def _dtw_nd_batch(stacked, q, w):
    # stacked: (N, t, d); q: (t, d) -> dependent DTW distance per window.
    N = stacked.shape[0]
    out = np.empty(N)
    for n in range(N):
        D = _dtw_nd_table(stacked[n], q, w)
        out[n] = D[stacked.shape[1], q.shape[0]]
    return out


@njit(cache=True, nogil=True)
def _dtw_codes_batch(qcodes, xcodes, w):
    # qcodes: (A, t); xcodes: (M, A, t) -> per (window, atomic) DTW distance.
    M = xcodes.shape[0]
    A = xcodes.shape[1]
    out = np.empty((M, A))
    for mi in range(M):
        for ai in range(A):
            out[mi, ai] = _dtw_1d(qcodes[ai], xcodes[mi, ai], w, False)
    return out


def dtw_uts(x: np.ndarray, y: np.ndarray, params: DtwParams = DEFAULT_DTW) -> float:
    """Banded DTW between two univariate series (absolute local cost)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.size == 0 or y.size == 0:
        raise ShapeError("dtw_uts needs two non-empty 1-d arrays")
    w = band_width(len(x), len(y), params.band_frac)
    return float(_dtw_1d(x, y, w, False))


def dtw_dependent(
    x: np.ndarray, y: np.ndarray, params: DtwParams = DEFAULT_DTW
) -> float:
    """Dependent multivariate DTW: one path, squared L2 cost over all tracks."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if x.ndim != 2 or y.ndim != 2 or x.size == 0 or y.size == 0:
        raise ShapeError("dtw_dependent needs two non-empty (t, d) arrays")
    if x.shape[1] != y.shape[1]:
        raise ShapeError(f"track count mismatch {x.shape[1]} vs {y.shape[1]}")
    w = band_width(x.shape[0], y.shape[0], params.band_frac)
    D = _dtw_nd_table(x, y, w)
    return float(D[x.shape[0], y.shape[0]])


def dtw_alignment(
    x: np.ndarray, y: np.ndarray, params: DtwParams = DEFAULT_DTW
) -> tuple[np.ndarray, np.ndarray]:
    """Optimal warping path (index pairs) under the dependent DTW."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    w = band_width(x.shape[0], y.shape[0], params.band_frac)
    D = _dtw_nd_table(x, y, w)
    return _dtw_backtrack(D)


def dtw_per_track(
    q_values: np.ndarray, w_values: np.ndarray, params: DtwParams = DEFAULT_DTW
) -> np.ndarray:
    """Univariate DTW between matching tracks; one entry per track."""
    q = np.asarray(q_values, dtype=np.float64)
    x = np.asarray(w_values, dtype=np.float64)
    if q.shape != x.shape:
        raise ShapeError(f"shape mismatch {q.shape} vs {x.shape}")
    return np.array(
        [dtw_uts(q[:, j], x[:, j], params) for j in range(q.shape[1])]
    )


def dba_average(
    sequences: list[np.ndarray],
    init: np.ndarray,
    iterations: int = 10,
    params: DtwParams = DEFAULT_DTW,
    tol: float = 1e-9,
) -> np.ndarray:
    """DTW barycenter averaging.

    Repeatedly aligns every sequence to the current centroid, pools the
    values warped onto each centroid step, and replaces the step with the
    pooled mean.  Stops at `iterations` passes or when the centroid moves
    less than `tol` anywhere.
    """
    if not sequences:
        raise EmptyInput("dba_average needs at least one sequence")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    init = np.asarray(init, dtype=np.float64)
    if init.ndim == 1:
        init = init[:, None]
    seqs = []
    for s in sequences:
        s = np.asarray(s, dtype=np.float64)
        if s.ndim == 1:
            s = s[:, None]
        if s.shape != init.shape:
            raise ShapeError("all sequences must share the centroid's shape")
        seqs.append(s)

    centroid = init.copy()
    t = centroid.shape[0]
    for _ in range(iterations):
        sums = np.zeros_like(centroid)
        counts = np.zeros(t, dtype=np.int64)
        for s in seqs:
            pi, pj = dtw_alignment(centroid, s, params)
            for a, b in zip(pi, pj):
                sums[a] += s[b]
                counts[a] += 1
        new = sums / counts[:, None]
        if np.max(np.abs(new - centroid)) < tol:
            centroid = new
            break
        centroid = new
    return centroid
