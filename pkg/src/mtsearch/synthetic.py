"""Synthetic multivariate series built from thermal-style segments.

The generator strings together linear ramps, constant plateaus, and
first-order step responses with additive Gaussian noise, which yields the
recurring, easily recognizable patterns the retrieval experiments need.  A
planted variant overwrites chosen regions with known per-track patterns so
steering experiments have verifiable targets.
"""

from __future__ import annotations

import numpy as np

from .data import MultivariateTimeSeries


def _segment_track(rng: np.random.Generator, n: int, noise: float) -> np.ndarray:
    out = np.empty(n)
    pos = 0
    level = float(rng.uniform(-1.0, 1.0))
    while pos < n:
        seg_len = min(int(rng.integers(20, 61)), n - pos)
        kind = int(rng.integers(0, 3))
        if kind == 0:  # linear ramp
            target = float(rng.uniform(-2.0, 2.0))
            seg = np.linspace(level, target, seg_len)
            level = target
        elif kind == 1:  # constant plateau
            seg = np.full(seg_len, level)
        else:  # first-order step response
            target = float(rng.uniform(-2.0, 2.0))
            tau = float(rng.uniform(3.0, 15.0))
            tt = np.arange(seg_len)
            seg = target + (level - target) * np.exp(-tt / tau)
            level = float(seg[-1])
        out[pos : pos + seg_len] = seg
        pos += seg_len
    out += rng.normal(0.0, noise, n)
    return out


def make_series(
    n: int, d: int, seed: int = 0, noise: float = 0.05
) -> MultivariateTimeSeries:
    """Segment-based series of n steps and d independent tracks."""
    rng = np.random.default_rng(seed)
    values = np.column_stack([_segment_track(rng, n, noise) for _ in range(d)])
    return MultivariateTimeSeries(
        values=values,
        track_names=tuple(f"track_{j}" for j in range(d)),
        sampling_note=f"synthetic segments, seed={seed}",
    )


def make_corpus(
    n_windows: int = 10_000,
    t: int = 120,
    d: int = 3,
    seed: int = 0,
    noise: float = 0.05,
    n_motifs: int = 12,
    filler_range: tuple[int, int] = (20, 81),
) -> MultivariateTimeSeries:
    """Series with recurring motifs, sized for exactly n_windows stride-1 windows.

    A bank of n_motifs multi-track patterns (each one window long, built from
    the same segment vocabulary) is placed repeatedly with fresh noise,
    joined by connective segment filler.  Recurring, recognizable events make
    retrieval quality measurable: the close matches of a query really exist.
    """
    rng = np.random.default_rng(seed)
    n = n_windows + t - 1
    motif_rngs = [np.random.default_rng((seed, 977, m)) for m in range(n_motifs)]
    motifs = [
        np.column_stack([_segment_track(mr, t, 0.0) for _ in range(d)])
        for mr in motif_rngs
    ]

    pieces = []
    total = 0
    while total < n:
        filler_len = int(rng.integers(filler_range[0], filler_range[1]))
        filler = np.column_stack(
            [_segment_track(rng, filler_len, noise) for _ in range(d)]
        )
        pieces.append(filler)
        total += filler_len
        if total >= n:
            break
        motif = motifs[int(rng.integers(n_motifs))]
        scale = float(rng.uniform(0.8, 1.25))
        pieces.append(scale * motif + rng.normal(0.0, noise, motif.shape))
        total += t
    values = np.concatenate(pieces, axis=0)[:n]
    return MultivariateTimeSeries(
        values=values,
        track_names=tuple(f"track_{j}" for j in range(d)),
        sampling_note=f"synthetic recurring motifs, seed={seed}",
    )


def _bump_pattern(t: int, track: int, variant: int) -> np.ndarray:
    """Deterministic per-track target shape: phased sine bursts over a ramp."""
    x = np.linspace(0.0, 1.0, t)
    freq = 2.0 + track + variant
    phase = 0.6 * track + 0.3 * variant
    envelope = np.sin(np.pi * x) ** 2
    return np.sin(2 * np.pi * freq * x + phase) * envelope + 0.5 * x


def make_planted_corpus(
    n_windows: int,
    t: int,
    d: int,
    seed: int = 0,
    boost_track: int = 1,
    suppress_track: int = 3,
    n_boost: int = 60,
    n_suppress: int = 60,
    pattern_noise: float = 0.05,
    base_noise: float = 0.05,
):
    """Corpus with a planted query plus two single-track pattern groups.

    Returns (series, info) where info holds the query offset and the planted
    group offsets.  The query region carries every track's target pattern;
    the boost group repeats only the boost track's pattern and the suppress
    group only the suppress track's, so shifting weight between those tracks
    visibly changes which group dominates the top ranks.
    """
    if boost_track == suppress_track:
        raise ValueError("boost and suppress tracks must differ")
    rng = np.random.default_rng(seed)
    n = n_windows + t - 1
    values = np.column_stack(
        [_segment_track(rng, n, base_noise) for _ in range(d)]
    )

    slots = np.arange(0, n - t, 2 * t)
    rng.shuffle(slots)
    need = 1 + n_boost + n_suppress
    if len(slots) < need:
        raise ValueError("corpus too small for the requested plant counts")
    q0 = int(slots[0])
    boost_starts = np.sort(slots[1 : 1 + n_boost])
    suppress_starts = np.sort(slots[1 + n_boost : need])

    amp = 2.0
    for j in range(d):
        values[q0 : q0 + t, j] = amp * _bump_pattern(t, j, variant=0) + rng.normal(
            0.0, pattern_noise, t
        )
    for s in boost_starts:
        values[s : s + t, boost_track] = amp * _bump_pattern(
            t, boost_track, variant=0
        ) + rng.normal(0.0, pattern_noise, t)
    for s in suppress_starts:
        values[s : s + t, suppress_track] = amp * _bump_pattern(
            t, suppress_track, variant=0
        ) + rng.normal(0.0, pattern_noise, t)

    series = MultivariateTimeSeries(
        values=values,
        track_names=tuple(f"track_{j}" for j in range(d)),
        sampling_note=f"planted synthetic, seed={seed}",
    )
    info = {
        "query_start": q0,
        "boost_starts": [int(s) for s in boost_starts],
        "suppress_starts": [int(s) for s in suppress_starts],
        "boost_track": boost_track,
        "suppress_track": suppress_track,
    }
    return series, info
