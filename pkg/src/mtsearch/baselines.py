"""Reference retrievers (ED, dependent DTW, SAX) and the evaluation harness.

The dependent-DTW ranking's top 50 serves as ground truth everywhere; recall
and the two precision flavors are computed as exact rational counts against
it.  The steerability driver replays the manual-weight protocol: fixed
weight vectors pushed further every round while the per-track DTW of the top
hits is tracked.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace as dc_replace
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.stats import norm

from .data import Query, WindowSet
from .distances import DtwParams, _dtw_nd_batch, band_width, dtw_per_track
from .errors import ResourceExhausted
from .lsh import LshConfig
from .pipeline import Session, run_query

ORACLE_SIZE = 50


@dataclass(frozen=True)
class SaxConfig:
    segments: int
    alphabet: int = 10

    def __post_init__(self):
        if self.segments < 1:
            raise ValueError("segments must be >= 1")
        if not 2 <= self.alphabet <= 26:
            raise ValueError("alphabet must be in [2, 26]")


@dataclass(frozen=True)
class BaselineRanking:
    """Total ordering of all windows; ties broken by window index."""

    order: np.ndarray  # window indices, most similar first
    distances: np.ndarray  # aligned with window index, not with order


@dataclass
class EvalReport:
    method: str
    recall: Fraction
    precision_50: Fraction
    precision_10pct: Fraction
    preprocessing_s: float = 0.0
    querying_s: float = 0.0
    extra: dict = field(default_factory=dict)


def _rank(distances: np.ndarray) -> np.ndarray:
    idx = np.arange(len(distances))
    return np.lexsort((idx, distances))


def baseline_ed(windows: WindowSet, query: Query) -> BaselineRanking:
    """Rank every window by plain Euclidean distance to the query."""
    diff = windows.stacked - query.values[None, :, :]
    dists = np.sqrt((diff ** 2).sum(axis=(1, 2)))
    return BaselineRanking(order=_rank(dists), distances=dists)


def baseline_dtwd(
    windows: WindowSet, query: Query, params: DtwParams = DtwParams()
) -> BaselineRanking:
    """Rank every window by dependent multivariate DTW; defines the oracle."""
    q = np.ascontiguousarray(query.values)
    w = band_width(windows.t, q.shape[0], params.band_frac)
    dists = _dtw_nd_batch(windows.stacked, q, w)
    return BaselineRanking(order=_rank(dists), distances=dists)


def sax_breakpoints(alphabet: int) -> np.ndarray:
    """Standard-normal breakpoints at i/alphabet quantiles, i = 1..alphabet-1."""
    return norm.ppf(np.arange(1, alphabet) / alphabet)


def _paa(values: np.ndarray, segments: int) -> np.ndarray:
    """Piecewise aggregate means over near-equal contiguous chunks."""
    t = values.shape[0]
    bounds = [(i * t) // segments for i in range(segments + 1)]
    return np.stack(
        [values[bounds[i] : bounds[i + 1]].mean(axis=0) for i in range(segments)]
    )


def sax_transform(window_values: np.ndarray, cfg: SaxConfig) -> list[str]:
    """Symbolize one window: PAA means mapped through normal breakpoints.

    Returns one lowercase string per track ('a' = lowest bucket).
    """
    values = np.asarray(window_values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    if cfg.segments > values.shape[0]:
        raise ValueError("segments cannot exceed the window length")
    paa = _paa(values, cfg.segments)  # (segments, d)
    beta = sax_breakpoints(cfg.alphabet)
    symbols = np.digitize(paa, beta)  # 0..alphabet-1
    return [
        "".join(chr(ord("a") + s) for s in symbols[:, j])
        for j in range(values.shape[1])
    ]


def _mindist_table(alphabet: int) -> np.ndarray:
    """Pairwise symbol gap: zero for adjacent symbols, breakpoint gap beyond."""
    beta = sax_breakpoints(alphabet)
    tbl = np.zeros((alphabet, alphabet))
    for r in range(alphabet):
        for c in range(alphabet):
            if abs(r - c) > 1:
                tbl[r, c] = beta[max(r, c) - 1] - beta[min(r, c)]
    return tbl


def baseline_sax(
    windows: WindowSet,
    query: Query,
    cfg: SaxConfig,
    memory_budget_bytes: int = 512 * 1024 * 1024,
) -> BaselineRanking:
    """Rank windows by per-track MINDIST summed over tracks."""
    n, t, d = windows.stacked.shape
    if n * cfg.segments * d > memory_budget_bytes:
        raise ResourceExhausted(
            f"SAX symbol index would need {n * cfg.segments * d} bytes"
        )
    beta = sax_breakpoints(cfg.alphabet)
    bounds = [(i * t) // cfg.segments for i in range(cfg.segments + 1)]
    paa = np.stack(
        [
            windows.stacked[:, bounds[i] : bounds[i + 1], :].mean(axis=1)
            for i in range(cfg.segments)
        ],
        axis=1,
    )  # (n, segments, d)
    syms = np.digitize(paa, beta).astype(np.int8)
    qsyms = np.digitize(_paa(query.values, cfg.segments), beta).astype(np.int8)

    tbl = _mindist_table(cfg.alphabet)
    cell = tbl[qsyms[None, :, :], syms]  # (n, segments, d)
    scale = math.sqrt(t / cfg.segments)
    dists = (scale * np.sqrt((cell ** 2).sum(axis=1))).sum(axis=1)
    return BaselineRanking(order=_rank(dists), distances=dists)


def oracle_top_k(windows: WindowSet, query: Query, params=DtwParams(), k=ORACLE_SIZE):
    ranking = baseline_dtwd(windows, query, params)
    return list(ranking.order[: min(k, len(ranking.order))])


def evaluate(
    method: str,
    order,
    classified_similar,
    oracle,
    n_windows: int,
    preprocessing_s: float = 0.0,
    querying_s: float = 0.0,
) -> EvalReport:
    """Exact retrieval metrics against the oracle set.

    recall: oracle windows inside the method's classified-similar set.
    precision-50: oracle windows inside the method's top-50.
    precision-10%: oracle windows inside the method's top 10% of all windows.
    All as exact fractions of the oracle size.
    """
    oracle_set = set(int(i) for i in oracle)
    base = len(oracle_set)
    if base == 0:
        raise ValueError("oracle must be nonempty")
    order = [int(i) for i in order]
    similar = set(int(i) for i in classified_similar)
    top50 = set(order[: min(ORACLE_SIZE, len(order))])
    top10 = set(order[: math.ceil(0.10 * n_windows)])
    return EvalReport(
        method=method,
        recall=Fraction(len(oracle_set & similar), base),
        precision_50=Fraction(len(oracle_set & top50), base),
        precision_10pct=Fraction(len(oracle_set & top10), base),
        preprocessing_s=preprocessing_s,
        querying_s=querying_s,
    )


def steer_weight(d: int, boost: int, suppress: int, round_index: int) -> np.ndarray:
    """Manual weight vector for one steering round, scaled to norm sqrt(d)."""
    v = np.ones(d)
    v[boost] = 1.0 + round_index
    v[suppress] = 1.0 / (1.0 + round_index)
    return v * (math.sqrt(d) / np.linalg.norm(v))


def steerability_experiment(
    session: Session,
    rounds: int,
    boost: int,
    suppress: int,
    top: int = ORACLE_SIZE,
    params: DtwParams = DtwParams(),
):
    """Push weight onto one track and off another, round after round.

    Round 0 is the unsteered all-ones reference.  Returns (per_round, weights)
    where per_round[r] is the mean per-track DTW between the query and the
    round's top windows.
    """
    if session.query is None:
        raise ValueError("session needs a query")
    if boost == suppress or session.d < 2:
        raise ValueError("need two distinct tracks")
    query = session.query
    per_round = []
    weights = []
    for r in range(rounds + 1):
        w = steer_weight(session.d, boost, suppress, r)
        session.model = session.model.with_weight(w, query=query)
        result = run_query(session)
        picks = result.top_k[:top]
        track_d = np.zeros(session.d)
        for wi in picks:
            track_d += dtw_per_track(
                query.values, session.window_set.windows[wi].values, params
            )
        per_round.append(track_d / max(len(picks), 1))
        weights.append(w)
    return np.stack(per_round), np.stack(weights)


# --- timed benchmark harness -------------------------------------------------

HASH_METHODS = ("hash-dtw", "hash-ed")
ALL_METHODS = HASH_METHODS + ("ed", "dtwd", "sax")


def run_benchmark(
    series,
    t: int,
    query_starts: list[int],
    seed: int = 0,
    methods=ALL_METHODS,
    config: Optional[LshConfig] = None,
    sax_alphabet: int = 10,
    dtw_params: DtwParams = DtwParams(),
) -> list[EvalReport]:
    """Time and score every method over the given queries on one dataset.

    Preprocessing covers work reusable across queries (hashing the windows,
    symbolizing for SAX); querying covers everything from receiving a query
    to the finished ranking.  Reported accuracy is the mean over queries of
    the exact per-query fractions.
    """
    from .data import extract_windows, query_from_series
    from .lsh import build_index, compute_query_codes, generate_candidates, generate_model, score_candidates

    windows = extract_windows(series, t)
    n = len(windows)
    queries = [query_from_series(series, s, t) for s in query_starts]
    oracles = {}
    oracle_rank = {}
    for s, q in zip(query_starts, queries):
        ranking = baseline_dtwd(windows, q, dtw_params)
        oracle_rank[s] = ranking
        oracles[s] = list(ranking.order[:ORACLE_SIZE])

    reports = []
    for method in methods:
        if method in HASH_METHODS:
            cfg = dc_replace(
                config or LshConfig(),
                rank_metric="DTW" if method == "hash-dtw" else "ED",
            )
            t0 = time.perf_counter()
            model = generate_model(series.d, t, cfg, seed)
            index = build_index(model, windows)
            prep = time.perf_counter() - t0
            accs = []
            qtime = 0.0
            for s, q in zip(query_starts, queries):
                t0 = time.perf_counter()
                m = model.with_query(q)
                cands = generate_candidates(m, q, windows, index=index)
                cands = score_candidates(m, q, cands, windows, index=index)
                order = cands.indices[np.lexsort((cands.indices, cands.scores))]
                in_cand = set(int(x) for x in order)
                full_order = list(order) + [i for i in range(n) if i not in in_cand]
                qtime += time.perf_counter() - t0
                accs.append(
                    evaluate(method, full_order, in_cand, oracles[s], n)
                )
            reports.append(_mean_report(method, accs, prep, qtime / len(queries)))
        elif method == "ed":
            accs = []
            qtime = 0.0
            for s, q in zip(query_starts, queries):
                t0 = time.perf_counter()
                ranking = baseline_ed(windows, q)
                qtime += time.perf_counter() - t0
                top10 = ranking.order[: math.ceil(0.10 * n)]
                accs.append(evaluate(method, ranking.order, top10, oracles[s], n))
            reports.append(_mean_report(method, accs, 0.0, qtime / len(queries)))
        elif method == "dtwd":
            accs = []
            qtime = 0.0
            for s, q in zip(query_starts, queries):
                t0 = time.perf_counter()
                ranking = baseline_dtwd(windows, q, dtw_params)
                qtime += time.perf_counter() - t0
                top10 = ranking.order[: math.ceil(0.10 * n)]
                accs.append(evaluate(method, ranking.order, top10, oracles[s], n))
            reports.append(_mean_report(method, accs, 0.0, qtime / len(queries)))
        elif method == "sax":
            cfg = SaxConfig(segments=t, alphabet=sax_alphabet)
            t0 = time.perf_counter()
            # Symbolization is shared across queries; measure it once.
            _ = baseline_sax(windows, queries[0], cfg)
            prep = time.perf_counter() - t0
            accs = []
            qtime = 0.0
            for s, q in zip(query_starts, queries):
                t0 = time.perf_counter()
                ranking = baseline_sax(windows, q, cfg)
                qtime += time.perf_counter() - t0
                top10 = ranking.order[: math.ceil(0.10 * n)]
                accs.append(evaluate(method, ranking.order, top10, oracles[s], n))
            reports.append(_mean_report(method, accs, prep, qtime / len(queries)))
        else:
            raise ValueError(f"unknown method {method}")
    return reports


def _mean_report(method, accs, prep, qtime) -> EvalReport:
    k = len(accs)
    return EvalReport(
        method=method,
        recall=sum(a.recall for a in accs) / k,
        precision_50=sum(a.precision_50 for a in accs) / k,
        precision_10pct=sum(a.precision_10pct for a in accs) / k,
        preprocessing_s=prep,
        querying_s=qtime,
    )
