"""Weighted query-aware LSH over sliding windows.

Every atomic hash function is a random Gaussian vector a; a window's hash
code is the per-time-step dot product with b = w * a, where w is the learned
per-track weight (norm fixed to sqrt(d)).  A window collides with the query
under a compound function when all of its k atomics see at least t_s
per-step projection collisions.  Candidates are windows colliding under at
least one of the l compound functions; they are then ranked by DTW or ED
distance between the univariate hash codes, which keeps the ranking cost
independent of the track count.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .data import Query, Window, WindowSet
from .distances import _dtw_codes_batch, band_width
from .errors import EmptyCandidates

# Analytic operation counters (multiplications for hashing, DP/flop cells for
# ranking); used to assert the track-count scaling contract in tests.
_opcounts = {"hash_mults": 0, "rank_ops": 0}


def reset_opcounts() -> None:
    _opcounts["hash_mults"] = 0
    _opcounts["rank_ops"] = 0


def get_opcounts() -> dict:
    return dict(_opcounts)


@dataclass(frozen=True)
class AtomicHashFunction:
    """One random projection direction over the d tracks."""

    a: np.ndarray  # (d,)


@dataclass(frozen=True)
class CompoundHashFunction:
    """A bundle of k atomics; acts as one hash table / classifier."""

    atomics: tuple[AtomicHashFunction, ...]

    @property
    def k(self) -> int:
        return len(self.atomics)


@dataclass(frozen=True)
class LshConfig:
    """Knobs for hashing and candidate search.

    omega is the bucket width expressed as a fraction of the search radius
    (0.75 by default); the radius itself starts at r0 and is multiplied by c
    until enough candidates collide.  When r0 is None it is estimated per
    atomic function at query time as the median projection gap over a
    1000-window sample, which ties the bucket width to the actual projection
    scale.
    """

    l: int = 5
    k: int = 3
    omega: float = 0.75
    t_s: Optional[int] = None  # None -> ceil(0.8 * t) at model build
    delta: float = 0.05  # target false-negative rate; kept as metadata
    c: float = 1.3
    r0: Optional[float] = None
    rank_metric: str = "DTW"
    sakoe_chiba_frac: float = 0.05
    max_expansions: int = 16

    def __post_init__(self):
        if self.l < 1 or self.k < 1:
            raise ValueError("l and k must be >= 1")
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must be in (0, 1)")
        if self.c <= 1:
            raise ValueError("approximation ratio c must exceed 1")
        if self.rank_metric not in ("DTW", "ED"):
            raise ValueError("rank_metric must be 'DTW' or 'ED'")
        if self.max_expansions < 0:
            raise ValueError("max_expansions must be >= 0")

    def resolve_t_s(self, t: int) -> int:
        if self.t_s is None:
            # ceil(0.8 t) can reach t for very short windows; stay below it.
            t_s = min(math.ceil(0.8 * t), t - 1)
        else:
            t_s = self.t_s
        if not 1 <= t_s < t:
            raise ValueError(f"t_s={t_s} must satisfy 1 <= t_s < t={t}")
        return t_s


class LshModel:
    """l*k atomic hash vectors plus the learned track weights.

    Instances are treated as immutable; installing a new weight or query
    returns a fresh model so a failed update can never leave the session
    half-changed.
    """

    def __init__(self, config, compounds, weight, seed, t, query_codes=None):
        self.config: LshConfig = config
        self.compounds: tuple[CompoundHashFunction, ...] = tuple(compounds)
        weight = np.asarray(weight, dtype=np.float64)
        d = weight.shape[0]
        norm = float(np.linalg.norm(weight))
        if abs(norm - math.sqrt(d)) > 1e-9:
            raise ValueError(f"|w| must be sqrt(d); got {norm} for d={d}")
        weight.setflags(write=False)
        self.weight = weight
        self.seed = seed
        self.t = t
        self.t_s = config.resolve_t_s(t)
        self.query_codes = query_codes  # (l*k, t) or None

    @property
    def d(self) -> int:
        return self.weight.shape[0]

    @property
    def l(self) -> int:
        return len(self.compounds)

    @property
    def k(self) -> int:
        return self.compounds[0].k

    @property
    def atomic_matrix(self) -> np.ndarray:
        """(l*k, d) matrix of atomic vectors, compound-major order."""
        return np.stack([a.a for c in self.compounds for a in c.atomics])

    @property
    def weighted_matrix(self) -> np.ndarray:
        """b = w * a for every atomic, (l*k, d)."""
        return self.atomic_matrix * self.weight[None, :]

    def with_weight(self, weight: np.ndarray, query: Optional[Query] = None):
        m = LshModel(self.config, self.compounds, weight, self.seed, self.t)
        if query is not None:
            m.query_codes = compute_query_codes(m, query)
        return m

    def with_query(self, query: Query):
        m = LshModel(self.config, self.compounds, self.weight, self.seed, self.t)
        m.query_codes = compute_query_codes(m, query)
        return m


@dataclass(frozen=True)
class CandidateEntry:
    window_index: int
    tables: int  # bitset over the l compound functions
    score: float


@dataclass(frozen=True)
class CandidateSet:
    """Windows that collided with the query, lower score = more similar."""

    entries: tuple[CandidateEntry, ...]
    score_direction: str = "lower"
    expansions_used: int = 0
    # Filled by score_candidates: raw per-table mean distances, (M, l).
    table_distances: Optional[np.ndarray] = field(default=None, repr=False)
    raw_distances: Optional[np.ndarray] = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def indices(self) -> np.ndarray:
        return np.array([e.window_index for e in self.entries], dtype=np.int64)

    @property
    def scores(self) -> np.ndarray:
        return np.array([e.score for e in self.entries])


@dataclass
class HashIndex:
    """Precomputed window hash codes for one (model weight, window set) pair."""

    codes: np.ndarray  # (l*k, N, t)
    weight: np.ndarray  # weight the codes were computed with


def generate_model(d: int, t: int, config: LshConfig, seed: int) -> LshModel:
    """Sample l*k atomic Gaussian vectors from a seeded PCG64 generator.

    Uses numpy's Generator.standard_normal (ziggurat), so the same seed
    reproduces the model bit for bit.  The weight starts at all ones, whose
    norm is sqrt(d) by construction.
    """
    if d < 1 or t < 2:
        raise ValueError("need d >= 1 and t >= 2")
    config.resolve_t_s(t)  # validate early
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((config.l * config.k, d))
    compounds = []
    for li in range(config.l):
        atomics = tuple(
            AtomicHashFunction(a=raw[li * config.k + ki].copy())
            for ki in range(config.k)
        )
        compounds.append(CompoundHashFunction(atomics=atomics))
    weight = np.ones(d)
    return LshModel(config, compounds, weight, seed, t)


def hash_code(window, atomic: AtomicHashFunction, weight: np.ndarray) -> np.ndarray:
    """Univariate hash code: per-step dot product with b = w * a."""
    values = window.values if hasattr(window, "values") else np.asarray(window)
    b = np.asarray(weight, dtype=np.float64) * atomic.a
    _opcounts["hash_mults"] += values.shape[0] * values.shape[1]
    return values @ b


def compute_query_codes(model: LshModel, query: Query) -> np.ndarray:
    """(l*k, t) hash codes of the query under every atomic function."""
    B = model.weighted_matrix  # (A, d)
    _opcounts["hash_mults"] += B.shape[0] * query.values.shape[0] * query.values.shape[1]
    return B @ query.values.T  # (A, t)


def build_index(model: LshModel, windows: WindowSet) -> HashIndex:
    """Hash every window once; O(N*t*d) per atomic, reusable across queries."""
    B = model.weighted_matrix  # (A, d)
    # codes[a, n, i] = sum_j stacked[n, i, j] * B[a, j]
    codes = np.tensordot(B, windows.stacked, axes=([1], [2]))
    _opcounts["hash_mults"] += B.shape[0] * windows.stacked.shape[0] * windows.stacked.shape[1] * B.shape[1]
    return HashIndex(codes=codes, weight=model.weight.copy())


def projection_collision(hq_i: float, hx_i: float, omega: float) -> bool:
    """Per-step agreement: |h(q_i) - h(x_i)| <= omega/2, boundary inclusive."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    return abs(hq_i - hx_i) <= omega / 2


def hash_collision(
    q_code: np.ndarray, x_code: np.ndarray, omega: float, t_s: int
) -> bool:
    """Whole-window agreement: at least t_s projection collisions."""
    q_code = np.asarray(q_code, dtype=np.float64)
    x_code = np.asarray(x_code, dtype=np.float64)
    if q_code.shape != x_code.shape:
        raise ValueError("codes must have equal length")
    if not 1 <= t_s < len(q_code):
        raise ValueError("need 1 <= t_s < t")
    hits = int(np.count_nonzero(np.abs(q_code - x_code) <= omega / 2))
    return hits >= t_s


def _radius_sample(n: int, sample_size: int = 1000) -> np.ndarray:
    """Evenly spaced window sample used for the radius estimate."""
    return np.unique(np.linspace(0, n - 1, min(sample_size, n)).astype(np.int64))


def generate_candidates(
    model: LshModel,
    query: Query,
    windows: WindowSet,
    index: Optional[HashIndex] = None,
    min_candidates: Optional[int] = None,
) -> CandidateSet:
    """Collect windows colliding with the query, widening the radius as needed.

    Starting from omega * r0, the effective radius is multiplied by c until
    at least max(min_candidates, 1% of windows) candidates collide or the
    expansion budget runs out.  The candidate count is data dependent (a
    geometric step can overshoot); only emptiness is an error.
    """
    if index is None:
        index = build_index(model, windows)
    qcodes = (
        model.query_codes
        if model.query_codes is not None
        else compute_query_codes(model, query)
    )
    codes = index.codes
    A, N, t = codes.shape
    t_s = model.t_s
    cfg = model.config
    l, k = cfg.l, cfg.k

    # A window collides under an atomic at radius w iff its t_s-th smallest
    # projection gap is <= w/2; precomputing that gap makes every expansion a
    # cheap threshold test.  The same gap pass feeds the radius estimate
    # (median gap over an evenly spaced window sample) when r0 is not fixed.
    gap_at_ts = np.empty((A, N))
    radii = np.full(A, float(cfg.r0)) if cfg.r0 is not None else np.empty(A)
    sample = None if cfg.r0 is not None else _radius_sample(N)
    for a in range(A):
        gaps = np.abs(codes[a] - qcodes[a][None, :])
        gap_at_ts[a] = np.partition(gaps, t_s - 1, axis=1)[:, t_s - 1]
        if sample is not None:
            radii[a] = max(float(np.median(gaps[sample])), 1e-12)
    floor = max(min_candidates if min_candidates is not None else 50, math.ceil(0.01 * N))

    chosen = None
    for e in range(cfg.max_expansions + 1):
        thr = 0.5 * cfg.omega * radii * (cfg.c ** e)  # (A,)
        atomic_hit = gap_at_ts <= thr[:, None]  # (A, N)
        table_hit = atomic_hit.reshape(l, k, N).all(axis=1)  # (l, N)
        cand = table_hit.any(axis=0)
        count = int(np.count_nonzero(cand))
        chosen = (e, table_hit, cand)
        if count >= floor:
            break

    e, table_hit, cand = chosen
    idx = np.nonzero(cand)[0]
    if idx.size == 0:
        raise EmptyCandidates(
            "no window collided with the query after radius expansion; "
            "widen the bucket width omega or lower t_s"
        )
    bits = np.zeros(N, dtype=np.int64)
    for li in range(l):
        bits[table_hit[li]] |= 1 << li
    entries = tuple(
        CandidateEntry(window_index=int(n), tables=int(bits[n]), score=0.0)
        for n in idx
    )
    return CandidateSet(entries=entries, expansions_used=e)


def score_candidates(
    model: LshModel,
    query: Query,
    candidates: CandidateSet,
    windows: WindowSet,
    index: Optional[HashIndex] = None,
) -> CandidateSet:
    """Rank candidates by hash-code distance, min-max normalized to [0, 1].

    Distances are computed between the query's and the window's univariate
    codes (so the cost does not grow with the track count), averaged over the
    k atomics of each compound function and then over the l compounds.
    """
    if len(candidates) == 0:
        raise EmptyCandidates("cannot score an empty candidate set")
    if index is None:
        index = build_index(model, windows)
    qcodes = (
        model.query_codes
        if model.query_codes is not None
        else compute_query_codes(model, query)
    )
    cand_idx = candidates.indices
    codes = index.codes[:, cand_idx, :]  # (A, M, t)
    codes = np.ascontiguousarray(codes.transpose(1, 0, 2))  # (M, A, t)
    M, A, t = codes.shape
    cfg = model.config

    if cfg.rank_metric == "DTW":
        w = band_width(t, t, cfg.sakoe_chiba_frac)
        dists = _dtw_codes_batch(np.ascontiguousarray(qcodes), codes, w)
        _opcounts["rank_ops"] += M * A * t * (2 * w + 1)
    else:
        dists = np.sqrt(((codes - qcodes[None, :, :]) ** 2).sum(axis=2))
        _opcounts["rank_ops"] += M * A * t

    table_distances = dists.reshape(M, cfg.l, cfg.k).mean(axis=2)  # (M, l)
    raw = table_distances.mean(axis=1)  # (M,)
    lo, hi = float(raw.min()), float(raw.max())
    if hi - lo <= 0:
        scores = np.zeros(M)
    else:
        scores = (raw - lo) / (hi - lo)

    entries = tuple(
        replace(candidates.entries[i], score=float(scores[i])) for i in range(M)
    )
    return CandidateSet(
        entries=entries,
        expansions_used=candidates.expansions_used,
        table_distances=table_distances,
        raw_distances=raw,
    )


def model_to_document(model: LshModel) -> dict:
    """JSON-safe dict reproducing the model bit-exactly on reload."""
    cfg = model.config
    return {
        "format": "mtsearch-lsh-model",
        "version": 1,
        "seed": model.seed,
        "t": model.t,
        "config": {
            "l": cfg.l,
            "k": cfg.k,
            "omega": cfg.omega,
            "t_s": cfg.t_s,
            "delta": cfg.delta,
            "c": cfg.c,
            "r0": cfg.r0,
            "rank_metric": cfg.rank_metric,
            "sakoe_chiba_frac": cfg.sakoe_chiba_frac,
            "max_expansions": cfg.max_expansions,
        },
        "weight": model.weight.tolist(),
        "atomics": [
            [a.a.tolist() for a in c.atomics] for c in model.compounds
        ],
    }


def model_from_document(doc: dict) -> LshModel:
    if doc.get("format") != "mtsearch-lsh-model" or doc.get("version") != 1:
        raise ValueError("unrecognized model document")
    cfg = LshConfig(**doc["config"])
    compounds = tuple(
        CompoundHashFunction(
            atomics=tuple(
                AtomicHashFunction(a=np.array(vec, dtype=np.float64))
                for vec in comp
            )
        )
        for comp in doc["atomics"]
    )
    return LshModel(
        cfg, compounds, np.array(doc["weight"], dtype=np.float64), doc["seed"], doc["t"]
    )


def model_dumps(model: LshModel) -> str:
    return json.dumps(model_to_document(model))


def model_loads(payload: str) -> LshModel:
    return model_from_document(json.loads(payload))
