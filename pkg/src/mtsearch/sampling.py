"""Chooses which windows the user is asked to label.

Exploitation takes the best-ranked windows of every hash table (skipping
near-duplicate overlaps so the user never labels the same event twice);
exploration adds seeded uniform draws from the rest of the window set so the
search can escape the current similarity notion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import WindowSet
from .lsh import CandidateSet


@dataclass(frozen=True)
class SamplePlan:
    k_top: int = 3
    n_explore: Optional[int] = None  # None -> l * k_top
    exclude: frozenset = field(default_factory=frozenset)
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.k_top <= 5:
            raise ValueError("k_top must be in [1, 5]")
        if self.n_explore is not None and self.n_explore < 0:
            raise ValueError("n_explore must be >= 0")


@dataclass(frozen=True)
class TableRanking:
    """One hash table's view of the candidates, best first."""

    table: int
    order: np.ndarray  # candidate window indices sorted by (distance, index)
    distances: np.ndarray  # raw per-table distance, aligned with order
    norm_scores: np.ndarray  # min-max normalized within the table


@dataclass(frozen=True)
class Prototype:
    """Per-time-step mean curve with min/max variance band, each (t, d)."""

    mean: np.ndarray
    min: np.ndarray
    max: np.ndarray
    count: int


@dataclass(frozen=True)
class TableSummary:
    table: int
    histogram: np.ndarray  # 10 bin counts over normalized scores
    prototype: Optional[Prototype]
    empty: bool


def build_table_rankings(candidates: CandidateSet) -> list[TableRanking]:
    """Split a scored candidate set into per-table rankings."""
    if candidates.table_distances is None:
        raise ValueError("candidates must be scored first")
    dists = candidates.table_distances
    idx = candidates.indices
    l = dists.shape[1]
    out = []
    for li in range(l):
        mask = np.array([(e.tables >> li) & 1 == 1 for e in candidates.entries])
        members = idx[mask]
        member_d = dists[mask, li]
        order = np.lexsort((members, member_d))
        members = members[order]
        member_d = member_d[order]
        if member_d.size:
            lo, hi = float(member_d.min()), float(member_d.max())
            norm = (
                np.zeros_like(member_d)
                if hi - lo <= 0
                else (member_d - lo) / (hi - lo)
            )
        else:
            norm = member_d
        out.append(
            TableRanking(table=li, order=members, distances=member_d, norm_scores=norm)
        )
    return out


def exploit_samples(
    tables: list[TableRanking],
    plan: SamplePlan,
    window_starts: np.ndarray,
    t: int,
) -> list[int]:
    """Top-k per table, deduped best-first, with >50% overlaps suppressed."""
    picks: dict[int, float] = {}
    for tr in tables:
        taken = 0
        for wi, dist in zip(tr.order, tr.distances):
            wi = int(wi)
            if wi in plan.exclude:
                continue
            if wi not in picks or dist < picks[wi]:
                picks[wi] = float(dist)
            taken += 1
            if taken >= plan.k_top:
                break

    ordered = sorted(picks.items(), key=lambda kv: (kv[1], kv[0]))
    selected: list[int] = []
    for wi, _ in ordered:
        overlap_too_big = any(
            t - abs(int(window_starts[wi]) - int(window_starts[sj])) > 0.5 * t
            for sj in selected
        )
        if not overlap_too_big:
            selected.append(wi)
    return selected


def explore_samples(
    n_windows: int,
    plan: SamplePlan,
    exploit_picks: list[int],
    n_tables: Optional[int] = None,
) -> list[int]:
    """Seeded uniform draws from windows not excluded and not already picked.

    A plan without an explicit n_explore draws l * k_top windows (equal
    exploration and exploitation budgets), which needs the table count.
    """
    if plan.n_explore is not None:
        n_explore = plan.n_explore
    else:
        n_explore = (n_tables or 0) * plan.k_top
    if n_explore == 0:
        return []
    forbidden = set(plan.exclude) | set(exploit_picks)
    pool = np.array([i for i in range(n_windows) if i not in forbidden], dtype=np.int64)
    if pool.size == 0:
        return []
    rng = np.random.default_rng(plan.seed)
    take = min(n_explore, pool.size)
    return [int(i) for i in rng.choice(pool, size=take, replace=False)]


def prototype_over(windows: WindowSet, indices) -> Optional[Prototype]:
    """Mean/min/max bands over the given windows; None when empty."""
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size == 0:
        return None
    block = windows.stacked[indices]  # (m, t, d)
    return Prototype(
        mean=block.mean(axis=0),
        min=block.min(axis=0),
        max=block.max(axis=0),
        count=int(indices.size),
    )


def table_summary(
    tables: list[TableRanking],
    windows: WindowSet,
    top: int = 20,
    bins: int = 10,
) -> list[TableSummary]:
    """Histogram plus a top-20 prototype for every hash table."""
    out = []
    for tr in tables:
        if tr.order.size == 0:
            out.append(
                TableSummary(
                    table=tr.table,
                    histogram=np.zeros(bins, dtype=np.int64),
                    prototype=None,
                    empty=True,
                )
            )
            continue
        hist, _ = np.histogram(tr.norm_scores, bins=bins, range=(0.0, 1.0))
        proto = prototype_over(windows, tr.order[:top])
        out.append(
            TableSummary(table=tr.table, histogram=hist, prototype=proto, empty=False)
        )
    return out
