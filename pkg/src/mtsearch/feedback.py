"""Relevance feedback: labels -> new track weights and a refined query.

Two feedback channels exist.  Labeling a hash table as important promotes
the tracks its atomic vectors already emphasize (classifier adaption);
labeling result windows as positive promotes tracks on which those windows
are close to the query under per-track DTW (sample adaption).  Both produce
a weight vector of norm sqrt(d); they are blended with the previous round's
weights by a fixed learning rate and the query itself is pulled toward the
positive set with DTW barycenter averaging.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import PROVENANCE_DBA, Query, Window, WindowSet, normalize_window
from .distances import DtwParams, dba_average, dtw_per_track
from .errors import NoPositiveSamples, NoPositiveTables
from .lsh import LshModel

LABEL_POSITIVE = "positive"
LABEL_INDECISIVE = "indecisive"
LABEL_NEGATIVE = "negative"
TABLE_IMPORTANT = "important"
TABLE_INDECISIVE = "indecisive"

_SAMPLE_LABELS = {LABEL_POSITIVE, LABEL_INDECISIVE, LABEL_NEGATIVE}
_TABLE_LABELS = {TABLE_IMPORTANT, TABLE_INDECISIVE}


@dataclass(frozen=True)
class LabelSet:
    """One round of user decisions on sample windows and hash tables."""

    sample_labels: dict[int, str] = field(default_factory=dict)
    table_labels: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        for idx, lab in self.sample_labels.items():
            if idx < 0 or lab not in _SAMPLE_LABELS:
                raise ValueError(f"bad sample label {idx}={lab!r}")
        for idx, lab in self.table_labels.items():
            if idx < 0 or lab not in _TABLE_LABELS:
                raise ValueError(f"bad table label {idx}={lab!r}")

    def positives(self) -> list[int]:
        return sorted(
            i for i, lab in self.sample_labels.items() if lab == LABEL_POSITIVE
        )

    def important_tables(self) -> list[int]:
        return sorted(
            i for i, lab in self.table_labels.items() if lab == TABLE_IMPORTANT
        )

    @property
    def empty(self) -> bool:
        return not self.sample_labels and not self.table_labels

    def to_document(self) -> dict:
        return {
            "samples": {str(k): v for k, v in self.sample_labels.items()},
            "tables": {str(k): v for k, v in self.table_labels.items()},
        }

    @staticmethod
    def from_document(doc: dict) -> "LabelSet":
        return LabelSet(
            sample_labels={int(k): v for k, v in doc.get("samples", {}).items()},
            table_labels={int(k): v for k, v in doc.get("tables", {}).items()},
        )


@dataclass
class WeightState:
    """Previous weights, learning rate, and the per-round weight history."""

    w_prev: np.ndarray
    alpha: float = 0.75
    history: list = field(default_factory=list)

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")
        self.w_prev = _check_norm(np.asarray(self.w_prev, dtype=np.float64))


def _check_norm(w: np.ndarray) -> np.ndarray:
    d = w.shape[0]
    if abs(float(np.linalg.norm(w)) - math.sqrt(d)) > 1e-9:
        raise ValueError("weight vector must have norm sqrt(d)")
    return w


def _rescale(v: np.ndarray) -> np.ndarray:
    """Scale a non-zero vector to norm sqrt(d)."""
    d = v.shape[0]
    norm = float(np.linalg.norm(v))
    if norm <= 0:
        return np.ones(d)
    return v * (math.sqrt(d) / norm)


def classifier_weights(model: LshModel, labels: LabelSet) -> np.ndarray:
    """Track weights from hash tables marked important.

    Pools the squared entries of every atomic vector belonging to an
    important compound function, then rescales to norm sqrt(d); tracks those
    tables already project strongly end up weighted higher.
    """
    tables = labels.important_tables()
    if not tables:
        raise NoPositiveTables("no hash table labeled important")
    acc = np.zeros(model.d)
    for li in tables:
        if li < 0 or li >= model.l:
            raise ValueError(f"table index {li} out of range")
        for atomic in model.compounds[li].atomics:
            acc += atomic.a ** 2
    return _rescale(acc)


def sample_weights(
    query: Query,
    positives: list[Window],
    params: DtwParams = DtwParams(),
) -> np.ndarray:
    """Track weights from positively labeled windows.

    Aggregates per-track DTW distance between the query and every positive,
    squares the per-track sums, normalizes them to proportions, and inverts
    (1 - share) so near tracks get the weight.  All-zero distances (positives
    identical to the query on every track) fall back to uniform weights.
    """
    if not positives:
        raise NoPositiveSamples("no positively labeled windows")
    sums = np.zeros(query.d)
    for win in positives:
        sums += dtw_per_track(query.values, win.values, params)
    z = sums ** 2
    total = float(z.sum())
    if total <= 0:
        return np.ones(query.d)
    w_star = 1.0 - z / total
    if float(np.linalg.norm(w_star)) <= 0:
        return np.ones(query.d)
    return _rescale(w_star)


def combine_weights(
    state: WeightState,
    w_c: Optional[np.ndarray],
    w_s: Optional[np.ndarray],
) -> np.ndarray:
    """Blend previous weights with the two feedback vectors.

    w* = (1 - alpha) w_prev + (alpha/2)(w_c + w_s), renormalized to sqrt(d).
    When only one feedback kind is present its coefficient becomes alpha so
    the total feedback influence stays the same; with neither, the previous
    weights pass through unchanged.
    """
    if w_c is None and w_s is None:
        return state.w_prev.copy()
    a = state.alpha
    acc = (1.0 - a) * state.w_prev
    if w_c is not None and w_s is not None:
        acc = acc + (a / 2.0) * (_check_norm(w_c) + _check_norm(w_s))
    elif w_c is not None:
        acc = acc + a * _check_norm(w_c)
    else:
        acc = acc + a * _check_norm(w_s)
    return _rescale(acc)


def update_query(
    query: Query,
    positives: list[Window],
    iterations: int = 10,
    params: DtwParams = DtwParams(),
) -> Query:
    """Pull the query toward the positive windows with DBA.

    The current query seeds the barycenter so the refined pattern stays
    anchored to the user's intent; the result is re-normalized per track.
    """
    if not positives:
        return query
    sequences = [query.values] + [w.values for w in positives]
    centroid = dba_average(sequences, init=query.values, iterations=iterations, params=params)
    return Query(values=normalize_window(centroid), provenance=PROVENANCE_DBA)


def train_round(
    model: LshModel,
    state: WeightState,
    labels: LabelSet,
    query: Query,
    windows: WindowSet,
) -> tuple[LshModel, WeightState, Query]:
    """Run one full feedback round; never mutates its inputs.

    Computes whichever of the two feedback vectors the labels support,
    blends them into new weights, installs those into a fresh model with
    recomputed query codes, and refines the query via DBA.
    """
    w_c = None
    if labels.important_tables():
        w_c = classifier_weights(model, labels)
    positives = [windows.windows[i] for i in labels.positives()]
    w_s = sample_weights(query, positives) if positives else None

    w_r = combine_weights(state, w_c, w_s)
    new_query = update_query(query, positives)
    new_model = model.with_weight(w_r, query=new_query)
    new_state = WeightState(
        w_prev=w_r, alpha=state.alpha, history=state.history + [w_r.copy()]
    )
    return new_model, new_state, new_query
