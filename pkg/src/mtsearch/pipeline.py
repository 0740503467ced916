"""Session orchestration: build, query, rank, feedback rounds, undo/redo.

A Session owns the window set, the hash model, the weight state, and a
branching history of feedback rounds.  Every mutation goes through exactly
one writer path (feedback_round / undo_redo), and each node of the history
tree snapshots enough state (weights, query, labels) to restore and replay
deterministically.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import (
    MultivariateTimeSeries,
    Query,
    WindowSet,
    extract_windows,
    query_from_series,
)
from .errors import EmptyInput, StaleResults, UnknownNode
from .feedback import LabelSet, WeightState, train_round
from .lsh import (
    CandidateSet,
    HashIndex,
    LshConfig,
    LshModel,
    build_index,
    generate_candidates,
    generate_model,
    model_to_document,
    score_candidates,
)
from .sampling import Prototype, TableRanking, build_table_rankings, prototype_over

HISTOGRAM_BINS = 10


@dataclass(frozen=True)
class RetrievalResult:
    """Scores for every window plus the histogram/prototype summaries.

    Windows that never collided keep score 1.0 (maximally dissimilar), so
    the histogram always covers the whole window set.
    """

    scores: np.ndarray  # (N,) in [0, 1]
    histogram: np.ndarray  # (10,) counts, bin 0 = most similar
    bin_members: list  # per bin, window indices
    bin_prototypes: list  # per bin, Prototype or None
    top_k: list  # candidate window indices, best first
    round_counter: int
    expansions_used: int


@dataclass
class TreeNode:
    node_id: int
    parent: Optional[int]
    weight: np.ndarray
    query: Query
    labels: LabelSet  # labels that produced this node (empty at root)
    labeled: frozenset  # cumulative labeled window indices along the path
    children: list = field(default_factory=list)


@dataclass
class ExplorationTree:
    nodes: dict = field(default_factory=dict)
    cursor: int = 0
    _next_id: int = 0

    def add_root(self, weight, query) -> TreeNode:
        self.nodes.clear()
        node = TreeNode(
            node_id=0,
            parent=None,
            weight=weight,
            query=query,
            labels=LabelSet(),
            labeled=frozenset(),
        )
        self.nodes[0] = node
        self.cursor = 0
        self._next_id = 1
        return node

    def add_child(self, parent_id, weight, query, labels) -> TreeNode:
        parent = self.nodes[parent_id]
        node = TreeNode(
            node_id=self._next_id,
            parent=parent_id,
            weight=weight,
            query=query,
            labels=labels,
            labeled=parent.labeled | set(labels.sample_labels),
        )
        self.nodes[node.node_id] = node
        parent.children.append(node.node_id)
        self._next_id += 1
        self.cursor = node.node_id
        return node

    def path_to(self, node_id) -> list:
        """Nodes from the root down to node_id, inclusive."""
        if node_id not in self.nodes:
            raise UnknownNode(f"no tree node {node_id}")
        path = []
        cur: Optional[int] = node_id
        while cur is not None:
            node = self.nodes[cur]
            path.append(node)
            cur = node.parent
        return list(reversed(path))


class Session:
    """One dataset + one model + one exploration history."""

    def __init__(self, series, window_set, model, config, seed, dataset_id="mem"):
        self.series: MultivariateTimeSeries = series
        self.window_set: WindowSet = window_set
        self.model: LshModel = model
        self.config: LshConfig = config
        self.seed: int = seed
        self.dataset_id = dataset_id
        self.index: HashIndex = build_index(model, window_set)
        self.weight_state = WeightState(w_prev=model.weight.copy())
        self.query: Optional[Query] = None
        self.query_start: Optional[int] = None
        self.labels_by_round: list[LabelSet] = []
        self.results: Optional[RetrievalResult] = None
        self.table_rankings: Optional[list[TableRanking]] = None
        self.candidates: Optional[CandidateSet] = None
        self.tree = ExplorationTree()
        self.stale = True
        self.round_counter = 0

    @property
    def t(self) -> int:
        return self.window_set.t

    @property
    def d(self) -> int:
        return self.series.d

    def model_digest(self) -> str:
        payload = json.dumps(model_to_document(self.model), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()

    def _refresh_index(self) -> None:
        if not np.array_equal(self.index.weight, self.model.weight):
            self.index = build_index(self.model, self.window_set)

    def labeled_windows(self) -> frozenset:
        return self.tree.nodes[self.tree.cursor].labeled if self.tree.nodes else frozenset()


def build_session(
    series: MultivariateTimeSeries,
    t: int,
    stride: int = 1,
    config: Optional[LshConfig] = None,
    seed: int = 0,
    dataset_id: str = "mem",
) -> Session:
    """Extract windows and generate the hash model; no query yet."""
    config = config or LshConfig()
    window_set = extract_windows(series, t, stride)
    model = generate_model(series.d, t, config, seed)
    return Session(series, window_set, model, config, seed, dataset_id)


def set_query(session: Session, start: int) -> Session:
    """Select a query-by-example region; resets the exploration history."""
    query = query_from_series(session.series, start, session.t)
    session.query = query
    session.query_start = int(start)
    session.model = session.model.with_weight(np.ones(session.d), query=query)
    session.weight_state = WeightState(
        w_prev=session.model.weight.copy(), alpha=session.weight_state.alpha
    )
    session._refresh_index()
    session.tree.add_root(session.model.weight.copy(), query)
    session.labels_by_round = []
    session.stale = True
    return session


def run_query(session: Session) -> RetrievalResult:
    """Candidates -> scores -> histogram -> per-bin prototypes -> ranking."""
    if session.query is None:
        raise EmptyInput("no query set")
    session._refresh_index()
    candidates = generate_candidates(
        session.model, session.query, session.window_set, index=session.index
    )
    candidates = score_candidates(
        session.model, session.query, candidates, session.window_set, index=session.index
    )

    n = len(session.window_set)
    scores = np.ones(n)
    scores[candidates.indices] = candidates.scores

    # Equi-width bins over [0, 1]; score 1.0 folds into the last bin.
    bin_ids = np.minimum((scores * HISTOGRAM_BINS).astype(np.int64), HISTOGRAM_BINS - 1)
    histogram = np.bincount(bin_ids, minlength=HISTOGRAM_BINS)
    bin_members = [np.nonzero(bin_ids == b)[0] for b in range(HISTOGRAM_BINS)]
    bin_prototypes = [prototype_over(session.window_set, m) for m in bin_members]

    order = np.lexsort((candidates.indices, candidates.scores))
    top_k = [int(candidates.indices[i]) for i in order]

    result = RetrievalResult(
        scores=scores,
        histogram=histogram,
        bin_members=bin_members,
        bin_prototypes=bin_prototypes,
        top_k=top_k,
        round_counter=session.round_counter,
        expansions_used=candidates.expansions_used,
    )
    session.results = result
    session.candidates = candidates
    session.table_rankings = build_table_rankings(candidates)
    session.stale = False
    return result


def feedback_round(session: Session, labels: LabelSet) -> Session:
    """One Train click: learn weights, refine query, re-rank, extend the tree."""
    if session.query is None:
        raise EmptyInput("no query set")
    if session.stale:
        raise StaleResults("run the query before training on its results")

    model, state, query = train_round(
        session.model, session.weight_state, labels, session.query, session.window_set
    )
    # Install provisionally; the re-query can still fail (e.g. no candidates
    # under the new weights), in which case every field rolls back.
    snapshot = (session.model, session.weight_state, session.query, session.round_counter)
    session.model = model
    session.weight_state = state
    session.query = query
    session.round_counter += 1
    try:
        run_query(session)
    except Exception:
        session.model, session.weight_state, session.query, session.round_counter = snapshot
        session._refresh_index()
        raise
    session.labels_by_round.append(labels)
    session.tree.add_child(session.tree.cursor, model.weight.copy(), query, labels)
    return session


def undo_redo(session: Session, node_id: int) -> Session:
    """Jump the cursor to any recorded node and restore its full state."""
    path = session.tree.path_to(node_id)
    node = path[-1]
    session.model = session.model.with_weight(node.weight.copy(), query=node.query)
    session.query = node.query
    session.weight_state = WeightState(
        w_prev=node.weight.copy(),
        alpha=session.weight_state.alpha,
        history=[n.weight.copy() for n in path[1:]],
    )
    session.labels_by_round = [n.labels for n in path[1:]]
    session.round_counter += 1
    session.tree.cursor = node_id
    run_query(session)
    return session


def session_to_document(session: Session) -> dict:
    """Versioned JSON document: everything needed to replay the session."""
    cfg = session.config
    nodes = []
    for nid in sorted(session.tree.nodes):
        node = session.tree.nodes[nid]
        nodes.append(
            {
                "id": node.node_id,
                "parent": node.parent,
                "labels": node.labels.to_document(),
                "weight": node.weight.tolist(),
            }
        )
    return {
        "format": "mtsearch-session",
        "version": 1,
        "dataset_id": session.dataset_id,
        "n": session.series.n,
        "d": session.series.d,
        "t": session.t,
        "stride": session.window_set.stride,
        "seed": session.seed,
        "alpha": session.weight_state.alpha,
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
        "query_start": session.query_start,
        "tree": nodes,
        "cursor": session.tree.cursor,
    }


def replay_document(doc: dict, series: MultivariateTimeSeries) -> Session:
    """Rebuild a session from its document by replaying every round.

    Nodes are replayed in creation order against their recorded parents, so
    forks reappear exactly; with the same seed the replay is bit-identical.
    """
    if doc.get("format") != "mtsearch-session" or doc.get("version") != 1:
        raise ValueError("unrecognized session document")
    if series.n != doc["n"] or series.d != doc["d"]:
        raise ValueError("series does not match the session document")
    config = LshConfig(**doc["config"])
    session = build_session(
        series,
        t=doc["t"],
        stride=doc["stride"],
        config=config,
        seed=doc["seed"],
        dataset_id=doc["dataset_id"],
    )
    session.weight_state = WeightState(
        w_prev=session.model.weight.copy(), alpha=doc["alpha"]
    )
    if doc["query_start"] is None:
        return session
    set_query(session, doc["query_start"])
    run_query(session)
    by_id = {n["id"]: n for n in doc["tree"]}
    for nid in sorted(by_id):
        node = by_id[nid]
        if node["parent"] is None:
            continue
        if session.tree.cursor != node["parent"]:
            undo_redo(session, node["parent"])
        feedback_round(session, LabelSet.from_document(node["labels"]))
    if session.tree.cursor != doc["cursor"]:
        undo_redo(session, doc["cursor"])
    return session
