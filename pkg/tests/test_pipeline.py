import numpy as np
import pytest

from mtsearch.data import MultivariateTimeSeries
from mtsearch.errors import StaleResults, UnknownNode, WindowTooLarge
from mtsearch.feedback import LABEL_POSITIVE, TABLE_IMPORTANT, LabelSet
from mtsearch.lsh import LshConfig
from mtsearch.pipeline import (
    build_session,
    feedback_round,
    replay_document,
    run_query,
    session_to_document,
    set_query,
    undo_redo,
)
from mtsearch.synthetic import make_series


@pytest.fixture(scope="module")
def series():
    return make_series(600, 3, seed=21)


def fresh_session(series, seed=4, t=40):
    session = build_session(series, t=t, stride=1, config=LshConfig(), seed=seed)
    set_query(session, start=120)
    run_query(session)
    return session


class TestBuildSession:
    def test_window_count(self):
        s = make_series(1000, 2, seed=0)
        session = build_session(s, t=100, stride=1, seed=1)
        assert len(session.window_set) == 901

    def test_same_seed_same_model(self, series):
        a = build_session(series, t=40, seed=9)
        b = build_session(series, t=40, seed=9)
        assert a.model_digest() == b.model_digest()

    def test_different_t_different_model(self, series):
        a = build_session(series, t=40, seed=9)
        b = build_session(series, t=41, seed=9)
        assert a.model_digest() != b.model_digest()


class TestSetQuery:
    def test_query_equals_window_values(self, series):
        session = build_session(series, t=40, seed=4)
        set_query(session, start=33)
        assert np.array_equal(
            session.query.values, session.window_set.windows[33].values
        )

    def test_boundary_start(self, series):
        session = build_session(series, t=40, seed=4)
        set_query(session, start=series.n - 40)  # last valid slice

    def test_out_of_range(self, series):
        session = build_session(series, t=40, seed=4)
        with pytest.raises(WindowTooLarge):
            set_query(session, start=series.n - 40 + 1)


class TestRunQuery:
    def test_self_retrieval_rank_one_and_bin_zero(self, series):
        session = fresh_session(series)
        result = session.results
        assert result.top_k[0] == 120
        assert 120 in set(result.bin_members[0].tolist())
        assert result.scores[120] == 0.0

    def test_histogram_conservation(self, series):
        session = fresh_session(series)
        assert session.results.histogram.sum() == len(session.window_set)

    def test_all_identical_windows_single_bin(self):
        # A constant series normalizes to all-zero windows: every window is a
        # zero-distance candidate, so only bin 0 is populated.
        vals = np.tile(np.array([[3.0, -1.0]]), (50, 1))
        s = MultivariateTimeSeries(vals, ("a", "b"))
        session = build_session(s, t=10, seed=0)
        set_query(session, 0)
        result = run_query(session)
        assert result.histogram[0] == len(session.window_set)
        assert result.histogram[1:].sum() == 0

    def test_prototype_bounds_per_bin(self, series):
        session = fresh_session(series)
        for proto in session.results.bin_prototypes:
            if proto is None:
                continue
            assert np.all(proto.min <= proto.mean + 1e-12)
            assert np.all(proto.mean <= proto.max + 1e-12)

    def test_top_k_entries_are_candidates(self, series):
        session = fresh_session(series)
        cand = set(int(i) for i in session.candidates.indices)
        assert set(session.results.top_k) <= cand


class TestFeedbackRound:
    def test_requires_fresh_results(self, series):
        session = build_session(series, t=40, seed=4)
        set_query(session, 120)
        with pytest.raises(StaleResults):
            feedback_round(session, LabelSet())

    def test_empty_labels_keep_ranking(self, series):
        session = fresh_session(series)
        before = list(session.results.top_k)
        feedback_round(session, LabelSet())
        assert session.results.top_k == before
        assert np.array_equal(session.model.weight, np.ones(3))

    def test_round_grows_tree_and_counter(self, series):
        session = fresh_session(series)
        r0 = session.round_counter
        labels = LabelSet(sample_labels={121: LABEL_POSITIVE})
        feedback_round(session, labels)
        assert session.round_counter == r0 + 1
        assert session.tree.cursor == 1
        assert len(session.tree.nodes) == 2
        assert len(session.weight_state.history) == 1

    def test_fork_after_undo(self, series):
        session = fresh_session(series)
        feedback_round(session, LabelSet(sample_labels={121: LABEL_POSITIVE}))
        undo_redo(session, 0)
        feedback_round(session, LabelSet(table_labels={0: TABLE_IMPORTANT}))
        root = session.tree.nodes[0]
        assert len(root.children) == 2


class TestFeedbackRollback:
    def test_failed_requery_leaves_session_untouched(self, series):
        # A microscopic fixed radius retrieves only exact-code matches: the
        # round-0 self query works, but once DBA moves the query off the
        # window grid no candidate can collide and the round must roll back.
        from mtsearch.errors import EmptyCandidates

        cfg = LshConfig(r0=1e-12, max_expansions=2)
        session = build_session(series, t=40, stride=1, config=cfg, seed=4)
        set_query(session, 120)
        run_query(session)
        w_before = session.model.weight.copy()
        round_before = session.round_counter
        scores_before = session.results.scores.copy()
        labels = LabelSet(sample_labels={200: LABEL_POSITIVE})
        with pytest.raises(EmptyCandidates):
            feedback_round(session, labels)
        assert np.array_equal(session.model.weight, w_before)
        assert session.round_counter == round_before
        assert np.array_equal(session.results.scores, scores_before)
        assert len(session.tree.nodes) == 1
        assert session.labels_by_round == []


class TestUndoRedo:
    def test_undo_to_root_restores_initial_state(self, series):
        session = fresh_session(series)
        feedback_round(session, LabelSet(sample_labels={121: LABEL_POSITIVE}))
        undo_redo(session, 0)
        assert np.array_equal(session.model.weight, np.ones(3))
        assert session.query.provenance == "user-selected"
        assert session.weight_state.history == []

    def test_redo_reproduces_leaf_results(self, series):
        session = fresh_session(series)
        feedback_round(session, LabelSet(sample_labels={121: LABEL_POSITIVE}))
        leaf_scores = session.results.scores.copy()
        leaf_hist = session.results.histogram.copy()
        undo_redo(session, 0)
        undo_redo(session, 1)
        assert np.array_equal(session.results.scores, leaf_scores)
        assert np.array_equal(session.results.histogram, leaf_hist)

    def test_unknown_node(self, series):
        session = fresh_session(series)
        with pytest.raises(UnknownNode):
            undo_redo(session, 42)


class TestReplay:
    def test_two_round_session_replays_identically(self, series):
        session = fresh_session(series, seed=11)
        feedback_round(session, LabelSet(sample_labels={121: LABEL_POSITIVE}))
        feedback_round(
            session,
            LabelSet(sample_labels={205: LABEL_POSITIVE}, table_labels={2: TABLE_IMPORTANT}),
        )
        doc = session_to_document(session)

        clone = replay_document(doc, series)
        assert np.array_equal(clone.results.scores, session.results.scores)
        assert np.array_equal(clone.results.histogram, session.results.histogram)
        assert len(clone.weight_state.history) == len(session.weight_state.history)
        for a, b in zip(clone.weight_state.history, session.weight_state.history):
            assert np.array_equal(a, b)

    def test_replay_preserves_forks(self, series):
        session = fresh_session(series, seed=13)
        feedback_round(session, LabelSet(sample_labels={121: LABEL_POSITIVE}))
        undo_redo(session, 0)
        feedback_round(session, LabelSet(table_labels={1: TABLE_IMPORTANT}))
        doc = session_to_document(session)
        clone = replay_document(doc, series)
        assert len(clone.tree.nodes) == 3
        assert len(clone.tree.nodes[0].children) == 2
        assert clone.tree.cursor == session.tree.cursor
        assert np.array_equal(clone.results.scores, session.results.scores)
