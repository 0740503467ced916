import math

import numpy as np
import pytest

from mtsearch.data import Query, Window, extract_windows, normalize_window
from mtsearch.distances import DtwParams
from mtsearch.errors import NoPositiveSamples, NoPositiveTables
from mtsearch.feedback import (
    LABEL_POSITIVE,
    TABLE_IMPORTANT,
    LabelSet,
    WeightState,
    classifier_weights,
    combine_weights,
    sample_weights,
    train_round,
    update_query,
)
from mtsearch.lsh import (
    AtomicHashFunction,
    CompoundHashFunction,
    LshConfig,
    LshModel,
    generate_model,
)
from mtsearch.synthetic import make_series

FULL_BAND = DtwParams(band_frac=1.0)


def model_with_atomics(vectors_per_compound, t=10):
    """Hand-built model whose atomic vectors are exactly as given."""
    compounds = tuple(
        CompoundHashFunction(
            atomics=tuple(
                AtomicHashFunction(a=np.asarray(v, dtype=float)) for v in comp
            )
        )
        for comp in vectors_per_compound
    )
    d = compounds[0].atomics[0].a.shape[0]
    cfg = LshConfig(l=len(compounds), k=compounds[0].k, t_s=t - 1)
    return LshModel(cfg, compounds, np.ones(d), seed=0, t=t)


class TestClassifierWeights:
    def test_single_positive_atomic(self):
        model = model_with_atomics([[[3.0, 4.0]]])
        labels = LabelSet(table_labels={0: TABLE_IMPORTANT})
        w_c = classifier_weights(model, labels)
        # a_c = [9, 16]; |a_c| = sqrt(337); w_c = a_c * sqrt(2)/sqrt(337)
        assert w_c == pytest.approx([0.69333409, 1.23259395])
        assert np.linalg.norm(w_c) ** 2 == pytest.approx(2.0)

    def test_balanced_atomic_stays_balanced(self):
        model = model_with_atomics([[[1.0, 1.0]]])
        w_c = classifier_weights(model, LabelSet(table_labels={0: TABLE_IMPORTANT}))
        assert w_c == pytest.approx([1.0, 1.0])

    def test_two_axis_aligned_positives(self):
        model = model_with_atomics([[[1.0, 0.0]], [[0.0, 1.0]]])
        labels = LabelSet(table_labels={0: TABLE_IMPORTANT, 1: TABLE_IMPORTANT})
        assert classifier_weights(model, labels) == pytest.approx([1.0, 1.0])

    def test_no_important_tables(self):
        model = model_with_atomics([[[1.0, 1.0]]])
        with pytest.raises(NoPositiveTables):
            classifier_weights(model, LabelSet())

    def test_entries_nonnegative(self):
        model = generate_model(6, 12, LshConfig(), seed=3)
        labels = LabelSet(table_labels={0: TABLE_IMPORTANT, 2: TABLE_IMPORTANT})
        assert np.all(classifier_weights(model, labels) >= 0)


def constant_window(t, levels):
    return Window(start=0, values=np.tile(np.asarray(levels, dtype=float), (t, 1)))


class TestSampleWeights:
    def test_derived_formula_chain(self):
        # Per-track DTW sums [1, 3] -> z = [1, 9] -> w_s ~ [1.4056, 0.1562].
        t = 2
        q = Query(values=np.zeros((t, 2)))
        pos = [constant_window(t, [0.5, 1.5])]
        w_s = sample_weights(q, pos, FULL_BAND)
        assert w_s == pytest.approx([1.40556386, 0.15617376])
        assert np.linalg.norm(w_s) ** 2 == pytest.approx(2.0)

    def test_equal_distances_give_uniform(self):
        t = 2
        q = Query(values=np.zeros((t, 2)))
        pos = [constant_window(t, [1.0, 1.0])]
        assert sample_weights(q, pos, FULL_BAND) == pytest.approx([1.0, 1.0])

    def test_perfect_positives_give_uniform(self):
        q = Query(values=np.zeros((3, 2)))
        pos = [constant_window(3, [0.0, 0.0])]
        assert sample_weights(q, pos, FULL_BAND) == pytest.approx([1.0, 1.0])

    def test_empty_positives(self):
        with pytest.raises(NoPositiveSamples):
            sample_weights(Query(values=np.zeros((3, 2))), [])

    def test_closer_track_gets_larger_weight(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            t = 6
            q = Query(values=np.zeros((t, 3)))
            deltas = rng.uniform(0.1, 2.0, size=3)
            pos = [constant_window(t, deltas)]
            w_s = sample_weights(q, pos, FULL_BAND)
            order_by_distance = np.argsort(deltas)  # ascending distance
            assert np.all(np.diff(w_s[order_by_distance]) <= 1e-12)


class TestCombineWeights:
    def test_symmetric_feedback_keeps_balance(self):
        state = WeightState(w_prev=np.array([1.0, 1.0]), alpha=0.75)
        w_c = np.array([math.sqrt(2), 0.0])
        w_s = np.array([0.0, math.sqrt(2)])
        assert combine_weights(state, w_c, w_s) == pytest.approx([1.0, 1.0])

    def test_no_feedback_keeps_previous(self):
        w_prev = np.array([1.2, 0.4, 1.2])
        w_prev *= math.sqrt(3) / np.linalg.norm(w_prev)
        state = WeightState(w_prev=w_prev.copy(), alpha=0.75)
        assert np.array_equal(combine_weights(state, None, None), w_prev)

    def test_alpha_one_full_replacement(self):
        state = WeightState(w_prev=np.array([1.0, 1.0]), alpha=1.0)
        v = np.array([math.sqrt(2), 0.0])
        assert combine_weights(state, v.copy(), v.copy()) == pytest.approx(v)

    def test_single_term_gets_full_alpha(self):
        state = WeightState(w_prev=np.array([1.0, 1.0]), alpha=0.5)
        v = np.array([math.sqrt(2), 0.0])
        only_c = combine_weights(state, v.copy(), None)
        only_s = combine_weights(state, None, v.copy())
        assert only_c == pytest.approx(only_s)
        # 0.5 * [1,1] + 0.5 * [sqrt2, 0], renormalized.
        raw = 0.5 * np.array([1.0, 1.0]) + 0.5 * v
        assert only_c == pytest.approx(raw * math.sqrt(2) / np.linalg.norm(raw))

    def test_fixpoint(self):
        v = np.array([1.3, 0.2, 1.0, 0.9])
        v *= math.sqrt(4) / np.linalg.norm(v)
        state = WeightState(w_prev=v.copy(), alpha=0.75)
        out = combine_weights(state, v.copy(), v.copy())
        assert out == pytest.approx(v, abs=1e-12)

    def test_norm_always_sqrt_d(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            d = int(rng.integers(2, 8))
            mk = lambda: _unit(rng.uniform(0.01, 1, d))
            state = WeightState(w_prev=mk(), alpha=float(rng.uniform(0.1, 1.0)))
            out = combine_weights(state, mk(), mk())
            assert abs(np.linalg.norm(out) - math.sqrt(d)) < 1e-9


def _unit(v):
    return v * math.sqrt(len(v)) / np.linalg.norm(v)


class TestUpdateQuery:
    def test_no_positives_unchanged(self):
        q = Query(values=normalize_window(np.random.default_rng(0).normal(size=(8, 2))))
        assert update_query(q, []) is q

    def test_identical_positives_fixpoint(self):
        vals = normalize_window(np.random.default_rng(1).normal(size=(10, 2)))
        q = Query(values=vals)
        pos = [Window(start=0, values=vals.copy()) for _ in range(3)]
        out = update_query(q, pos)
        assert np.abs(out.values - vals).max() < 1e-6
        assert out.provenance == "dba-updated"

    def test_moves_toward_positive_on_second_track(self):
        # Query and positive agree on track 0 (flat -> zeros); track 1 differs.
        t = 12
        x = np.linspace(0, 1, t)
        q_vals = np.column_stack([np.zeros(t), np.sin(2 * np.pi * x)])
        pos_vals = np.column_stack([np.zeros(t), np.sin(2 * np.pi * x + 1.2)])
        q = Query(values=normalize_window(q_vals))
        pos = [Window(start=0, values=normalize_window(pos_vals))]
        out = update_query(q, pos)
        before = np.abs(q.values[:, 1] - pos[0].values[:, 1]).sum()
        after = np.abs(out.values[:, 1] - pos[0].values[:, 1]).sum()
        assert after < before


class TestTrainRound:
    def setup_session(self, seed=0, d=3):
        series = make_series(400, d, seed=seed)
        windows = extract_windows(series, t=20)
        model = generate_model(d, 20, LshConfig(), seed=seed)
        q = Query(values=windows.windows[10].values.copy())
        model = model.with_query(q)
        state = WeightState(w_prev=model.weight.copy())
        return model, state, q, windows

    def test_empty_labels_identity(self):
        model, state, q, windows = self.setup_session()
        m2, s2, q2 = train_round(model, state, LabelSet(), q, windows)
        assert np.array_equal(m2.weight, model.weight)
        assert q2 is q
        assert len(s2.history) == 1
        assert np.array_equal(s2.history[0], model.weight)

    def test_positive_on_matching_track_raises_its_weight(self):
        model, state, q, windows = self.setup_session(seed=5)
        # Window 10 is the query itself; windows near it match track-wise.
        labels = LabelSet(sample_labels={11: LABEL_POSITIVE})
        m2, s2, q2 = train_round(model, state, labels, q, windows)
        assert abs(np.linalg.norm(m2.weight) - math.sqrt(3)) < 1e-9
        assert len(s2.history) == 1

    def test_repeated_rounds_converge_geometrically(self):
        model, state, q, windows = self.setup_session(seed=8)
        labels = LabelSet(sample_labels={12: LABEL_POSITIVE})
        m1, s1, q1 = train_round(model, state, labels, q, windows)
        # Hold query and labels fixed; run the same round again.
        m2, s2, _ = train_round(m1, s1, labels, q, windows)
        step1 = np.linalg.norm(m1.weight - model.weight)
        step2 = np.linalg.norm(m2.weight - m1.weight)
        assert step2 < step1 + 1e-12

    def test_inputs_not_mutated(self):
        model, state, q, windows = self.setup_session(seed=2)
        w_before = model.weight.copy()
        labels = LabelSet(sample_labels={3: LABEL_POSITIVE}, table_labels={1: TABLE_IMPORTANT})
        train_round(model, state, labels, q, windows)
        assert np.array_equal(model.weight, w_before)
        assert state.history == []


class TestSteerabilityOfWeights:
    def test_boosted_track_weight_is_nondecreasing(self):
        # Positives that match the query only on track 1 keep pushing w[1] up
        # relative to w[0] and w[2] over consecutive rounds.
        t, d = 8, 4
        rng = np.random.default_rng(42)
        q_vals = normalize_window(rng.normal(size=(t, d)))
        q = Query(values=q_vals)
        pos_vals = rng.normal(size=(t, d))
        pos_vals[:, 1] = q_vals[:, 1]  # only track 1 agrees
        pos = [Window(start=0, values=normalize_window(pos_vals))]

        state = WeightState(w_prev=np.ones(d), alpha=0.75)
        w_prev = state.w_prev
        boosted = [w_prev[1]]
        suppressed = [w_prev[3]]
        for _ in range(4):
            w_s = sample_weights(q, pos, FULL_BAND)
            w_r = combine_weights(state, None, w_s)
            state = WeightState(w_prev=w_r, alpha=0.75, history=state.history + [w_r])
            boosted.append(w_r[1])
            suppressed.append(w_r[3])
        assert all(b2 >= b1 - 1e-12 for b1, b2 in zip(boosted, boosted[1:]))
        assert boosted[-1] > boosted[0]
        assert suppressed[-1] < suppressed[0]
