import numpy as np
import pytest

from mtsearch.distances import (
    DtwParams,
    band_width,
    dba_average,
    dtw_dependent,
    dtw_per_track,
    dtw_uts,
    euclidean,
)
from mtsearch.errors import EmptyInput, ShapeError

from oracles import dtw_enum, dtw_enum_nd, euclidean_ref

FULL_BAND = DtwParams(band_frac=1.0)


class TestEuclidean:
    def test_identity(self):
        x = np.array([1.0, 2.0, 3.0])
        assert euclidean(x, x) == 0.0

    def test_three_four_five(self):
        assert euclidean([0.0, 0.0], [3.0, 4.0]) == 5.0

    def test_matrix_inputs(self):
        x = np.zeros((2, 2))
        y = np.ones((2, 2))
        assert euclidean(x, y) == pytest.approx(2.0)  # sqrt(4)
        assert euclidean(x, y) == pytest.approx(euclidean_ref([[0, 0], [0, 0]], [[1, 1], [1, 1]]))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            euclidean(np.zeros(3), np.zeros(4))


class TestDtwUts:
    def test_identity(self):
        assert dtw_uts([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0

    def test_single_cell(self):
        assert dtw_uts([0.0], [5.0], FULL_BAND) == 5.0

    def test_shifted_ramp(self):
        # Enumeration oracle gives 2.0: warp absorbs all but the end points.
        assert dtw_uts([1.0, 2.0, 3.0], [2.0, 3.0, 4.0], FULL_BAND) == pytest.approx(2.0)
        assert dtw_enum([1, 2, 3], [2, 3, 4]) == 2.0

    def test_empty_input(self):
        with pytest.raises(ShapeError):
            dtw_uts([], [1.0])

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(123)
        for _ in range(200):
            n = int(rng.integers(1, 6))
            m = int(rng.integers(1, 6))
            x = rng.normal(size=n)
            y = rng.normal(size=m)
            assert dtw_uts(x, y, FULL_BAND) == pytest.approx(
                dtw_enum(tuple(x), tuple(y)), rel=1e-12, abs=1e-12
            )

    def test_diagonal_upper_bound(self):
        # The diagonal path always fits in the band for equal lengths.
        rng = np.random.default_rng(5)
        for _ in range(50):
            x = rng.normal(size=20)
            y = rng.normal(size=20)
            assert dtw_uts(x, y) <= np.abs(x - y).sum() + 1e-12

    def test_symmetry_equal_lengths(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=15)
        y = rng.normal(size=15)
        assert dtw_uts(x, y) == pytest.approx(dtw_uts(y, x), abs=1e-12)

    def test_band_widening_when_lengths_differ(self):
        with pytest.warns(UserWarning):
            w = band_width(10, 30, 0.05)
        assert w == 21  # |t1 - t2| + 1


class TestDtwDependent:
    def test_identity(self):
        x = np.random.default_rng(0).normal(size=(6, 3))
        assert dtw_dependent(x, x) == 0.0

    def test_d1_reduces_to_squared_uts(self):
        rng = np.random.default_rng(17)
        from mtsearch.distances import _dtw_1d

        for _ in range(100):
            x = rng.normal(size=5)
            y = rng.normal(size=5)
            got = dtw_dependent(x[:, None], y[:, None], FULL_BAND)
            want = _dtw_1d(x, y, 5, True)
            assert got == pytest.approx(want, rel=1e-12)

    def test_2x2_fixture_matches_enumeration(self):
        X = [[0.0, 1.0], [2.0, 0.5]]
        Y = [[0.5, 0.5], [1.0, 1.0]]
        want = dtw_enum_nd(X, Y)
        assert want == pytest.approx(1.75)  # frozen from the enumeration oracle
        assert dtw_dependent(np.array(X), np.array(Y), FULL_BAND) == pytest.approx(want)

    def test_random_small_vs_enumeration(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            n = int(rng.integers(1, 5))
            m = int(rng.integers(1, 5))
            X = rng.normal(size=(n, 2))
            Y = rng.normal(size=(m, 2))
            assert dtw_dependent(X, Y, FULL_BAND) == pytest.approx(
                dtw_enum_nd(X.tolist(), Y.tolist()), rel=1e-12, abs=1e-12
            )

    def test_track_count_mismatch(self):
        with pytest.raises(ShapeError):
            dtw_dependent(np.zeros((3, 2)), np.zeros((3, 3)))


class TestDtwPerTrack:
    def test_zero_for_identical(self):
        q = np.random.default_rng(2).normal(size=(8, 3))
        assert np.all(dtw_per_track(q, q) == 0.0)

    def test_constant_shift_fixture(self):
        # Track 0 identical; track 1 constant, shifted by 1 -> every alignment
        # step costs 1 and the shortest path has 3 steps.
        q = np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
        w = np.array([[1.0, 6.0], [2.0, 6.0], [3.0, 6.0]])
        out = dtw_per_track(q, w, FULL_BAND)
        assert out == pytest.approx([0.0, 3.0])

    def test_track_permutation_symmetry(self):
        rng = np.random.default_rng(4)
        q = rng.normal(size=(7, 3))
        w = rng.normal(size=(7, 3))
        perm = [2, 0, 1]
        out = dtw_per_track(q, w, FULL_BAND)
        out_perm = dtw_per_track(q[:, perm], w[:, perm], FULL_BAND)
        assert out_perm == pytest.approx(out[perm])


class TestDba:
    def test_fixpoint_on_identical_sequences(self):
        x = np.random.default_rng(1).normal(size=(10, 2))
        out = dba_average([x.copy(), x.copy()], init=x.copy())
        assert np.abs(out - x).max() < 1e-12

    def test_constant_sequences_average(self):
        a = np.zeros(3)
        b = np.full(3, 2.0)
        out = dba_average([a, b], init=a.copy(), params=FULL_BAND)
        assert out[:, 0] == pytest.approx([1.0, 1.0, 1.0])

    def test_beats_elementwise_mean_on_morphed_fixture(self):
        # Two time-shifted copies of one bump: the elementwise mean smears the
        # bump, the barycenter should not.
        t = np.linspace(0, 1, 30)
        bump = np.exp(-((t - 0.35) / 0.08) ** 2)
        shifted = np.exp(-((t - 0.65) / 0.08) ** 2)
        seqs = [bump[:, None], shifted[:, None]]
        init = bump[:, None]
        dba = dba_average(seqs, init=init.copy(), params=FULL_BAND)
        naive = (bump + shifted)[:, None] / 2

        def total_dtw(center):
            return sum(dtw_dependent(center, s, FULL_BAND) for s in seqs)

        assert total_dtw(dba) <= total_dtw(naive)

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            dba_average([], init=np.zeros((3, 1)))
