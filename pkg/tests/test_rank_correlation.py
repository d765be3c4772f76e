import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import pearson_oracle, tau_naive_oracle
from tcclime.exceptions import (
    DataError,
    DimensionMismatch,
    EmptyInformativeSet,
    LengthMismatch,
    TooFewSamples,
    ZeroVariance,
)
from tcclime.rank_correlation import (
    StudyDataset,
    _tau_matrix_gemm,
    _tau_matrix_pairs,
    kendall_tau_pair,
    load_dataset_csv,
    pearson_correlation_matrix,
    rank_correlation_matrix,
    save_dataset_csv,
    weighted_aux_correlation,
)


class TestKendallTauPair:
    def test_concordant(self):
        assert kendall_tau_pair([1.0, 2.0, 3.0], [10.0, 20.0, 30.0]) == 1.0

    def test_discordant(self):
        assert kendall_tau_pair([1.0, 2.0, 3.0], [30.0, 20.0, 10.0]) == -1.0

    def test_mixed_third(self):
        assert kendall_tau_pair([1.0, 2.0, 3.0, 4.0], [2.0, 1.0, 4.0, 3.0]) == 1.0 / 3.0

    def test_constant_input_is_zero(self):
        assert kendall_tau_pair([5.0, 5.0, 5.0], [1.0, 2.0, 3.0]) == 0.0

    def test_tied_pairs_count_zero(self):
        # pairs: (0,1) x-tied -> 0, (0,2) and (1,2) concordant -> 2/3
        assert kendall_tau_pair([1.0, 1.0, 2.0], [1.0, 2.0, 3.0]) == 2.0 / 3.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            kendall_tau_pair([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_too_few(self):
        with pytest.raises(TooFewSamples):
            kendall_tau_pair([1.0], [2.0])

    def test_non_finite(self):
        with pytest.raises(DataError):
            kendall_tau_pair([1.0, np.nan, 3.0], [1.0, 2.0, 3.0])

    def test_methods_agree_exactly(self):
        rng = np.random.default_rng(0)
        for trial in range(20):
            n = int(rng.integers(2, 120))
            if trial % 2 == 0:
                x = rng.standard_normal(n)
                y = rng.standard_normal(n)
            else:
                x = rng.integers(0, 5, size=n).astype(float)
                y = rng.integers(0, 5, size=n).astype(float)
            naive = kendall_tau_pair(x, y, method="naive")
            fast = kendall_tau_pair(x, y, method="fast")
            assert naive == fast
            assert fast == tau_naive_oracle(x, y)

    @given(
        st.lists(st.integers(min_value=-5, max_value=5), min_size=2, max_size=40),
        st.data(),
    )
    @settings(max_examples=60, deadline=None)
    def test_property_matches_oracle(self, xs, data):
        ys = data.draw(
            st.lists(
                st.integers(min_value=-5, max_value=5),
                min_size=len(xs),
                max_size=len(xs),
            )
        )
        x = np.array(xs, dtype=float)
        y = np.array(ys, dtype=float)
        t = kendall_tau_pair(x, y)
        assert t == tau_naive_oracle(x, y)
        assert -1.0 <= t <= 1.0
        assert t == kendall_tau_pair(y, x)
        # strictly increasing transforms leave the statistic untouched
        assert t == kendall_tau_pair(3.0 * x + 1.0, y)


class TestRankCorrelationMatrix:
    def test_duplicate_columns_give_one(self):
        rng = np.random.default_rng(1)
        col = rng.standard_normal(30)
        s = rank_correlation_matrix(np.column_stack([col, col, -col])).s_hat
        assert s[0, 1] == 1.0
        assert s[0, 2] == -1.0
        np.testing.assert_array_equal(np.diag(s), np.ones(3))

    def test_matches_pairwise_entries(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((25, 4))
        est = rank_correlation_matrix(x)
        assert est.source_n == 25
        s = est.s_hat
        for i in range(4):
            for j in range(i + 1, 4):
                tau = kendall_tau_pair(x[:, i], x[:, j])
                assert s[i, j] == np.sin(np.pi / 2.0 * tau)

    def test_gemm_and_pairwise_paths_identical(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((70, 6))
        x[::7, 2] = 0.25  # inject ties
        gemm = _tau_matrix_gemm(x)
        pairs = _tau_matrix_pairs(x)
        # the diagonal is overwritten downstream, only off-diagonal must match
        np.fill_diagonal(gemm, 0.0)
        np.fill_diagonal(pairs, 0.0)
        np.testing.assert_array_equal(gemm, pairs)

    def test_monotone_transform_invariance_bitwise(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((40, 5))
        np.testing.assert_array_equal(
            rank_correlation_matrix(x).s_hat, rank_correlation_matrix(np.exp(x)).s_hat
        )

    def test_recovers_gaussian_correlation(self):
        rng = np.random.default_rng(5)
        rho = 0.6
        z = rng.multivariate_normal([0, 0], [[1, rho], [rho, 1]], size=800)
        s = rank_correlation_matrix(z).s_hat
        assert abs(s[0, 1] - rho) < 0.08

    def test_accepts_study_dataset(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal((20, 3))
        ds = StudyDataset(values=x)
        np.testing.assert_array_equal(
            rank_correlation_matrix(ds).s_hat, rank_correlation_matrix(x).s_hat
        )


class TestPearsonCorrelationMatrix:
    def test_hand_case(self):
        x = np.array([[0.0, 0.0], [1.0, 2.0], [2.0, 4.0]])
        np.testing.assert_allclose(
            pearson_correlation_matrix(x), np.ones((2, 2)), atol=1e-12
        )

    def test_matches_oracle(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal((50, 5))
        np.testing.assert_allclose(
            pearson_correlation_matrix(x), pearson_oracle(x), atol=1e-12
        )

    def test_constant_column_raises(self):
        x = np.ones((10, 2))
        x[:, 0] = np.arange(10.0)
        with pytest.raises(ZeroVariance):
            pearson_correlation_matrix(x)


class TestWeightedAuxCorrelation:
    def test_single_study_unchanged(self):
        rng = np.random.default_rng(8)
        a = rng.standard_normal((4, 4))
        a = (a + a.T) / 2
        np.fill_diagonal(a, 1.0)
        np.testing.assert_array_equal(weighted_aux_correlation([a], sizes=[40]), a)

    def test_identical_inputs_collapse_bitwise(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal((30, 5))
        s = rank_correlation_matrix(x)
        out = weighted_aux_correlation([s, s, s])
        np.testing.assert_array_equal(out, s.s_hat)

    def test_weights_proportional_to_sizes(self):
        rng = np.random.default_rng(10)
        mats = []
        for _ in range(3):
            a = rng.standard_normal((3, 3))
            a = (a + a.T) / 2
            np.fill_diagonal(a, 1.0)
            mats.append(a)
        out = weighted_aux_correlation(mats, sizes=[100, 200, 100])
        direct = 0.25 * mats[0] + 0.5 * mats[1] + 0.25 * mats[2]
        np.fill_diagonal(direct, 1.0)
        np.testing.assert_allclose(out, direct, atol=1e-14)

    def test_unit_diagonal(self):
        rng = np.random.default_rng(11)
        mats = [rank_correlation_matrix(rng.standard_normal((20, 4))) for _ in range(2)]
        out = weighted_aux_correlation(mats)
        np.testing.assert_array_equal(np.diag(out), np.ones(4))

    def test_empty_raises(self):
        with pytest.raises(EmptyInformativeSet):
            weighted_aux_correlation([], sizes=[])

    def test_shape_mismatch_raises(self):
        with pytest.raises(DimensionMismatch):
            weighted_aux_correlation([np.eye(3), np.eye(4)], sizes=[10, 10])


class TestStudyDataset:
    def test_requires_two_rows(self):
        with pytest.raises(TooFewSamples):
            StudyDataset(values=np.ones((1, 3)))

    def test_requires_2d(self):
        with pytest.raises(DataError):
            StudyDataset(values=np.ones(5))

    def test_rejects_non_finite(self):
        bad = np.ones((3, 2))
        bad[1, 1] = np.inf
        with pytest.raises(DataError):
            StudyDataset(values=bad)

    def test_column_name_count_checked(self):
        with pytest.raises(DimensionMismatch):
            StudyDataset(values=np.ones((3, 2)), columns=("a",))

    def test_subset(self):
        rng = np.random.default_rng(12)
        ds = StudyDataset(values=rng.standard_normal((10, 3)), label="s")
        sub = ds.subset([2, 5, 7])
        assert sub.n == 3
        np.testing.assert_array_equal(sub.values, ds.values[[2, 5, 7]])
        assert sub.label == "s"


class TestDatasetCsv:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(13)
        ds = StudyDataset(
            values=rng.standard_normal((12, 4)),
            label="t0",
            columns=("a", "b", "c", "d"),
        )
        path = tmp_path / "d.csv"
        save_dataset_csv(path, ds)
        back = load_dataset_csv(path, label="t0")
        np.testing.assert_array_equal(back.values, ds.values)
        assert back.columns == ds.columns

    def test_missing_values_drop_rows(self, tmp_path):
        path = tmp_path / "gaps.csv"
        path.write_text("x1,x2\n1.0,2.0\n3.0,\nNA,4.0\n5.0,6.0\n")
        ds = load_dataset_csv(path)
        assert ds.n == 2
        assert ds.dropped_rows == 2
        np.testing.assert_array_equal(ds.values, [[1.0, 2.0], [5.0, 6.0]])

    def test_non_numeric_reports_location(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1,x2\n1.0,2.0\n3.0,abc\n")
        with pytest.raises(DataError) as err:
            load_dataset_csv(path)
        assert "x2" in str(err.value)

    def test_ragged_row_raises(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("x1,x2\n1.0,2.0\n3.0\n")
        with pytest.raises(DataError):
            load_dataset_csv(path)

    def test_all_rows_dropped_raises(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("x1,x2\nNA,1.0\n2.0,nan\n")
        with pytest.raises(TooFewSamples):
            load_dataset_csv(path)
