import numpy as np
import pytest
from scipy.special import ndtr

from tcclime.exceptions import (
    ConfigError,
    DataError,
    NotPositiveDefinite,
)
from tcclime.linalg import eigen_sym, max_abs
from tcclime.simulation import (
    PrecisionDesign,
    TransformSpec,
    apply_transform,
    banded_precision,
    block_toeplitz_precision,
    divergence_norms,
    draw_divergence,
    gaussian_cdf_transform_value,
    informative_aux_covariance,
    noninformative_aux_covariance,
    sample_nonparanormal,
    simulate_scenario,
)


def band_mask(p, width):
    dist = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    return dist <= width


class TestBandedPrecision:
    def test_truth_pair_consistent(self):
        omega, sigma = banded_precision(10)
        np.testing.assert_array_equal(np.diag(sigma), np.ones(10))
        assert max_abs(omega @ sigma - np.eye(10)) < 1e-10
        vals, _ = eigen_sym(sigma)
        assert vals[-1] > 0

    def test_band_structure_preserved(self):
        omega, _ = banded_precision(12)
        assert np.all(np.abs(omega[~band_mask(12, 7)]) < 1e-10)
        assert np.all(np.abs(omega[band_mask(12, 7)]) > 1e-10)

    def test_entries_match_geometric_profile(self):
        # rescaling acts as D omega0 D, so omega_ij / sqrt(omega_ii omega_jj)
        # must equal the raw profile 2 * 0.6^|i-j| / 2 within the band
        omega, _ = banded_precision(11)
        d = np.sqrt(np.diag(omega) / 2.0)
        raw = omega / np.outer(d, d)
        dist = np.abs(np.subtract.outer(np.arange(11), np.arange(11)))
        expected = 2.0 * 0.6**dist * (dist <= 7)
        np.testing.assert_allclose(raw, expected, atol=1e-9)

    def test_minimum_dimension(self):
        with pytest.raises(ConfigError):
            banded_precision(7)


class TestBlockToeplitzPrecision:
    def test_truth_pair_consistent(self):
        omega, sigma = block_toeplitz_precision(12)
        np.testing.assert_array_equal(np.diag(sigma), np.ones(12))
        assert max_abs(omega @ sigma - np.eye(12)) < 1e-10

    def test_block_support(self):
        omega, _ = block_toeplitz_precision(16)
        blocks = np.kron(np.eye(4, dtype=bool), np.ones((4, 4), dtype=bool))
        assert np.all(np.abs(omega[~blocks]) < 1e-10)
        assert np.all(np.abs(omega[blocks]) > 1e-10)
        # every row touches at most 4 variables
        assert int(np.max(np.sum(np.abs(omega) > 1e-10, axis=1))) <= 4

    def test_entries_match_toeplitz_profile(self):
        omega, _ = block_toeplitz_precision(8)
        d = np.sqrt(np.diag(omega) / 1.2)
        raw = omega[:4, :4] / np.outer(d[:4], d[:4])
        from scipy.linalg import toeplitz

        np.testing.assert_allclose(raw, toeplitz([1.2, 0.9, 0.6, 0.3]), atol=1e-9)

    def test_dimension_multiple_of_four(self):
        with pytest.raises(ConfigError):
            block_toeplitz_precision(10)


class TestDrawDivergence:
    def test_sparsity_rate(self):
        # nonzero count is Binomial(p^2, 0.1): mean 0.1 p^2, sd ~ 0.3 p
        rng = np.random.default_rng(0)
        p = 40
        counts = [np.count_nonzero(draw_divergence(p, 10.0, rng)) for _ in range(30)]
        mean = np.mean(counts)
        sd = np.sqrt(p * p * 0.1 * 0.9 / 30)
        assert abs(mean - 0.1 * p * p) < 4 * sd

    def test_magnitude_bounded(self):
        rng = np.random.default_rng(1)
        p, r = 25, 10.0
        d = draw_divergence(p, r, rng)
        assert np.max(np.abs(d)) <= r / p

    def test_requires_positive_r(self):
        with pytest.raises(ConfigError):
            draw_divergence(10, 0.0, np.random.default_rng(2))


class TestAuxCovariances:
    def test_informative_is_correlation(self):
        omega, sigma = banded_precision(30)
        for seed in range(3):
            s_k = informative_aux_covariance(
                sigma, omega, 30.0, np.random.default_rng(seed)
            )
            np.testing.assert_array_equal(np.diag(s_k), np.ones(30))
            np.testing.assert_allclose(s_k, s_k.T, atol=0)
            vals, _ = eigen_sym(s_k)
            assert vals[-1] > 0

    def test_informative_close_to_target_for_small_r(self):
        omega, sigma = banded_precision(20)
        s_k = informative_aux_covariance(sigma, omega, 1e-9, np.random.default_rng(3))
        assert max_abs(s_k - sigma) < 1e-9

    def test_divergence_grows_with_r(self):
        omega, sigma = banded_precision(20)
        gaps = []
        for r in (1.0, 40.0):
            diffs = [
                max_abs(
                    informative_aux_covariance(sigma, omega, r, np.random.default_rng(s))
                    - sigma
                )
                for s in range(5)
            ]
            gaps.append(np.mean(diffs))
        assert gaps[0] < gaps[1]

    def test_inverse_pair_validated(self):
        omega, sigma = banded_precision(10)
        with pytest.raises(DataError):
            informative_aux_covariance(sigma, 2.0 * omega, 10.0, np.random.default_rng(4))

    def test_noninformative_is_correlation(self):
        s_k = noninformative_aux_covariance(25, np.random.default_rng(5))
        np.testing.assert_array_equal(np.diag(s_k), np.ones(25))
        vals, _ = eigen_sym(s_k)
        assert vals[-1] > 0

    def test_noninformative_varies_with_seed(self):
        a = noninformative_aux_covariance(10, np.random.default_rng(6))
        b = noninformative_aux_covariance(10, np.random.default_rng(7))
        assert max_abs(a - b) > 1e-3


class TestGaussianCdfTransform:
    def test_monotone(self):
        # float saturation flattens the far tails, so require strictness only
        # on the central range and weak monotonicity everywhere
        z = np.linspace(-6, 6, 1000)
        assert np.all(np.diff(gaussian_cdf_transform_value(z)) >= 0)
        z = np.linspace(-3, 3, 1000)
        assert np.all(np.diff(gaussian_cdf_transform_value(z)) > 0)

    def test_standardized_under_standard_normal(self):
        rng = np.random.default_rng(8)
        z = rng.standard_normal(200_000)
        g = gaussian_cdf_transform_value(z)
        assert abs(np.mean(g)) < 0.01
        assert abs(np.var(g) - 1.0) < 0.02

    def test_affine_in_cdf(self):
        # the transform is an affine rescaling of Phi((z - mu)/sigma)
        z = np.array([-1.0, 0.0, 2.0])
        g = gaussian_cdf_transform_value(z, 0.05, 0.4)
        raw = ndtr((z - 0.05) / 0.4)
        slope = (g[2] - g[0]) / (raw[2] - raw[0])
        np.testing.assert_allclose(g[1] - g[0], slope * (raw[1] - raw[0]), atol=1e-12)

    def test_scalar_matches_vector(self):
        vec = gaussian_cdf_transform_value(np.array([0.3]))
        scalar = gaussian_cdf_transform_value(0.3)
        assert float(vec[0]) == float(scalar)

    def test_nonstandard_margin_standardized(self):
        rng = np.random.default_rng(9)
        z = 0.5 + 1.5 * rng.standard_normal(200_000)
        g = gaussian_cdf_transform_value(z, mu_j=0.5, sigma_j=1.5)
        assert abs(np.mean(g)) < 0.01
        assert abs(np.var(g) - 1.0) < 0.02

    def test_invalid_sigma_j(self):
        with pytest.raises(ConfigError):
            gaussian_cdf_transform_value(0.0, sigma_j=0.0)


class TestApplyTransform:
    def test_linear_is_identity(self):
        z = np.array([[1.0, -2.0]])
        np.testing.assert_array_equal(apply_transform(z, TransformSpec("linear")), z)

    def test_exponential(self):
        z = np.array([0.0, 1.0])
        np.testing.assert_allclose(
            apply_transform(z, TransformSpec("exponential")), [1.0, np.e], atol=1e-12
        )

    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigError):
            TransformSpec("cubic")


class TestSampleNonparanormal:
    def test_linear_recovers_correlation(self):
        _, sigma = banded_precision(8)
        ds = sample_nonparanormal(
            sigma, TransformSpec("linear"), 4000, np.random.default_rng(10)
        )
        emp = np.corrcoef(ds.values, rowvar=False)
        assert max_abs(emp - sigma) < 0.08

    def test_rank_structure_invariant_across_transforms(self):
        from tcclime.rank_correlation import rank_correlation_matrix

        _, sigma = banded_precision(8)
        mats = []
        for kind in ("linear", "exponential", "gaussian_cdf"):
            ds = sample_nonparanormal(
                sigma, TransformSpec(kind), 200, np.random.default_rng(11)
            )
            mats.append(rank_correlation_matrix(ds).s_hat)
        np.testing.assert_array_equal(mats[0], mats[1])
        np.testing.assert_array_equal(mats[0], mats[2])

    def test_exponential_values_positive(self):
        _, sigma = banded_precision(8)
        ds = sample_nonparanormal(
            sigma, TransformSpec("exponential"), 50, np.random.default_rng(12)
        )
        assert np.all(ds.values > 0)

    def test_requires_pd_sigma(self):
        with pytest.raises(NotPositiveDefinite):
            sample_nonparanormal(
                np.ones((3, 3)), TransformSpec("linear"), 10, np.random.default_rng(13)
            )


class TestDivergenceNorms:
    def test_hand_case(self):
        d = np.array([[0.0, 2.0], [-3.0, 1.0]])
        out = divergence_norms(d)
        assert out["max_abs"] == 3.0
        assert out["max_row_l1"] == 4.0
        assert out["max_col_l1"] == 3.0


class TestSimulateScenario:
    def test_structure(self):
        sc = simulate_scenario(
            p=12, n=30, n_k=25, n_studies=4, informative=(0, 2), r=5.0, seed=1
        )
        assert sc.target.n == 30
        assert len(sc.aux) == 4
        assert all(a.n == 25 for a in sc.aux)
        assert len(sc.aux_sigmas) == 4
        assert len(sc.aux_deltas) == 4
        assert sc.informative == (0, 2)

    def test_deterministic(self):
        a = simulate_scenario(p=10, n=20, n_k=20, n_studies=2, seed=3, informative=(0,))
        b = simulate_scenario(p=10, n=20, n_k=20, n_studies=2, seed=3, informative=(0,))
        np.testing.assert_array_equal(a.target.values, b.target.values)
        for x, y in zip(a.aux, b.aux):
            np.testing.assert_array_equal(x.values, y.values)

    def test_substreams_stable_under_study_count(self):
        a = simulate_scenario(p=10, n=20, n_k=20, n_studies=2, seed=4, informative=(0,))
        b = simulate_scenario(p=10, n=20, n_k=20, n_studies=5, seed=4, informative=(0,))
        np.testing.assert_array_equal(a.target.values, b.target.values)
        np.testing.assert_array_equal(a.aux[0].values, b.aux[0].values)
        np.testing.assert_array_equal(a.aux[1].values, b.aux[1].values)

    def test_delta_identity(self):
        sc = simulate_scenario(p=10, n=20, n_k=20, n_studies=2, seed=5, informative=(0,))
        for s_k, d_k in zip(sc.aux_sigmas, sc.aux_deltas):
            np.testing.assert_allclose(sc.omega @ s_k - np.eye(10), d_k, atol=1e-12)

    def test_informative_auxes_closer_than_noise(self):
        sc = simulate_scenario(
            p=20, n=20, n_k=20, n_studies=2, informative=(0,), r=5.0, seed=6
        )
        gap_info = max_abs(sc.aux_sigmas[0] - sc.sigma)
        gap_noise = max_abs(sc.aux_sigmas[1] - sc.sigma)
        assert gap_info < gap_noise

    def test_accepts_transform_string(self):
        sc = simulate_scenario(
            p=8, n=10, n_k=10, n_studies=1, informative=(0,), seed=7,
            transform="exponential",
        )
        assert sc.transform.kind == "exponential"
        assert np.all(sc.target.values > 0)

    def test_informative_range_checked(self):
        with pytest.raises(ConfigError):
            simulate_scenario(p=8, n=10, n_k=10, n_studies=2, informative=(2,), seed=8)

    def test_negative_seed_rejected(self):
        with pytest.raises(ConfigError):
            simulate_scenario(p=8, n=10, n_k=10, n_studies=1, informative=(0,), seed=-1)
