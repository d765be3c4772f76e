import numpy as np
import pytest

from tcclime.estimators import (
    TransferConfig,
    lambda_value,
    run_pipeline,
    split_indices,
    symmetrize_min,
)
from tcclime.exceptions import ConfigError, TooFewSamples
from tcclime.rank_correlation import StudyDataset
from tcclime.simulation import banded_precision, simulate_scenario
from tcclime.tuning import CvGrid, CvSelection, cv_select, fit_with_cv, nll_score


class TestNllScore:
    def test_identity_pair(self):
        assert nll_score(np.eye(5), np.eye(5)) == pytest.approx(0.5, abs=1e-12)

    def test_scaled_identity(self):
        # trace = 2p, logdet = p log 2 -> (2p - p log 2) / 2p
        val = nll_score(np.eye(4), 2.0 * np.eye(4))
        assert val == pytest.approx(1.0 - np.log(2.0) / 2.0, abs=1e-12)

    def test_asymmetric_part_ignored(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((5, 5)) + 3 * np.eye(5)
        s = np.eye(5)
        assert nll_score(s, a) == nll_score(s, symmetrize_min(a))

    def test_non_pd_input_floored_not_fatal(self):
        val = nll_score(np.eye(3), -np.eye(3), eps=1e-3)
        assert np.isfinite(val)

    def test_population_score_minimized_at_truth_scale(self):
        omega, sigma = banded_precision(10)
        scores = {c: nll_score(sigma, c * omega) for c in (0.5, 1.0, 2.0)}
        assert scores[1.0] < scores[0.5]
        assert scores[1.0] < scores[2.0]


class TestCvGrid:
    def test_defaults(self):
        grid = CvGrid()
        assert grid.folds == 5
        assert grid.candidates[0] == 0.25

    def test_rejects_empty(self):
        with pytest.raises(ConfigError):
            CvGrid(candidates=())

    def test_rejects_nonpositive(self):
        with pytest.raises(ConfigError):
            CvGrid(candidates=(0.5, -1.0))

    def test_rejects_single_fold(self):
        with pytest.raises(ConfigError):
            CvGrid(folds=1)


def _target(n=120, p=10, seed=0):
    _, sigma = banded_precision(p)
    rng = np.random.default_rng(seed)
    z = rng.multivariate_normal(np.zeros(p), sigma, size=n)
    return StudyDataset(np.exp(z))


class TestCvSelect:
    def test_single_candidate_returned(self):
        sel = cv_select(_target(), [], TransferConfig(), CvGrid(candidates=(0.7,)), "CC")
        assert sel.best_c == 0.7

    def test_scores_shape_and_trace(self):
        grid = CvGrid(candidates=(0.5, 1.0), folds=3)
        sel = cv_select(_target(), [], TransferConfig(), grid, "CC")
        assert sel.fold_scores.shape == (3, 2)
        rows = sel.trace_rows()
        assert len(rows) == 2
        assert rows[0][0] == 0.5
        assert rows[0][-1] == pytest.approx(sel.mean_scores[0])

    def test_argmin_of_mean_scores(self):
        grid = CvGrid(candidates=(0.5, 1.0, 2.0), folds=3)
        sel = cv_select(_target(), [], TransferConfig(), grid, "CC")
        assert sel.best_c == sel.candidates[int(np.argmin(sel.mean_scores))]

    def test_tie_breaks_toward_smaller(self):
        # huge candidates all zero out the estimate, so their scores tie
        grid = CvGrid(candidates=(9.0, 5.0), folds=3)
        sel = cv_select(_target(), [], TransferConfig(), grid, "CC")
        assert sel.mean_scores[0] == sel.mean_scores[1]
        assert sel.best_c == 5.0

    def test_grid_permutation_invariant(self):
        a = cv_select(_target(), [], TransferConfig(), CvGrid(candidates=(0.5, 1.0), folds=3), "CC")
        b = cv_select(_target(), [], TransferConfig(), CvGrid(candidates=(1.0, 0.5), folds=3), "CC")
        assert a.best_c == b.best_c

    def test_deterministic_in_config_seed(self):
        grid = CvGrid(candidates=(0.5, 1.0), folds=3)
        a = cv_select(_target(), [], TransferConfig(seed=3), grid, "CC")
        b = cv_select(_target(), [], TransferConfig(seed=3), grid, "CC")
        np.testing.assert_array_equal(a.fold_scores, b.fold_scores)

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamples):
            cv_select(_target(n=20), [], TransferConfig(), CvGrid(folds=5), "CC")

    def test_transfer_method_uses_aux(self):
        sc = simulate_scenario(p=10, n=90, n_k=60, n_studies=2, informative=(0, 1),
                               r=5.0, transform="exponential", seed=2)
        grid = CvGrid(candidates=(0.5, 1.0), folds=3)
        cfg = TransferConfig(informative_set=(0, 1), seed=2)
        sel = cv_select(sc.target, sc.aux, cfg, grid, "CTC")
        assert sel.best_c in grid.candidates
        assert np.all(np.isfinite(sel.fold_scores))


class TestFitWithCv:
    def test_estimate_uses_chosen_constant(self):
        sc = simulate_scenario(p=10, n=90, n_k=60, n_studies=2, informative=(0,),
                               r=5.0, transform="exponential", seed=5)
        grid = CvGrid(candidates=(0.5, 1.0), folds=3)
        cfg = TransferConfig(informative_set=(0,), seed=5)
        est, sel = fit_with_cv(sc.target, sc.aux, cfg, grid, "CTC")
        n_est = est.diagnostics["n_estimation_fold"]
        assert est.diagnostics["lambda_cl"] == lambda_value(sel.best_c, 10, n_est)
        assert est.diagnostics["cv_best_c"] == sel.best_c
        assert str(sel.candidates[0]) in est.diagnostics["cv_mean_scores"]

    def test_cv_runs_on_estimation_fold_only(self):
        # selection must be reproducible from the estimation fold alone
        sc = simulate_scenario(p=10, n=90, n_k=60, n_studies=2, informative=(0,),
                               r=5.0, transform="exponential", seed=6)
        grid = CvGrid(candidates=(0.5, 1.0), folds=3)
        cfg = TransferConfig(informative_set=(0,), seed=6)
        _, sel = fit_with_cv(sc.target, sc.aux, cfg, grid, "CTC")
        fold_est, _ = split_indices(sc.target.n, cfg.split_fraction, cfg.seed)
        direct = cv_select(sc.target.subset(fold_est), sc.aux, cfg, grid, "CTC")
        assert direct.best_c == sel.best_c
        np.testing.assert_array_equal(direct.fold_scores, sel.fold_scores)

    def test_matches_pipeline_with_pinned_constant(self):
        sc = simulate_scenario(p=10, n=90, n_k=60, n_studies=2, informative=(0,),
                               r=5.0, transform="exponential", seed=7)
        grid = CvGrid(candidates=(0.5, 1.0), folds=3)
        cfg = TransferConfig(informative_set=(0,), seed=7)
        est, sel = fit_with_cv(sc.target, sc.aux, cfg, grid, "CTC")
        from dataclasses import replace

        direct = run_pipeline(sc.target, sc.aux, replace(cfg, c_n=sel.best_c), "CTC")
        np.testing.assert_array_equal(est.omega, direct.omega)

    def test_cv_improves_over_default_constant_on_average(self):
        from tcclime.metrics import frobenius_error

        gains = []
        for seed in range(8):
            target = _target(n=150, p=12, seed=40 + seed)
            omega, _ = banded_precision(12)
            cfg = TransferConfig(seed=40 + seed)
            tuned, _ = fit_with_cv(target, [], cfg, CvGrid(folds=3), "CC")
            fixed = run_pipeline(target, [], cfg, "CC")
            gains.append(
                frobenius_error(fixed.omega, omega) - frobenius_error(tuned.omega, omega)
            )
        assert np.mean(gains) > 0
