"""Cross-validated choice of the penalty constant c_n.

One shared constant scales the step-1 and step-3 penalties; the step-2
penalty has no constant. Candidate fits are scored on the held-out part of
each fold by the penalized-likelihood surrogate ``nll_score``. For transfer
methods the candidate fits run steps 1-3 without the aggregation step, and
cross-validation only ever sees the estimation fold of the target study.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .exceptions import ConfigError, TooFewSamples
from .linalg import cholesky, pd_project
from .estimators import (
    RANK_METHODS,
    TRANSFER_METHODS,
    _resolve_informative,
    copula_clime,
    estimate_delta_initial,
    lambda_value,
    refine_delta,
    run_pipeline,
    split_indices,
    symmetrize_min,
    trans_step3,
)
from .rank_correlation import (
    pearson_correlation_matrix,
    rank_correlation_matrix,
    weighted_aux_correlation,
)

__all__ = ["CvGrid", "CvSelection", "nll_score", "cv_select", "fit_with_cv"]

_TAG_CV = 211

DEFAULT_CANDIDATES = (0.25, 0.5, 0.75, 1.0, 1.5, 2.0)


@dataclass(frozen=True)
class CvGrid:
    """Candidate constants and fold count for cross-validation."""

    candidates: tuple = DEFAULT_CANDIDATES
    folds: int = 5

    def __post_init__(self):
        cands = tuple(float(c) for c in self.candidates)
        if not cands:
            raise ConfigError("candidate grid must be non-empty")
        if any(not c > 0 for c in cands):
            raise ConfigError(f"candidates must be positive, got {cands}")
        if self.folds < 2:
            raise ConfigError(f"need at least 2 folds, got {self.folds}")
        object.__setattr__(self, "candidates", cands)
        object.__setattr__(self, "folds", int(self.folds))


@dataclass(frozen=True)
class CvSelection:
    """Chosen constant plus the full score table for trace output."""

    best_c: float
    candidates: tuple
    fold_scores: np.ndarray  # folds x candidates
    mean_scores: np.ndarray

    def trace_rows(self):
        """Rows (candidate, score_fold_1..k, mean) for CSV emission."""
        rows = []
        for i, c in enumerate(self.candidates):
            rows.append([c, *self.fold_scores[:, i].tolist(), float(self.mean_scores[i])])
        return rows


def nll_score(s_test, omega, eps=1e-3):
    """Held-out fit score (trace(S omega+) - logdet omega+) / (2p).

    ``omega+`` is the symmetrized, eigenvalue-floored version of ``omega``,
    so the score is finite for any finite input and depends only on the
    min-magnitude symmetric part.
    """
    s_test = np.asarray(s_test, dtype=float)
    omega_plus = pd_project(symmetrize_min(omega), eps)
    lower = cholesky(omega_plus)
    logdet = 2.0 * float(np.sum(np.log(np.diagonal(lower))))
    trace = float(np.sum(s_test * omega_plus))
    p = s_test.shape[0]
    return (trace - logdet) / (2.0 * p)


def _corr(x, use_rank):
    if use_rank:
        return rank_correlation_matrix(x).s_hat
    return pearson_correlation_matrix(x)


def cv_select(estimation_data, aux, cfg, grid, method):
    """Pick c_n by k-fold cross-validation on the given data.

    ``estimation_data`` is the data the chosen constant will be fit on (the
    estimation fold for transfer methods, the full target for C/CC). Returns
    a CvSelection; ties in mean score resolve toward the smallest candidate
    value, which makes the choice invariant to grid permutation.
    """
    x = estimation_data.values
    n, p = x.shape
    if n < 5 * grid.folds:
        raise TooFewSamples(f"cross-validation needs n >= {5 * grid.folds}, got {n}")
    use_rank = method in RANK_METHODS
    transfer = method in TRANSFER_METHODS
    cands = grid.candidates

    if transfer:
        informative = _resolve_informative(method, cfg, len(aux))
        aux_mats = [_corr(aux[k].values, use_rank) for k in informative]
        aux_sizes = [aux[k].n for k in informative]
        s_aux = weighted_aux_correlation(aux_mats, aux_sizes)
        n_aux = int(sum(aux_sizes))

    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, _TAG_CV)))
    parts = np.array_split(rng.permutation(n), grid.folds)
    scores = np.empty((grid.folds, len(cands)))
    for f in range(grid.folds):
        test_rows = np.sort(parts[f])
        train_rows = np.sort(np.concatenate([parts[g] for g in range(grid.folds) if g != f]))
        if len(test_rows) < 2 or len(train_rows) < 2:
            raise TooFewSamples(f"fold {f} too small: {len(train_rows)} train, {len(test_rows)} test")
        s_train = _corr(x[train_rows], use_rank)
        s_test = _corr(x[test_rows], use_rank)
        n_train = len(train_rows)
        if transfer:
            # The step-2 penalty carries no c_n, so the initial divergence
            # estimate is shared across the whole candidate grid.
            lam_delta = lambda_value(1.0, p, n_train)
            delta0 = estimate_delta_initial(s_train, s_aux, lam_delta)
        for i, c in enumerate(cands):
            omega_cl = copula_clime(s_train, lambda_value(c, p, n_train))
            if transfer:
                delta_ref = refine_delta(delta0, omega_cl, s_train, s_aux, lam_delta)
                fitted = trans_step3(s_aux, delta_ref, lambda_value(c, p, n_aux))
            else:
                fitted = omega_cl
            scores[f, i] = nll_score(s_test, fitted.omega, cfg.eps)
    means = scores.mean(axis=0)
    best = min(c for c, m in zip(cands, means) if m == means.min())
    return CvSelection(float(best), cands, scores, means)


def fit_with_cv(target, aux, cfg, grid, method):
    """Cross-validate c_n, then fit the method with the chosen constant.

    For transfer methods the CV runs on the same estimation fold the final
    pipeline will use (identical seeded split), keeping the aggregation fold
    untouched. Returns (estimate, selection).
    """
    aux = list(aux or [])
    if method in TRANSFER_METHODS:
        fold_est, _ = split_indices(target.n, cfg.split_fraction, cfg.seed)
        cv_data = target.subset(fold_est)
    else:
        cv_data = target
    selection = cv_select(cv_data, aux, cfg, grid, method)
    tuned = replace(cfg, c_n=selection.best_c)
    estimate = run_pipeline(target, aux, tuned, method)
    estimate.diagnostics["cv_best_c"] = selection.best_c
    estimate.diagnostics["cv_mean_scores"] = {
        str(c): float(m) for c, m in zip(selection.candidates, selection.mean_scores)
    }
    return estimate, selection
