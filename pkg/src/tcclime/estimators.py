"""The six precision-matrix estimation pipelines and their building blocks.

Method tags:

* C    - CLIME on the Pearson correlation of the target study.
* CC   - CLIME on the rank correlation (copula CLIME).
* TC   - three-step transfer + aggregation, Pearson correlations.
* CTC  - the same transfer pipeline on rank correlations.
* PC   - TC run with every auxiliary study treated as informative.
* CPC  - CTC run with every auxiliary study treated as informative.

Transfer pipelines split the target sample into an estimation fold and an
aggregation fold; steps 1-3 see only the first fold, the held-out fold
drives the final column-wise combination of the single-study and transfer
estimates.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import (
    ConfigError,
    DataError,
    DimensionMismatch,
    EmptyInformativeSet,
    TooFewSamples,
)
from .linalg import save_matrix_csv
from .rank_correlation import (
    StudyDataset,
    pearson_correlation_matrix,
    rank_correlation_matrix,
    weighted_aux_correlation,
)
from .solver import soft_threshold, solve_matrix

__all__ = [
    "METHODS",
    "RANK_METHODS",
    "TRANSFER_METHODS",
    "POOLED_METHODS",
    "TransferConfig",
    "PrecisionEstimate",
    "DivergenceEstimate",
    "lambda_value",
    "split_indices",
    "copula_clime",
    "estimate_delta_initial",
    "refine_delta",
    "trans_step3",
    "aggregate",
    "symmetrize_min",
    "run_pipeline",
    "save_estimate",
]

METHODS = ("C", "TC", "PC", "CC", "CTC", "CPC")
RANK_METHODS = frozenset({"CC", "CTC", "CPC"})
TRANSFER_METHODS = frozenset({"TC", "CTC", "PC", "CPC"})
POOLED_METHODS = frozenset({"PC", "CPC"})

_TAG_SPLIT = 101

# Condition-number ceiling above which the 2x2 aggregation system is treated
# as singular and the fallback column selection kicks in.
AGGREGATE_COND_MAX = 1e12


@dataclass(frozen=True)
class TransferConfig:
    """Knobs shared by all pipelines.

    ``informative_set`` holds 0-based indices into the auxiliary-study list.
    Any lambda left as None is derived from ``c_n`` and the relevant sample
    size: lambda_cl = 2 c sqrt(log p / n), lambda_delta = 2 sqrt(log p / n),
    lambda_omega = 2 c sqrt(log p / n_aux), with n the estimation-fold size
    wherever the pipeline splits.
    """

    informative_set: tuple = ()
    lambda_cl: float | None = None
    lambda_delta: float | None = None
    lambda_omega: float | None = None
    c_n: float = 1.0
    split_fraction: float = 2.0 / 3.0
    seed: int = 0
    use_rank_correlation: bool = True
    eps: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "informative_set", tuple(int(k) for k in self.informative_set))
        if not 0 < self.split_fraction < 1:
            raise ConfigError(f"split_fraction must lie in (0, 1), got {self.split_fraction}")
        for name in ("lambda_cl", "lambda_delta", "lambda_omega"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ConfigError(f"{name} must be positive when given, got {val}")
        if not self.c_n > 0:
            raise ConfigError(f"c_n must be positive, got {self.c_n}")
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {self.seed}")
        if not self.eps > 0:
            raise ConfigError(f"eps must be positive, got {self.eps}")


@dataclass
class PrecisionEstimate:
    """A precision-matrix estimate with its provenance."""

    omega: np.ndarray
    symmetrized: bool
    method: str
    config: TransferConfig | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        if self.symmetrized and not np.array_equal(self.omega, self.omega.T):
            raise DataError("estimate flagged symmetrized but omega is not symmetric")


@dataclass
class DivergenceEstimate:
    """Estimated divergence matrix, either the initial or the refined stage."""

    delta: np.ndarray
    stage: str = "initial"

    def __post_init__(self):
        self.delta = np.asarray(self.delta, dtype=float)
        if not np.all(np.isfinite(self.delta)):
            raise DataError("divergence estimate must be finite")
        if self.stage not in ("initial", "refined"):
            raise DataError(f"unknown divergence stage {self.stage!r}")


def lambda_value(c_n, p, n):
    """Penalty shape 2 c sqrt(log p / n) used by steps 1 and 3."""
    if p < 2 or n < 1:
        raise ConfigError(f"lambda_value needs p >= 2 and n >= 1, got p={p}, n={n}")
    return 2.0 * c_n * np.sqrt(np.log(p) / n)


def split_indices(n, split_fraction, seed):
    """Seeded random partition into folds of size ceil(f*n) and the rest.

    Both folds are returned sorted. The split depends only on (n,
    split_fraction, seed), not on the data.
    """
    m = int(np.ceil(split_fraction * n))
    if m < 2 or n - m < 2:
        raise TooFewSamples(
            f"cannot split n={n} at fraction {split_fraction}: folds of {m} and {n - m}"
        )
    rng = np.random.default_rng(np.random.SeedSequence((seed, _TAG_SPLIT)))
    perm = rng.permutation(n)
    return np.sort(perm[:m]), np.sort(perm[m:])


def copula_clime(s_hat, lambda_cl, method="CC"):
    """Single-study CLIME: columns solve min ||w||_1 s.t. ||S w - e_j||_inf <= lambda."""
    s_hat = np.asarray(s_hat, dtype=float)
    omega = solve_matrix(s_hat, np.eye(s_hat.shape[0]), lambda_cl)
    return PrecisionEstimate(omega, False, method, diagnostics={"lambda_cl": float(lambda_cl)})


def estimate_delta_initial(s_hat, s_aux, lambda_delta):
    """Initial divergence estimate: columns of ||S d - (S_aux - S)||_inf <= lambda."""
    s_hat = np.asarray(s_hat, dtype=float)
    s_aux = np.asarray(s_aux, dtype=float)
    if s_aux.shape != s_hat.shape:
        raise DimensionMismatch(f"correlation shapes differ: {s_aux.shape} vs {s_hat.shape}")
    delta = solve_matrix(s_hat, s_aux - s_hat, lambda_delta)
    return DivergenceEstimate(delta, "initial")


def refine_delta(delta0, omega_cl, s_hat, s_aux, lambda_delta):
    """Debias the initial divergence estimate and soft-threshold at 2*lambda.

    The generic column program here has identity constraint matrix, so the
    exact solution is entrywise soft-thresholding of
    delta0 + omega_cl (S_aux - S - S delta0).
    """
    s_hat = np.asarray(s_hat, dtype=float)
    s_aux = np.asarray(s_aux, dtype=float)
    d0 = delta0.delta
    debiased = d0 + omega_cl.omega @ (s_aux - s_hat - s_hat @ d0)
    return DivergenceEstimate(soft_threshold(debiased, 2.0 * lambda_delta), "refined")


def trans_step3(s_aux, delta_refined, lambda_omega):
    """Transfer estimate: columns of ||S_aux w - (delta + I)^T e_j||_inf <= lambda."""
    s_aux = np.asarray(s_aux, dtype=float)
    target = (delta_refined.delta + np.eye(s_aux.shape[0])).T
    omega = solve_matrix(s_aux, target, lambda_omega)
    return PrecisionEstimate(omega, False, "CTC", diagnostics={"lambda_omega": float(lambda_omega)})


def aggregate(omega_cl, omega_tr, s_tilde_c):
    """Column-wise combination of the single-study and transfer estimates.

    For each column j, solve the 2x2 system W(j) v = (w1[j], w2[j]) where
    W(j) is the Gram matrix of the two candidate columns under the held-out
    correlation matrix, and combine the columns with weights v. Singular
    systems (condition number beyond AGGREGATE_COND_MAX) fall back to
    whichever single column scores better on the held-out quadratic
    0.5 w' S w - w[j], ties to the single-study column.
    """
    s = np.asarray(s_tilde_c, dtype=float)
    w1 = omega_cl.omega
    w2 = omega_tr.omega
    if w1.shape != w2.shape or w1.shape != s.shape:
        raise DimensionMismatch("aggregate inputs must share one square shape")
    p = s.shape[0]
    sw1 = s @ w1
    sw2 = s @ w2
    a = np.einsum("ij,ij->j", w1, sw1)
    b = np.einsum("ij,ij->j", w1, sw2)
    c = np.einsum("ij,ij->j", w2, sw2)
    diag1 = np.diagonal(w1)
    diag2 = np.diagonal(w2)
    out = np.empty((p, p))
    fallback_cols = []
    for j in range(p):
        wj = np.array([[a[j], b[j]], [b[j], c[j]]])
        # Symmetric 2x2: condition from the eigenvalues.
        half_tr = (a[j] + c[j]) / 2.0
        disc = np.sqrt(max(((a[j] - c[j]) / 2.0) ** 2 + b[j] ** 2, 0.0))
        eig_small = min(abs(half_tr - disc), abs(half_tr + disc))
        eig_big = max(abs(half_tr - disc), abs(half_tr + disc))
        singular = (
            not np.all(np.isfinite(wj))
            or eig_small <= 0
            or eig_big / eig_small > AGGREGATE_COND_MAX
        )
        if singular:
            fallback_cols.append(j)
            q1 = a[j] / 2.0 - w1[j, j]
            q2 = c[j] / 2.0 - w2[j, j]
            out[:, j] = w1[:, j] if q1 <= q2 else w2[:, j]
            continue
        rhs = np.array([diag1[j], diag2[j]])
        v = np.linalg.solve(wj, rhs)
        out[:, j] = w1[:, j] * v[0] + w2[:, j] * v[1]
    diags = dict(omega_tr.diagnostics)
    diags["aggregate_fallback_columns"] = fallback_cols
    return PrecisionEstimate(out, False, omega_tr.method, omega_tr.config, diags)


def symmetrize_min(omega):
    """Force symmetry by keeping the smaller-magnitude entry of each pair.

    Ties keep the upper-triangle entry. The diagonal is left unchanged.
    """
    a = np.asarray(omega, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DataError("symmetrize_min requires finite entries")
    p = a.shape[0]
    iu = np.triu_indices(p, 1)
    upper = a[iu]
    lower = a.T[iu]
    keep = np.where(np.abs(upper) <= np.abs(lower), upper, lower)
    out = np.zeros_like(a)
    out[iu] = keep
    out = out + out.T
    out[np.diag_indices(p)] = np.diagonal(a)
    return out


def _corr(data, use_rank):
    if use_rank:
        return rank_correlation_matrix(data).s_hat
    return pearson_correlation_matrix(data)


def _resolve_informative(method, cfg, n_studies):
    if method in POOLED_METHODS:
        return tuple(range(n_studies))
    picked = tuple(sorted(set(cfg.informative_set)))
    if not picked:
        raise EmptyInformativeSet(f"method {method} needs a non-empty informative set")
    if any(k < 0 or k >= n_studies for k in picked):
        raise ConfigError(f"informative indices {picked} out of range for {n_studies} studies")
    return picked


def run_pipeline(target, aux, cfg, method):
    """Fit one method end to end and return the symmetrized estimate.

    ``target`` is a StudyDataset, ``aux`` a list of StudyDataset (may be
    empty for C/CC). Lambdas not pinned in ``cfg`` follow the default shapes
    with the sizes actually used at each stage.
    """
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; choose from {METHODS}")
    if not isinstance(target, StudyDataset):
        target = StudyDataset(np.asarray(target, dtype=float))
    aux = list(aux or [])
    for ds in aux:
        if ds.p != target.p:
            raise DimensionMismatch(
                f"auxiliary study {ds.label!r} has p={ds.p}, target has p={target.p}"
            )
    use_rank = method in RANK_METHODS
    cfg = replace(cfg, use_rank_correlation=use_rank)
    p = target.p
    stage_seconds = {}
    tic = time.perf_counter

    if method in ("C", "CC"):
        t0 = tic()
        s_full = _corr(target, use_rank)
        stage_seconds["correlations"] = tic() - t0
        lam_cl = cfg.lambda_cl if cfg.lambda_cl is not None else lambda_value(cfg.c_n, p, target.n)
        t0 = tic()
        est = copula_clime(s_full, lam_cl, method)
        stage_seconds["step1"] = tic() - t0
        t0 = tic()
        omega = symmetrize_min(est.omega)
        stage_seconds["symmetrize"] = tic() - t0
        diags = {
            "lambda_cl": float(lam_cl),
            "n_used": int(target.n),
            "stage_seconds": stage_seconds,
        }
        return PrecisionEstimate(omega, True, method, cfg, diags)

    informative = _resolve_informative(method, cfg, len(aux))
    if not aux:
        raise EmptyInformativeSet(f"method {method} needs auxiliary studies")

    t0 = tic()
    fold_est, fold_agg = split_indices(target.n, cfg.split_fraction, cfg.seed)
    stage_seconds["split"] = tic() - t0

    t0 = tic()
    s_est = _corr(target.values[fold_est], use_rank)
    s_agg = _corr(target.values[fold_agg], use_rank)
    aux_mats = [_corr(aux[k], use_rank) for k in informative]
    aux_sizes = [aux[k].n for k in informative]
    s_aux = weighted_aux_correlation(aux_mats, aux_sizes)
    stage_seconds["correlations"] = tic() - t0

    n_est = len(fold_est)
    n_aux = int(sum(aux_sizes))
    lam_cl = cfg.lambda_cl if cfg.lambda_cl is not None else lambda_value(cfg.c_n, p, n_est)
    lam_delta = cfg.lambda_delta if cfg.lambda_delta is not None else lambda_value(1.0, p, n_est)
    lam_omega = cfg.lambda_omega if cfg.lambda_omega is not None else lambda_value(cfg.c_n, p, n_aux)

    t0 = tic()
    omega_cl = copula_clime(s_est, lam_cl, method)
    stage_seconds["step1"] = tic() - t0
    t0 = tic()
    delta0 = estimate_delta_initial(s_est, s_aux, lam_delta)
    delta_ref = refine_delta(delta0, omega_cl, s_est, s_aux, lam_delta)
    stage_seconds["step2"] = tic() - t0
    t0 = tic()
    omega_tr = trans_step3(s_aux, delta_ref, lam_omega)
    stage_seconds["step3"] = tic() - t0
    t0 = tic()
    combined = aggregate(omega_cl, omega_tr, s_agg)
    stage_seconds["aggregate"] = tic() - t0
    t0 = tic()
    omega = symmetrize_min(combined.omega)
    stage_seconds["symmetrize"] = tic() - t0

    diags = {
        "lambda_cl": float(lam_cl),
        "lambda_delta": float(lam_delta),
        "lambda_omega": float(lam_omega),
        "informative_set": list(informative),
        "n_estimation_fold": int(n_est),
        "n_aggregation_fold": int(len(fold_agg)),
        "n_aux_total": n_aux,
        "split_estimation": [int(i) for i in fold_est],
        "split_aggregation": [int(i) for i in fold_agg],
        "aggregate_fallback_columns": combined.diagnostics.get("aggregate_fallback_columns", []),
        "stage_seconds": stage_seconds,
    }
    return PrecisionEstimate(omega, True, method, cfg, diags)


def save_estimate(csv_path, json_path, estimate, extra=None):
    """Write an estimate as matrix CSV plus a JSON sidecar of its metadata."""
    save_matrix_csv(csv_path, estimate.omega)
    cfg = estimate.config
    sidecar = {
        "method": estimate.method,
        "symmetrized": bool(estimate.symmetrized),
        "p": int(estimate.omega.shape[0]),
        "seed": None if cfg is None else int(cfg.seed),
        "c_n": None if cfg is None else float(cfg.c_n),
        "split_fraction": None if cfg is None else float(cfg.split_fraction),
        "diagnostics": _jsonable(estimate.diagnostics),
    }
    if extra:
        sidecar.update(_jsonable(extra))
    with open(json_path, "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj
