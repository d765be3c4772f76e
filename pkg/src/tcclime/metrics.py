"""Evaluation: ROC curves, error norms, and the multi-cell benchmark runner.

A benchmark suite is a grid of cells (design x transform x r x number of
informative studies); each cell runs a fixed number of independent trials.
Every trial derives its own seed from the master seed and the cell/trial
indices, generates a fresh scenario, fits the requested methods, and reports
Frobenius errors plus a ROC curve sampled on a fixed false-positive-rate
grid. Trials are pure functions of their seed, so results are identical for
any degree of parallelism.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .exceptions import ConfigError, DegenerateTruth, DimensionMismatch, TcclimeError
from .estimators import METHODS, TransferConfig, run_pipeline, symmetrize_min
from .simulation import TransformSpec, simulate_scenario
from .tuning import CvGrid, fit_with_cv

__all__ = [
    "RocPoint",
    "TrialResult",
    "BenchmarkSuite",
    "BenchmarkResult",
    "roc_from_estimate",
    "roc_auc",
    "frobenius_error",
    "column_l2_errors",
    "step_tpr_at",
    "run_benchmark",
    "RESULTS_COLUMNS",
]

ZERO_EDGE_TOL = 1e-12

RESULTS_COLUMNS = ("design", "transform", "r", "n_info", "method", "trial", "frob")


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    tpr: float
    fpr: float


@dataclass
class TrialResult:
    """Per-trial evaluation of one method against the ground truth."""

    method: str
    frobenius_error: float
    column_l2_errors: np.ndarray
    roc: list
    seed: int


def _sym_and_truth(omega_hat, omega_true):
    omega_hat = np.asarray(omega_hat, dtype=float)
    omega_true = np.asarray(omega_true, dtype=float)
    if omega_hat.shape != omega_true.shape:
        raise DimensionMismatch(
            f"estimate shape {omega_hat.shape} vs truth shape {omega_true.shape}"
        )
    return symmetrize_min(omega_hat), omega_true


def roc_from_estimate(omega_hat, omega_true, n_thresholds=None):
    """Support-recovery ROC by sweeping a magnitude threshold.

    True edges are off-diagonal entries of the truth above ZERO_EDGE_TOL in
    magnitude. Declared edges at threshold t are estimate magnitudes >= t.
    The sweep runs over the estimate's own distinct magnitudes plus the two
    endpoints, so (0,0) and (1,1) always appear.
    """
    sym, truth = _sym_and_truth(omega_hat, omega_true)
    p = truth.shape[0]
    iu = np.triu_indices(p, 1)
    true_edge = np.abs(truth[iu]) > ZERO_EDGE_TOL
    n_true = int(true_edge.sum())
    n_non = int((~true_edge).sum())
    if n_true == 0 or n_non == 0:
        raise DegenerateTruth(
            f"reference graph has {n_true} edges and {n_non} non-edges; ROC undefined"
        )
    mags = np.abs(sym[iu])
    thresholds = np.unique(mags)[::-1]
    if n_thresholds is not None and thresholds.size > int(n_thresholds):
        pick = np.unique(np.round(np.linspace(0, thresholds.size - 1, int(n_thresholds))).astype(int))
        thresholds = thresholds[pick]
    points = [RocPoint(np.inf, 0.0, 0.0)]
    for t in thresholds:
        declared = mags >= t
        tp = int(np.sum(declared & true_edge))
        fp = int(np.sum(declared & ~true_edge))
        points.append(RocPoint(float(t), tp / n_true, fp / n_non))
    points.append(RocPoint(0.0, 1.0, 1.0))
    return points


def roc_auc(points):
    """Area under a ROC point list by trapezoidal rule over fpr."""
    fpr = np.array([pt.fpr for pt in points])
    tpr = np.array([pt.tpr for pt in points])
    order = np.argsort(fpr, kind="stable")
    return float(np.trapezoid(tpr[order], fpr[order]))


def frobenius_error(omega_hat, omega_true):
    """Frobenius norm of (symmetrized estimate - truth)."""
    sym, truth = _sym_and_truth(omega_hat, omega_true)
    return float(np.linalg.norm(sym - truth, "fro"))


def column_l2_errors(omega_hat, omega_true):
    """Per-column l2 errors of the symmetrized estimate."""
    sym, truth = _sym_and_truth(omega_hat, omega_true)
    return np.linalg.norm(sym - truth, axis=0)


def step_tpr_at(points, fpr_grid):
    """Best achieved tpr at each grid fpr (staircase, no interpolation)."""
    fpr = np.array([pt.fpr for pt in points])
    tpr = np.array([pt.tpr for pt in points])
    idx = np.searchsorted(fpr, fpr_grid, side="right") - 1
    idx = np.clip(idx, 0, fpr.size - 1)
    return np.maximum.accumulate(tpr)[idx]


@dataclass(frozen=True)
class BenchmarkSuite:
    """Grid definition plus shared sizes and tuning settings."""

    designs: tuple = ("banded",)
    transforms: tuple = ("gaussian_cdf",)
    r_values: tuple = (10.0,)
    n_informative: tuple = (3,)
    methods: tuple = METHODS
    trials: int = 100
    p: int = 100
    n: int = 200
    n_k: int = 200
    n_studies: int = 5
    seed: int = 0
    use_cv: bool = True
    c_n: float = 1.0
    grid: CvGrid = field(default_factory=CvGrid)
    split_fraction: float = 2.0 / 3.0
    eps: float = 1e-3
    fpr_grid_size: int = 101

    def __post_init__(self):
        object.__setattr__(self, "designs", tuple(self.designs))
        object.__setattr__(self, "transforms", tuple(self.transforms))
        object.__setattr__(self, "r_values", tuple(float(r) for r in self.r_values))
        object.__setattr__(self, "n_informative", tuple(int(m) for m in self.n_informative))
        object.__setattr__(self, "methods", tuple(self.methods))
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {METHODS}")
        if not self.methods:
            raise ConfigError("suite needs at least one method")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if any(m < 0 or m > self.n_studies for m in self.n_informative):
            raise ConfigError(
                f"n_informative values {self.n_informative} out of range for {self.n_studies} studies"
            )
        if self.fpr_grid_size < 2:
            raise ConfigError(f"fpr grid needs >= 2 points, got {self.fpr_grid_size}")

    def cells(self):
        return list(itertools.product(self.designs, self.transforms, self.r_values, self.n_informative))


@dataclass
class BenchmarkResult:
    """Everything a benchmark run produced, in deterministic row order."""

    rows: list            # dicts keyed by RESULTS_COLUMNS
    roc_rows: list        # dicts: cell columns + fpr + one column per method
    summary: list         # dicts: cell columns + method + mean + se + n_ok
    failures: list        # dicts: cell columns + trial + seed + error
    manifest: dict


def _trial_worker(args):
    """Run one (cell, trial) job. Must stay a module-level function (pickling)."""
    suite, cell, trial, seed = args
    design, transform_kind, r, n_info = cell
    try:
        scenario = simulate_scenario(
            design=design,
            p=suite.p,
            n=suite.n,
            n_k=suite.n_k,
            n_studies=suite.n_studies,
            informative=tuple(range(n_info)),
            r=r,
            transform=TransformSpec(kind=transform_kind),
            seed=seed,
            eps=suite.eps,
        )
        fpr_grid = np.linspace(0.0, 1.0, suite.fpr_grid_size)
        out = {}
        for method in suite.methods:
            cfg = TransferConfig(
                informative_set=scenario.informative,
                seed=seed,
                split_fraction=suite.split_fraction,
                eps=suite.eps,
                c_n=suite.c_n,
            )
            if suite.use_cv:
                estimate, _ = fit_with_cv(scenario.target, scenario.aux, cfg, suite.grid, method)
            else:
                estimate = run_pipeline(scenario.target, scenario.aux, cfg, method)
            frob = frobenius_error(estimate.omega, scenario.omega)
            roc = roc_from_estimate(estimate.omega, scenario.omega)
            out[method] = (frob, step_tpr_at(roc, fpr_grid))
        return ("ok", cell, trial, seed, out)
    except (TcclimeError, np.linalg.LinAlgError, ValueError) as exc:
        return ("error", cell, trial, seed, f"{type(exc).__name__}: {exc}")


def run_benchmark(suite, parallel=1):
    """Run every (cell, trial) job and aggregate into a BenchmarkResult.

    ``parallel`` sets the worker-process count; 1 runs inline. Output is
    bit-identical across parallelism degrees because jobs are seeded up
    front and reduced in a fixed order.
    """
    parallel = max(1, int(parallel))
    cells = suite.cells()
    jobs = []
    seeds = {}
    for ci, cell in enumerate(cells):
        for t in range(suite.trials):
            seed = int(np.random.SeedSequence((suite.seed, ci, t)).generate_state(1)[0])
            seeds[(ci, t)] = seed
            jobs.append((suite, cell, t, seed))

    if parallel == 1:
        raw = [_trial_worker(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            raw = list(pool.map(_trial_worker, jobs, chunksize=1))

    by_key = {}
    failures = []
    for status, cell, trial, seed, payload in raw:
        if status == "ok":
            by_key[(cell, trial)] = payload
        else:
            design, transform, r, n_info = cell
            failures.append(
                {
                    "design": design,
                    "transform": transform,
                    "r": r,
                    "n_info": n_info,
                    "trial": trial,
                    "seed": seed,
                    "error": payload,
                }
            )

    fpr_grid = np.linspace(0.0, 1.0, suite.fpr_grid_size)
    rows = []
    roc_rows = []
    summary = []
    for ci, cell in enumerate(cells):
        design, transform, r, n_info = cell
        frobs = {m: [] for m in suite.methods}
        tprs = {m: [] for m in suite.methods}
        for t in range(suite.trials):
            payload = by_key.get((cell, t))
            if payload is None:
                continue
            for method in suite.methods:
                frob, tpr_curve = payload[method]
                rows.append(
                    {
                        "design": design,
                        "transform": transform,
                        "r": r,
                        "n_info": n_info,
                        "method": method,
                        "trial": t,
                        "frob": frob,
                    }
                )
                frobs[method].append(frob)
                tprs[method].append(tpr_curve)
        for gi, f in enumerate(fpr_grid):
            row = {"design": design, "transform": transform, "r": r, "n_info": n_info, "fpr": float(f)}
            for method in suite.methods:
                stack = tprs[method]
                row[method] = float(np.mean([c[gi] for c in stack])) if stack else float("nan")
            roc_rows.append(row)
        for method in suite.methods:
            vals = np.array(frobs[method])
            n_ok = int(vals.size)
            mean = float(vals.mean()) if n_ok else float("nan")
            se = float(vals.std(ddof=1) / np.sqrt(n_ok)) if n_ok > 1 else float("nan")
            summary.append(
                {
                    "design": design,
                    "transform": transform,
                    "r": r,
                    "n_info": n_info,
                    "method": method,
                    "mean_frob": mean,
                    "se_frob": se,
                    "n_ok": n_ok,
                }
            )

    manifest = {
        "version": __version__,
        "suite": {
            "designs": list(suite.designs),
            "transforms": list(suite.transforms),
            "r_values": list(suite.r_values),
            "n_informative": list(suite.n_informative),
            "methods": list(suite.methods),
            "trials": suite.trials,
            "p": suite.p,
            "n": suite.n,
            "n_k": suite.n_k,
            "n_studies": suite.n_studies,
            "seed": suite.seed,
            "use_cv": suite.use_cv,
            "c_n": suite.c_n,
            "cv_candidates": list(suite.grid.candidates),
            "cv_folds": suite.grid.folds,
            "split_fraction": suite.split_fraction,
            "eps": suite.eps,
            "fpr_grid_size": suite.fpr_grid_size,
        },
        "derived_seeds": {f"{ci}:{t}": seeds[(ci, t)] for ci in range(len(cells)) for t in range(suite.trials)},
        "cells": [
            {"index": ci, "design": c[0], "transform": c[1], "r": c[2], "n_info": c[3]}
            for ci, c in enumerate(cells)
        ],
        "failures": failures,
        "summary": summary,
    }
    return BenchmarkResult(rows, roc_rows, summary, failures, manifest)
