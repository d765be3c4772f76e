"""Batch command-line surface: simulate | estimate | benchmark | roc.

Options resolve in three layers: built-in defaults, then a plain key=value
config file (``--config``, ``#`` comments allowed), then explicit flags.
Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .exceptions import ConfigError, DataError, NumericalError
from .estimators import METHODS, TransferConfig, run_pipeline, save_estimate
from .linalg import load_matrix_csv, save_matrix_csv
from .metrics import BenchmarkSuite, RESULTS_COLUMNS, roc_from_estimate, run_benchmark
from .rank_correlation import load_dataset_csv, save_dataset_csv
from .simulation import TransformSpec, divergence_norms, simulate_scenario
from .tuning import CvGrid, fit_with_cv

ENV_PARALLEL = "TCC_THREADS"

_INT_KEYS = {"p", "n", "n_k", "K", "trials", "seed", "parallel", "folds", "fpr_grid", "thresholds"}
_FLOAT_KEYS = {"r", "c_n", "split_fraction", "eps", "mu_g0", "sigma_g0"}
_BOOL_KEYS = {"cv", "cv_trace"}
_LIST_INT_KEYS = {"informative", "n_info"}
_LIST_FLOAT_KEYS = {"grid", "r_values"}
_LIST_STR_KEYS = {"methods", "designs", "transforms", "aux"}
_STR_KEYS = {"design", "transform", "out", "method", "target", "truth", "estimate"}
_ALL_KEYS = (
    _INT_KEYS | _FLOAT_KEYS | _BOOL_KEYS | _LIST_INT_KEYS | _LIST_FLOAT_KEYS | _LIST_STR_KEYS | _STR_KEYS
)


def _parse_bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _split_list(text):
    return [tok.strip() for tok in text.split(",") if tok.strip() != ""]


def _coerce(key, text):
    try:
        if key in _INT_KEYS:
            return int(text)
        if key in _FLOAT_KEYS:
            return float(text)
        if key in _BOOL_KEYS:
            return _parse_bool(text)
        if key in _LIST_INT_KEYS:
            return tuple(int(t) for t in _split_list(text))
        if key in _LIST_FLOAT_KEYS:
            return tuple(float(t) for t in _split_list(text))
        if key in _LIST_STR_KEYS:
            return tuple(_split_list(text))
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot parse {text!r}") from None
    return text


def read_config_file(path):
    """Parse a key=value config file into a typed dict."""
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, text = line.split("=", 1)
        key = key.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = _coerce(key, text.strip())
    return values


def _resolve(args, file_cfg, key, default):
    """Flag beats config file beats default; flags parse as None when absent."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in file_cfg:
        return file_cfg[key]
    return default


def _resolve_parallel(args, file_cfg):
    val = _resolve(args, file_cfg, "parallel", None)
    if val is None:
        env = os.environ.get(ENV_PARALLEL)
        if env:
            try:
                val = int(env)
            except ValueError:
                raise ConfigError(f"{ENV_PARALLEL} must be an integer, got {env!r}") from None
    val = 1 if val is None else int(val)
    if val < 1:
        raise ConfigError(f"parallel degree must be >= 1, got {val}")
    return val


def _transform_spec(args, file_cfg):
    return TransformSpec(
        kind=_resolve(args, file_cfg, "transform", "gaussian_cdf"),
        mu_g0=_resolve(args, file_cfg, "mu_g0", 0.05),
        sigma_g0=_resolve(args, file_cfg, "sigma_g0", 0.4),
    )


def _float_cell(v):
    return format(float(v), ".17g")


def cmd_simulate(args):
    file_cfg = read_config_file(args.config) if args.config else {}
    out_dir = Path(_resolve(args, file_cfg, "out", "."))
    scenario = simulate_scenario(
        design=_resolve(args, file_cfg, "design", "banded"),
        p=_resolve(args, file_cfg, "p", 100),
        n=_resolve(args, file_cfg, "n", 200),
        n_k=_resolve(args, file_cfg, "n_k", 200),
        n_studies=_resolve(args, file_cfg, "K", 5),
        informative=_resolve(args, file_cfg, "informative", (0, 1, 2)),
        r=_resolve(args, file_cfg, "r", 10.0),
        transform=_transform_spec(args, file_cfg),
        seed=_resolve(args, file_cfg, "seed", 0),
        eps=_resolve(args, file_cfg, "eps", 1e-3),
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {"target": "target.csv", "truth_omega": "truth_omega.csv", "truth_sigma": "truth_sigma.csv"}
    save_dataset_csv(out_dir / files["target"], scenario.target)
    save_matrix_csv(out_dir / files["truth_omega"], scenario.omega)
    save_matrix_csv(out_dir / files["truth_sigma"], scenario.sigma)
    aux_files = []
    aux_sigma_files = []
    study_norms = []
    for k in range(scenario.n_studies):
        data_name = f"aux_{k}.csv"
        sigma_name = f"aux_sigma_{k}.csv"
        save_dataset_csv(out_dir / data_name, scenario.aux[k])
        save_matrix_csv(out_dir / sigma_name, scenario.aux_sigmas[k])
        aux_files.append(data_name)
        aux_sigma_files.append(sigma_name)
        study_norms.append(divergence_norms(scenario.aux_deltas[k]))
    manifest = {
        "design": scenario.design,
        "transform": {
            "kind": scenario.transform.kind,
            "mu_g0": scenario.transform.mu_g0,
            "sigma_g0": scenario.transform.sigma_g0,
        },
        "p": scenario.p,
        "n": scenario.n,
        "n_k": scenario.n_k,
        "K": scenario.n_studies,
        "informative": list(scenario.informative),
        "r": scenario.r,
        "seed": scenario.seed,
        "files": {**files, "aux": aux_files, "aux_sigma": aux_sigma_files},
        "divergence_norms": study_norms,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote scenario (p={scenario.p}, n={scenario.n}, K={scenario.n_studies}) to {out_dir}")
    return 0


def cmd_estimate(args):
    file_cfg = read_config_file(args.config) if args.config else {}
    method = _resolve(args, file_cfg, "method", None)
    if method is None:
        raise ConfigError("estimate needs --method")
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; choose from {METHODS}")
    target_path = _resolve(args, file_cfg, "target", None)
    if target_path is None:
        raise ConfigError("estimate needs --target")
    aux_paths = list(args.aux or file_cfg.get("aux", ()))
    out_dir = Path(_resolve(args, file_cfg, "out", "."))
    use_cv = _resolve(args, file_cfg, "cv", True)
    target = load_dataset_csv(target_path, kind="target")
    aux = [load_dataset_csv(p, kind="auxiliary") for p in aux_paths]
    cfg = TransferConfig(
        informative_set=_resolve(args, file_cfg, "informative", tuple(range(len(aux)))),
        lambda_cl=args.lambda_cl,
        lambda_delta=args.lambda_delta,
        lambda_omega=args.lambda_omega,
        c_n=_resolve(args, file_cfg, "c_n", 1.0),
        split_fraction=_resolve(args, file_cfg, "split_fraction", 2.0 / 3.0),
        seed=_resolve(args, file_cfg, "seed", 0),
        eps=_resolve(args, file_cfg, "eps", 1e-3),
    )
    grid = CvGrid(
        candidates=_resolve(args, file_cfg, "grid", CvGrid().candidates),
        folds=_resolve(args, file_cfg, "folds", 5),
    )
    t0 = time.perf_counter()
    selection = None
    if use_cv:
        estimate, selection = fit_with_cv(target, aux, cfg, grid, method)
    else:
        estimate = run_pipeline(target, aux, cfg, method)
    wall = time.perf_counter() - t0
    out_dir.mkdir(parents=True, exist_ok=True)
    extra = {
        "target_file": str(target_path),
        "aux_files": [str(p) for p in aux_paths],
        "wall_seconds": wall,
        "cv_used": bool(use_cv),
    }
    save_estimate(out_dir / "estimate.csv", out_dir / "estimate.json", estimate, extra)
    cv_trace = _resolve(args, file_cfg, "cv_trace", False)
    if cv_trace and selection is not None:
        with open(out_dir / "cv_trace.csv", "w") as fh:
            folds = selection.fold_scores.shape[0]
            fh.write("candidate," + ",".join(f"fold_{i + 1}" for i in range(folds)) + ",mean\n")
            for row in selection.trace_rows():
                fh.write(",".join(_float_cell(v) for v in row) + "\n")
    chosen = selection.best_c if selection is not None else cfg.c_n
    print(f"{method}: wrote estimate (p={target.p}, c_n={chosen:g}) to {out_dir}")
    return 0


def _write_results_csv(path, rows):
    with open(path, "w") as fh:
        fh.write(",".join(RESULTS_COLUMNS) + "\n")
        for row in rows:
            fh.write(
                ",".join(
                    [
                        row["design"],
                        row["transform"],
                        _float_cell(row["r"]),
                        str(row["n_info"]),
                        row["method"],
                        str(row["trial"]),
                        _float_cell(row["frob"]),
                    ]
                )
                + "\n"
            )


def _write_roc_csv(path, roc_rows, methods):
    header = ["design", "transform", "r", "n_info", "fpr", *methods]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in roc_rows:
            cells = [
                row["design"],
                row["transform"],
                _float_cell(row["r"]),
                str(row["n_info"]),
                _float_cell(row["fpr"]),
            ]
            cells += [_float_cell(row[m]) for m in methods]
            fh.write(",".join(cells) + "\n")


def cmd_benchmark(args):
    file_cfg = read_config_file(args.config) if args.config else {}
    out_dir = Path(_resolve(args, file_cfg, "out", "."))
    single_design = _resolve(args, file_cfg, "design", "banded")
    single_transform = _resolve(args, file_cfg, "transform", "gaussian_cdf")
    single_r = _resolve(args, file_cfg, "r", 10.0)
    informative = _resolve(args, file_cfg, "informative", (0, 1, 2))
    suite = BenchmarkSuite(
        designs=_resolve(args, file_cfg, "designs", (single_design,)),
        transforms=_resolve(args, file_cfg, "transforms", (single_transform,)),
        r_values=_resolve(args, file_cfg, "r_values", (single_r,)),
        n_informative=_resolve(args, file_cfg, "n_info", (len(informative),)),
        methods=_resolve(args, file_cfg, "methods", METHODS),
        trials=_resolve(args, file_cfg, "trials", 100),
        p=_resolve(args, file_cfg, "p", 100),
        n=_resolve(args, file_cfg, "n", 200),
        n_k=_resolve(args, file_cfg, "n_k", 200),
        n_studies=_resolve(args, file_cfg, "K", 5),
        seed=_resolve(args, file_cfg, "seed", 0),
        use_cv=_resolve(args, file_cfg, "cv", True),
        c_n=_resolve(args, file_cfg, "c_n", 1.0),
        grid=CvGrid(
            candidates=_resolve(args, file_cfg, "grid", CvGrid().candidates),
            folds=_resolve(args, file_cfg, "folds", 5),
        ),
        split_fraction=_resolve(args, file_cfg, "split_fraction", 2.0 / 3.0),
        eps=_resolve(args, file_cfg, "eps", 1e-3),
        fpr_grid_size=_resolve(args, file_cfg, "fpr_grid", 101),
    )
    parallel = _resolve_parallel(args, file_cfg)
    result = run_benchmark(suite, parallel)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_results_csv(out_dir / "results.csv", result.rows)
    _write_roc_csv(out_dir / "roc_mean.csv", result.roc_rows, suite.methods)
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(result.manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    n_fail = len(result.failures)
    print(
        f"benchmark done: {len(result.rows)} result rows, {n_fail} failed trials, wrote {out_dir}",
        file=sys.stdout,
    )
    return 0


def cmd_roc(args):
    file_cfg = read_config_file(args.config) if args.config else {}
    est_path = _resolve(args, file_cfg, "estimate", None)
    truth_path = _resolve(args, file_cfg, "truth", None)
    if est_path is None or truth_path is None:
        raise ConfigError("roc needs --estimate and --truth")
    out_path = Path(_resolve(args, file_cfg, "out", "roc.csv"))
    estimate = load_matrix_csv(est_path)
    truth = load_matrix_csv(truth_path)
    points = roc_from_estimate(estimate, truth, _resolve(args, file_cfg, "thresholds", None))
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w") as fh:
        fh.write("threshold,tpr,fpr\n")
        for pt in points:
            fh.write(f"{_float_cell(pt.threshold)},{_float_cell(pt.tpr)},{_float_cell(pt.fpr)}\n")
    print(f"wrote {len(points)} ROC points to {out_path}")
    return 0


def _add_common(sub):
    sub.add_argument("--config", help="key=value config file; flags override it")
    sub.add_argument("--out", help="output directory (default: current directory)")
    sub.add_argument("--seed", type=int, help="master seed")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tcclime",
        description="Transfer-learning precision-matrix estimation for Gaussian copula models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic multi-study scenario")
    _add_common(sim)
    sim.add_argument("--design", choices=("banded", "block_toeplitz"))
    sim.add_argument("--transform", choices=("gaussian_cdf", "exponential", "linear"))
    sim.add_argument("--p", type=int)
    sim.add_argument("--n", type=int)
    sim.add_argument("--n-k", dest="n_k", type=int)
    sim.add_argument("--studies", dest="K", type=int, help="number of auxiliary studies")
    sim.add_argument("--informative", type=lambda s: tuple(int(t) for t in _split_list(s)))
    sim.add_argument("--r", type=float)
    sim.add_argument("--eps", type=float)
    sim.add_argument("--mu-g0", dest="mu_g0", type=float)
    sim.add_argument("--sigma-g0", dest="sigma_g0", type=float)
    sim.set_defaults(func=cmd_simulate)

    est = sub.add_parser("estimate", help="fit one method on CSV datasets")
    _add_common(est)
    est.add_argument("--method", choices=METHODS)
    est.add_argument("--target", help="target dataset CSV")
    est.add_argument("--aux", action="append", help="auxiliary dataset CSV (repeatable)")
    est.add_argument("--informative", type=lambda s: tuple(int(t) for t in _split_list(s)))
    est.add_argument("--c-n", dest="c_n", type=float)
    est.add_argument("--cv", dest="cv", action=argparse.BooleanOptionalAction)
    est.add_argument("--cv-trace", dest="cv_trace", action=argparse.BooleanOptionalAction)
    est.add_argument("--grid", type=lambda s: tuple(float(t) for t in _split_list(s)))
    est.add_argument("--folds", type=int)
    est.add_argument("--split-fraction", dest="split_fraction", type=float)
    est.add_argument("--eps", type=float)
    est.add_argument("--lambda-cl", dest="lambda_cl", type=float)
    est.add_argument("--lambda-delta", dest="lambda_delta", type=float)
    est.add_argument("--lambda-omega", dest="lambda_omega", type=float)
    est.set_defaults(func=cmd_estimate)

    ben = sub.add_parser("benchmark", help="run a simulation benchmark suite")
    _add_common(ben)
    ben.add_argument("--designs", type=lambda s: tuple(_split_list(s)))
    ben.add_argument("--transforms", type=lambda s: tuple(_split_list(s)))
    ben.add_argument("--r-values", dest="r_values", type=lambda s: tuple(float(t) for t in _split_list(s)))
    ben.add_argument("--n-info", dest="n_info", type=lambda s: tuple(int(t) for t in _split_list(s)))
    ben.add_argument("--methods", type=lambda s: tuple(_split_list(s)))
    ben.add_argument("--trials", type=int)
    ben.add_argument("--p", type=int)
    ben.add_argument("--n", type=int)
    ben.add_argument("--n-k", dest="n_k", type=int)
    ben.add_argument("--studies", dest="K", type=int)
    ben.add_argument("--cv", dest="cv", action=argparse.BooleanOptionalAction)
    ben.add_argument("--c-n", dest="c_n", type=float)
    ben.add_argument("--grid", type=lambda s: tuple(float(t) for t in _split_list(s)))
    ben.add_argument("--folds", type=int)
    ben.add_argument("--split-fraction", dest="split_fraction", type=float)
    ben.add_argument("--eps", type=float)
    ben.add_argument("--fpr-grid", dest="fpr_grid", type=int)
    ben.add_argument("--parallel", type=int, help=f"worker processes (env {ENV_PARALLEL} as fallback)")
    ben.set_defaults(func=cmd_benchmark)

    roc = sub.add_parser("roc", help="ROC points of an estimate CSV against a truth CSV")
    _add_common(roc)
    roc.add_argument("--estimate", help="estimate matrix CSV")
    roc.add_argument("--truth", help="ground-truth matrix CSV")
    roc.add_argument("--thresholds", type=int, help="cap on distinct thresholds")
    roc.set_defaults(func=cmd_roc)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
