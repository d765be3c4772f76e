"""Transfer-learning estimation of sparse precision matrices under the
Gaussian copula graphical model, with single-study and pooled baselines."""

__version__ = "0.1.0"

from .exceptions import (
    ConfigError,
    DataError,
    DegenerateTruth,
    DimensionMismatch,
    EmptyInformativeSet,
    Infeasible,
    LengthMismatch,
    NoConvergence,
    NonPositiveDiagonal,
    NotPositiveDefinite,
    NumericalError,
    NumericalFailure,
    QuadratureFailure,
    TcclimeError,
    TooFewSamples,
    ZeroVariance,
)
from .linalg import (
    cholesky,
    eigen_sym,
    invert_pd,
    load_matrix_csv,
    pd_project,
    rescale_to_correlation,
    save_matrix_csv,
)
from .rank_correlation import (
    RankCorrelation,
    StudyDataset,
    kendall_tau_pair,
    load_dataset_csv,
    pearson_correlation_matrix,
    rank_correlation_matrix,
    save_dataset_csv,
    weighted_aux_correlation,
)
from .solver import ColumnProblem, ColumnSolution, solve_column, solve_matrix, soft_threshold
from .estimators import (
    METHODS,
    DivergenceEstimate,
    PrecisionEstimate,
    TransferConfig,
    aggregate,
    copula_clime,
    estimate_delta_initial,
    refine_delta,
    run_pipeline,
    save_estimate,
    symmetrize_min,
    trans_step3,
)
from .simulation import (
    AuxDesign,
    PrecisionDesign,
    Scenario,
    TransformSpec,
    banded_precision,
    block_toeplitz_precision,
    design_truth,
    draw_divergence,
    gaussian_cdf_transform_value,
    informative_aux_covariance,
    noninformative_aux_covariance,
    sample_nonparanormal,
    simulate_scenario,
)
from .tuning import CvGrid, CvSelection, cv_select, fit_with_cv, nll_score
from .metrics import (
    BenchmarkResult,
    BenchmarkSuite,
    RocPoint,
    TrialResult,
    column_l2_errors,
    frobenius_error,
    roc_auc,
    roc_from_estimate,
    run_benchmark,
)

__all__ = [
    "__version__",
    # errors
    "TcclimeError",
    "ConfigError",
    "DataError",
    "NumericalError",
    "NotPositiveDefinite",
    "NoConvergence",
    "NonPositiveDiagonal",
    "LengthMismatch",
    "TooFewSamples",
    "ZeroVariance",
    "EmptyInformativeSet",
    "DimensionMismatch",
    "Infeasible",
    "NumericalFailure",
    "QuadratureFailure",
    "DegenerateTruth",
    # linalg
    "cholesky",
    "eigen_sym",
    "pd_project",
    "rescale_to_correlation",
    "invert_pd",
    "save_matrix_csv",
    "load_matrix_csv",
    # rank statistics
    "StudyDataset",
    "RankCorrelation",
    "kendall_tau_pair",
    "rank_correlation_matrix",
    "pearson_correlation_matrix",
    "weighted_aux_correlation",
    "save_dataset_csv",
    "load_dataset_csv",
    # solver
    "ColumnProblem",
    "ColumnSolution",
    "solve_column",
    "solve_matrix",
    "soft_threshold",
    # estimators
    "METHODS",
    "TransferConfig",
    "PrecisionEstimate",
    "DivergenceEstimate",
    "copula_clime",
    "estimate_delta_initial",
    "refine_delta",
    "trans_step3",
    "aggregate",
    "symmetrize_min",
    "run_pipeline",
    "save_estimate",
    # simulation
    "PrecisionDesign",
    "TransformSpec",
    "AuxDesign",
    "Scenario",
    "banded_precision",
    "block_toeplitz_precision",
    "design_truth",
    "draw_divergence",
    "informative_aux_covariance",
    "noninformative_aux_covariance",
    "gaussian_cdf_transform_value",
    "sample_nonparanormal",
    "simulate_scenario",
    # tuning
    "CvGrid",
    "CvSelection",
    "nll_score",
    "cv_select",
    "fit_with_cv",
    # metrics
    "RocPoint",
    "TrialResult",
    "BenchmarkSuite",
    "BenchmarkResult",
    "roc_from_estimate",
    "roc_auc",
    "frobenius_error",
    "column_l2_errors",
    "run_benchmark",
]
