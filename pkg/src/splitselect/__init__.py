"""FDR-controlled feature selection via data splitting and multiple subsampling."""

from .datagen import (
    Dataset,
    Scenario,
    gen_covariance,
    gen_response,
    gen_weights,
    make_dataset,
    replication_seeds,
    sample_design,
)
from .estimators import (
    ConvergenceWarning,
    FitResult,
    RankError,
    get_estimator,
    importance,
    lasso_cv,
    lasso_fit,
    lasso_path,
    max_penalty,
    ols_fit,
    ols_pvalues,
    penalty_grid,
)
from .metrics import (
    ReplicationSummary,
    ScenarioReport,
    UndefinedPowerError,
    aggregate,
    fdp,
    power,
)
from .preprocess import (
    DegenerateColumnError,
    SplitPair,
    SubsampleSet,
    split_half,
    standardize,
    subsample,
)
from .selection import (
    DegenerateImportanceError,
    EstimatorFailure,
    ImportancePair,
    SelectionOutcome,
    TauRule,
    bh_select,
    compute_fi,
    compute_threshold,
    dss_select,
    estimate_tau_elbow,
    estimate_tau_oracle,
    mss_select,
    resolve_tau,
    ss_select,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceWarning",
    "Dataset",
    "DegenerateColumnError",
    "DegenerateImportanceError",
    "EstimatorFailure",
    "FitResult",
    "ImportancePair",
    "RankError",
    "ReplicationSummary",
    "Scenario",
    "ScenarioReport",
    "SelectionOutcome",
    "SplitPair",
    "SubsampleSet",
    "TauRule",
    "UndefinedPowerError",
    "aggregate",
    "bh_select",
    "compute_fi",
    "compute_threshold",
    "dss_select",
    "estimate_tau_elbow",
    "estimate_tau_oracle",
    "fdp",
    "gen_covariance",
    "gen_response",
    "gen_weights",
    "get_estimator",
    "importance",
    "lasso_cv",
    "lasso_fit",
    "lasso_path",
    "make_dataset",
    "max_penalty",
    "mss_select",
    "ols_fit",
    "ols_pvalues",
    "penalty_grid",
    "power",
    "replication_seeds",
    "resolve_tau",
    "sample_design",
    "split_half",
    "ss_select",
    "standardize",
    "subsample",
]
