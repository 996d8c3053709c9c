"""Continuous-time survival prediction.

Provides right-censored data handling, linear Cox regression with exact
partial likelihood, neural relative-risk models trained on sampled risk
sets (proportional and time-dependent), a discrete-time pmf baseline,
censoring-weighted evaluation metrics, closed-form simulation generators,
and K-means clustering of survival curves.
"""

from survtime.data import (
    RiskSetIndex,
    Standardizer,
    SurvivalDataset,
    apply_standardizer,
    build_risk_index,
    fit_standardizer,
    load_csv,
    split_dataset,
    write_csv,
)
from survtime.nets import AdamState, DenseNet, MLPSpec, adam_update, grad_check
from survtime.cox import (
    BaselineHazard,
    LinearCoxModel,
    baseline_hazard_from_cumulative,
    breslow_estimate,
    fit_newton_raphson,
    full_log_likelihood,
    mean_partial_loglik,
    neg_partial_loglik,
)
from survtime.neural_cox import (
    CCTrainConfig,
    RelativeRiskModel,
    SurvivalCurve,
    breslow_time_dependent,
    cc_loss,
    fit_cox_mlp_batchpl,
    fit_cox_mlp_cc,
    fit_cox_sgd_linear,
    fit_cox_time,
    load_model,
    predict_survival,
    predict_survival_matrix,
    risk_penalty,
    sample_controls,
    save_model,
)
from survtime.deephit import (
    DeepHitModel,
    DiscreteTimeGrid,
    deephit_loss,
    discretize,
    fit_deephit,
    pmf_to_survival,
)
from survtime.metrics import (
    StepFunction,
    binomial_ll_at,
    brier_score_at,
    c_td,
    integrate_score,
    kaplan_meier,
)
from survtime.simulate import (
    SimScenario,
    SimTruth,
    draw_dataset,
    invert_cumhaz,
    true_partial_loglik_terms,
    true_survival,
)
from survtime.cluster import CurveMatrix, KMeansResult, curves_to_matrix, kmeans_curves

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "BaselineHazard",
    "CCTrainConfig",
    "CurveMatrix",
    "DeepHitModel",
    "DenseNet",
    "DiscreteTimeGrid",
    "KMeansResult",
    "LinearCoxModel",
    "MLPSpec",
    "RelativeRiskModel",
    "RiskSetIndex",
    "SimScenario",
    "SimTruth",
    "Standardizer",
    "StepFunction",
    "SurvivalCurve",
    "SurvivalDataset",
    "adam_update",
    "apply_standardizer",
    "baseline_hazard_from_cumulative",
    "binomial_ll_at",
    "breslow_estimate",
    "breslow_time_dependent",
    "brier_score_at",
    "build_risk_index",
    "c_td",
    "cc_loss",
    "curves_to_matrix",
    "deephit_loss",
    "discretize",
    "draw_dataset",
    "fit_cox_mlp_batchpl",
    "fit_cox_mlp_cc",
    "fit_cox_sgd_linear",
    "fit_cox_time",
    "fit_deephit",
    "fit_newton_raphson",
    "fit_standardizer",
    "full_log_likelihood",
    "grad_check",
    "integrate_score",
    "invert_cumhaz",
    "kaplan_meier",
    "kmeans_curves",
    "load_csv",
    "load_model",
    "mean_partial_loglik",
    "neg_partial_loglik",
    "pmf_to_survival",
    "predict_survival",
    "predict_survival_matrix",
    "risk_penalty",
    "sample_controls",
    "save_model",
    "split_dataset",
    "true_partial_loglik_terms",
    "true_survival",
    "write_csv",
]
