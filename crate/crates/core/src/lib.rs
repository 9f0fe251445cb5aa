//! Rank-based estimation of autoregressive models and tail risk of their
//! innovations.
//!
//! The pipeline: fit AR slopes by minimizing a rank dispersion (robust to
//! heavy-tailed noise, needs no centering), take the raw residuals as a proxy
//! innovation sample, then estimate VaR / CVaR from that sample. A quantile
//! variant of the autoregression fit and a Monte Carlo harness for validating
//! both routes live alongside.

pub mod ar;
pub mod arq;
pub mod error;
pub mod rank;
pub mod risk;
pub mod scenario;
pub mod seed;
pub mod sim;

mod linalg;
mod util;

pub use ar::{
    build_lagged_design, check_stationary, design_covariance, residuals, simulate_ar, ARModel,
    LaggedDesign, Series, StationarityCheck,
};
pub use arq::{check_loss, fit_ar_quantile, ARQuantile, QuantileOptions};
pub use error::{Error, Result};
pub use rank::{
    fit_r_estimator, jaeckel_dispersion, ranks, residual_location_quantile, score_eval, RFit,
    SolverOptions, SolverTrace, StepScore,
};
pub use risk::{
    cvar_min_form, cvar_tail_average, cvar_target, estimate_innovation_risk, tail_average_report,
    var_hat, CvarTarget, InnovationRiskReport, RiskMethod, RiskReport,
};
pub use scenario::{sample_innovations, InnovationScenario};
pub use sim::{
    run_cell, run_grid, CellResult, ExperimentGrid, GridResults, GridRow, ModelSpec,
};
