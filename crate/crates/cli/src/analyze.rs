//! Gauge-series analysis: pool lagged rows across gap-free segments, fit the
//! slopes once by rank dispersion, and report residual tail risk plus the
//! dates whose residuals exceed the flagging VaR.

use crate::error::{CliError, CliResult};
use crate::ingest::{transform_log1p, DailyRecord};
use arrisk::{
    build_lagged_design, cvar_min_form, fit_r_estimator, residuals, var_hat, LaggedDesign,
    RiskReport, Series, SolverOptions, StepScore,
};
use chrono::NaiveDate;

/// Shortest segment that makes the fit worthwhile: more rows than p + 30.
const MIN_ANCHOR_LEN: usize = 30;

#[derive(Debug, Clone)]
pub struct AnalysisOutcome {
    pub label: String,
    pub period_start: NaiveDate,
    pub period_end: NaiveDate,
    pub p: usize,
    pub n_eff: usize,
    pub lambda: f64,
    pub phi_hat: Vec<f64>,
    pub dispersion: f64,
    pub estimates: Vec<RiskReport>,
    pub flag_level: f64,
    pub flag_var: f64,
    /// Dates whose raw residual strictly exceeds the flagging VaR.
    pub exceedances: Vec<(NaiveDate, f64)>,
    pub segments_used: usize,
}

pub fn analyze(
    records: &[DailyRecord],
    label: &str,
    p: usize,
    lambda: f64,
    alphas: &[f64],
    flag_level: f64,
) -> CliResult<AnalysisOutcome> {
    if p == 0 {
        return Err(CliError::usage("autoregression order must be at least 1"));
    }
    if alphas.is_empty() {
        return Err(CliError::usage("need at least one risk level"));
    }
    if !(flag_level > 0.0 && flag_level < 1.0) {
        return Err(CliError::usage(format!(
            "flag level must lie in (0,1), got {flag_level}"
        )));
    }
    let (Some(first), Some(last)) = (records.first(), records.last()) else {
        return Err(CliError::data("no records to analyze"));
    };

    let segments = transform_log1p(records)?;
    if !segments.iter().any(|s| s.len() > p + MIN_ANCHOR_LEN) {
        return Err(CliError::data(format!(
            "no gap-free stretch longer than {} days; cannot fit an AR({p})",
            p + MIN_ANCHOR_LEN
        )));
    }

    // One design per usable segment; rows pool without any window spanning
    // a gap. Response dates stay aligned with the pooled rows.
    let mut designs = Vec::new();
    let mut row_dates: Vec<NaiveDate> = Vec::new();
    let mut segments_used = 0usize;
    for segment in &segments {
        if segment.len() <= p {
            continue;
        }
        let series = Series::new(segment.values.clone()).expect("segment values are finite");
        designs.push(build_lagged_design(&series, p, false)?);
        row_dates.extend_from_slice(&segment.dates[p..]);
        segments_used += 1;
    }
    let pooled = LaggedDesign::concat(&designs)?;
    debug_assert_eq!(pooled.n_eff(), row_dates.len());

    let score = StepScore::new(lambda)?;
    let fit = fit_r_estimator(&pooled, &score, &SolverOptions::default())?;
    let resid = residuals(&pooled, &fit.slopes, None)?;

    let estimates = alphas
        .iter()
        .map(|&alpha| cvar_min_form(&resid, alpha))
        .collect::<arrisk::Result<Vec<_>>>()?;
    let flag_var = var_hat(&resid, flag_level)?;
    let exceedances: Vec<(NaiveDate, f64)> = row_dates
        .iter()
        .zip(&resid)
        .filter(|(_, &r)| r > flag_var)
        .map(|(&d, &r)| (d, r))
        .collect();

    Ok(AnalysisOutcome {
        label: label.to_string(),
        period_start: first.date,
        period_end: last.date,
        p,
        n_eff: pooled.n_eff(),
        lambda,
        phi_hat: fit.slopes.clone(),
        dispersion: fit.dispersion_at_min,
        estimates,
        flag_level,
        flag_var,
        exceedances,
        segments_used,
    })
}
