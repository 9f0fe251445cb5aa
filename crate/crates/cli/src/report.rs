//! JSON report bodies. Every report self-identifies with `schema_version`
//! and `kind`; the matching schemas ship in the `schemas/` directory and the
//! integration tests validate emitted reports against them.

use crate::analyze::AnalysisOutcome;
use arrisk::{GridResults, RiskReport};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct FitReportJson {
    pub schema_version: u32,
    pub kind: &'static str,
    pub input: String,
    pub method: &'static str,
    pub p: usize,
    pub n_eff: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub slopes: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intercept: Option<f64>,
    pub objective: f64,
}

#[derive(Debug, Serialize)]
pub struct RiskLineJson {
    pub alpha: f64,
    pub var_hat: f64,
    pub cvar_hat: f64,
    pub xi_star: f64,
    pub method: &'static str,
    pub n_eff: usize,
}

impl From<&RiskReport> for RiskLineJson {
    fn from(r: &RiskReport) -> Self {
        RiskLineJson {
            alpha: r.alpha,
            var_hat: r.var_hat,
            cvar_hat: r.cvar_hat,
            xi_star: r.xi_star,
            method: r.method.name(),
            n_eff: r.n_eff,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RiskReportJson {
    pub schema_version: u32,
    pub kind: &'static str,
    pub input: String,
    pub n_eff: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slopes: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub estimates: Vec<RiskLineJson>,
}

#[derive(Debug, Serialize)]
pub struct PeriodJson {
    pub start: String,
    pub end: String,
}

#[derive(Debug, Serialize)]
pub struct AnalysisReportJson {
    pub schema_version: u32,
    pub kind: &'static str,
    pub label: String,
    pub period: PeriodJson,
    pub p: usize,
    pub n_eff: usize,
    pub lambda: f64,
    pub phi_hat: Vec<f64>,
    pub dispersion: f64,
    pub estimates: Vec<RiskLineJson>,
    pub flag_level: f64,
    pub flag_var_hat: f64,
    pub exceedance_count: usize,
    pub exceedance_dates: Vec<String>,
    pub segments_used: usize,
    pub value_warnings: usize,
}

impl AnalysisReportJson {
    pub fn build(outcome: &AnalysisOutcome, value_warnings: usize) -> Self {
        AnalysisReportJson {
            schema_version: SCHEMA_VERSION,
            kind: "analysis",
            label: outcome.label.clone(),
            period: PeriodJson {
                start: outcome.period_start.to_string(),
                end: outcome.period_end.to_string(),
            },
            p: outcome.p,
            n_eff: outcome.n_eff,
            lambda: outcome.lambda,
            phi_hat: outcome.phi_hat.clone(),
            dispersion: outcome.dispersion,
            estimates: outcome.estimates.iter().map(RiskLineJson::from).collect(),
            flag_level: outcome.flag_level,
            flag_var_hat: outcome.flag_var,
            exceedance_count: outcome.exceedances.len(),
            exceedance_dates: outcome
                .exceedances
                .iter()
                .map(|(d, _)| d.to_string())
                .collect(),
            segments_used: outcome.segments_used,
            value_warnings,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BenchRowJson {
    pub model: String,
    pub scenario: String,
    pub n: usize,
    pub alpha: f64,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bias_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bias_oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse_oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub replications_used: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct BenchReportJson {
    pub schema_version: u32,
    pub kind: &'static str,
    pub master_seed: u64,
    pub replications: usize,
    pub rows: Vec<BenchRowJson>,
}

impl BenchReportJson {
    pub fn build(results: &GridResults) -> Self {
        let rows = results
            .rows
            .iter()
            .map(|row| match &row.outcome {
                Ok(c) => BenchRowJson {
                    model: row.model.clone(),
                    scenario: row.scenario.name().to_string(),
                    n: row.n,
                    alpha: row.alpha,
                    ok: true,
                    bias_r: Some(c.bias_r),
                    rmse_r: Some(c.rmse_r),
                    bias_oracle: Some(c.bias_oracle),
                    rmse_oracle: Some(c.rmse_oracle),
                    target: Some(c.target),
                    replications_used: c.replications_used,
                    failures: c.failures,
                    error: None,
                },
                Err(e) => BenchRowJson {
                    model: row.model.clone(),
                    scenario: row.scenario.name().to_string(),
                    n: row.n,
                    alpha: row.alpha,
                    ok: false,
                    bias_r: None,
                    rmse_r: None,
                    bias_oracle: None,
                    rmse_oracle: None,
                    target: None,
                    replications_used: 0,
                    failures: results.replications,
                    error: Some(e.clone()),
                },
            })
            .collect();
        BenchReportJson {
            schema_version: SCHEMA_VERSION,
            kind: "bench",
            master_seed: results.master_seed,
            replications: results.replications,
            rows,
        }
    }
}

/// Pretty JSON with a trailing newline, ready for an atomic write.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text.into_bytes()
}
