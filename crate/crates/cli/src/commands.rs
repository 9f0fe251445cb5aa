//! Subcommand execution. Each command resolves its parameters (flag, then
//! config key, then default), does the work, and writes artifacts through
//! the atomic writer, printing one `wrote <path>` line per artifact.

use crate::analyze::analyze;
use crate::args::{
    AnalyzeArgs, BenchArgs, FitArgs, FitMethod, OutputFormat, RiskArgs, SimulateArgs,
};
use crate::config::FileConfig;
use crate::error::{CliError, CliResult};
use crate::ingest::parse_daily_csv;
use crate::outio::{atomic_write, resolve_out};
use crate::report::{
    to_json_bytes, AnalysisReportJson, BenchReportJson, FitReportJson, RiskLineJson,
    RiskReportJson, SCHEMA_VERSION,
};
use arrisk::{
    build_lagged_design, cvar_min_form, fit_ar_quantile, fit_r_estimator, residuals, run_grid,
    simulate_ar, ARModel, ExperimentGrid, InnovationScenario, QuantileOptions, Series,
    SolverOptions, StepScore,
};
use std::path::{Path, PathBuf};

pub struct Context {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: Option<OutputFormat>,
    pub cfg: FileConfig,
}

const DEFAULT_LAMBDA: f64 = 0.5;
const DEFAULT_ALPHAS: [f64; 2] = [0.95, 0.99];
const DEFAULT_BURN_IN: usize = 500;

impl Context {
    fn format_or(&self, default: OutputFormat, allowed: &[OutputFormat]) -> CliResult<OutputFormat> {
        let chosen = self.format.unwrap_or(default);
        if allowed.contains(&chosen) {
            Ok(chosen)
        } else {
            Err(CliError::usage(format!(
                "format {} is not supported here; choose one of {}",
                chosen.name(),
                allowed
                    .iter()
                    .map(|f| f.name())
                    .collect::<Vec<_>>()
                    .join(", ")
            )))
        }
    }
}

fn emit(path: &Path, bytes: &[u8]) -> CliResult<()> {
    atomic_write(path, bytes)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Strict numeric column reader for series and sample files.
fn read_column(path: &Path, column: &str) -> CliResult<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))?;
    let idx = reader
        .headers()
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| {
            CliError::data(format!("{}: no column named {column:?}", path.display()))
        })?;
    let mut values = Vec::new();
    for (row_no, row) in reader.records().enumerate() {
        let row = row?;
        let cell = row.get(idx).unwrap_or("");
        let v: f64 = cell.parse().map_err(|_| {
            CliError::data(format!(
                "{} row {}: cannot parse {cell:?} as a number",
                path.display(),
                row_no + 2
            ))
        })?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(CliError::data(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(values)
}

pub fn cmd_simulate(ctx: &Context, args: SimulateArgs) -> CliResult<()> {
    ctx.format_or(OutputFormat::Csv, &[OutputFormat::Csv])?;
    if args.n == 0 {
        return Err(CliError::usage("series length must be at least 1"));
    }
    let scenario_name = args
        .scenario
        .or_else(|| ctx.cfg.get_raw("scenario").map(str::to_string))
        .unwrap_or_else(|| "normal".to_string());
    let scenario: InnovationScenario = scenario_name.parse().map_err(CliError::usage)?;
    let burn_in = match args.burn_in {
        Some(b) => b,
        None => ctx.cfg.get("burn_in")?.unwrap_or(DEFAULT_BURN_IN),
    };
    let mut model = ARModel::new(args.phi)?;
    if let Some(c) = args.intercept {
        model = model.with_intercept(c)?;
    }
    let z = scenario.sample(args.n + burn_in, ctx.seed);
    let series = simulate_ar(&model, &z, args.n, burn_in)?;

    let mut csv = String::from("t,value\n");
    for (t, v) in series.values().iter().enumerate() {
        csv.push_str(&format!("{},{v}\n", t + 1));
    }
    let path = resolve_out(&ctx.out_dir, args.out, "series.csv");
    emit(&path, csv.as_bytes())
}

pub fn cmd_fit(ctx: &Context, args: FitArgs) -> CliResult<()> {
    let format = ctx.format_or(OutputFormat::Json, &[OutputFormat::Json, OutputFormat::Text])?;
    let column = args
        .column
        .or_else(|| ctx.cfg.get_raw("column").map(str::to_string))
        .unwrap_or_else(|| "value".to_string());
    let p = match args.p {
        Some(p) => p,
        None => ctx.cfg.get("p")?.unwrap_or(1),
    };
    if p == 0 {
        return Err(CliError::usage("autoregression order must be at least 1"));
    }
    let method = match args.method {
        Some(m) => m,
        None => match ctx.cfg.get_raw("method") {
            Some(raw) => raw.parse()? ,
            None => FitMethod::R,
        },
    };
    let lambda = match args.lambda {
        Some(l) => l,
        None => ctx.cfg.get("lambda")?.unwrap_or(DEFAULT_LAMBDA),
    };
    let alpha = match args.alpha {
        Some(a) => a,
        None => ctx.cfg.get("alpha")?.unwrap_or(0.5),
    };

    let values = read_column(&args.input, &column)?;
    let series = Series::new(values)?;
    let input = args.input.display().to_string();
    let report = match method {
        FitMethod::R => {
            let design = build_lagged_design(&series, p, false)?;
            let fit = fit_r_estimator(&design, &StepScore::new(lambda)?, &SolverOptions::default())?;
            FitReportJson {
                schema_version: SCHEMA_VERSION,
                kind: "fit",
                input,
                method: "rank-dispersion",
                p,
                n_eff: design.n_eff(),
                lambda: Some(lambda),
                alpha: None,
                slopes: fit.slopes,
                intercept: None,
                objective: fit.dispersion_at_min,
            }
        }
        FitMethod::Arq => {
            let design = build_lagged_design(&series, p, true)?;
            let fit = fit_ar_quantile(&design, alpha, &QuantileOptions::default())?;
            FitReportJson {
                schema_version: SCHEMA_VERSION,
                kind: "fit",
                input,
                method: "check-loss",
                p,
                n_eff: design.n_eff(),
                lambda: None,
                alpha: Some(alpha),
                slopes: fit.slopes().to_vec(),
                intercept: Some(fit.intercept()),
                objective: fit.objective,
            }
        }
    };

    match format {
        OutputFormat::Json => {
            let path = resolve_out(&ctx.out_dir, args.out, "fit.json");
            emit(&path, &to_json_bytes(&report))
        }
        OutputFormat::Text => {
            let mut text = format!(
                "method {}\np {}\nn_eff {}\nslopes {}\nobjective {}\n",
                report.method,
                report.p,
                report.n_eff,
                report
                    .slopes
                    .iter()
                    .map(f64::to_string)
                    .collect::<Vec<_>>()
                    .join(" "),
                report.objective
            );
            if let Some(c) = report.intercept {
                text.push_str(&format!("intercept {c}\n"));
            }
            let path = resolve_out(&ctx.out_dir, args.out, "fit.txt");
            emit(&path, text.as_bytes())
        }
        OutputFormat::Csv => unreachable!("format_or rejects csv"),
    }
}

pub fn cmd_risk(ctx: &Context, args: RiskArgs) -> CliResult<()> {
    let format = ctx.format_or(OutputFormat::Json, &[OutputFormat::Json, OutputFormat::Text])?;
    let column = args
        .column
        .or_else(|| ctx.cfg.get_raw("column").map(str::to_string))
        .unwrap_or_else(|| "value".to_string());
    let alphas = match args.alpha {
        Some(a) => a,
        None => ctx
            .cfg
            .get_list("alpha")?
            .unwrap_or_else(|| DEFAULT_ALPHAS.to_vec()),
    };
    if alphas.is_empty() {
        return Err(CliError::usage("need at least one risk level"));
    }
    let lambda = match args.lambda {
        Some(l) => l,
        None => ctx.cfg.get("lambda")?.unwrap_or(DEFAULT_LAMBDA),
    };

    let values = read_column(&args.input, &column)?;
    let input = args.input.display().to_string();
    let (sample, slopes, fitted_lambda) = match args.p {
        Some(0) => return Err(CliError::usage("autoregression order must be at least 1")),
        Some(p) => {
            let series = Series::new(values)?;
            let design = build_lagged_design(&series, p, false)?;
            let fit = fit_r_estimator(&design, &StepScore::new(lambda)?, &SolverOptions::default())?;
            let resid = residuals(&design, &fit.slopes, None)?;
            (resid, Some(fit.slopes), Some(lambda))
        }
        None => (values, None, None),
    };

    let estimates = alphas
        .iter()
        .map(|&alpha| cvar_min_form(&sample, alpha).map(|r| RiskLineJson::from(&r)))
        .collect::<arrisk::Result<Vec<_>>>()?;
    let report = RiskReportJson {
        schema_version: SCHEMA_VERSION,
        kind: "risk",
        input,
        n_eff: sample.len(),
        p: args.p,
        slopes,
        lambda: fitted_lambda,
        estimates,
    };

    match format {
        OutputFormat::Json => {
            let path = resolve_out(&ctx.out_dir, args.out, "risk.json");
            emit(&path, &to_json_bytes(&report))
        }
        OutputFormat::Text => {
            let mut text = format!("n_eff {}\nalpha var_hat cvar_hat xi_star\n", report.n_eff);
            for e in &report.estimates {
                text.push_str(&format!(
                    "{} {} {} {}\n",
                    e.alpha, e.var_hat, e.cvar_hat, e.xi_star
                ));
            }
            let path = resolve_out(&ctx.out_dir, args.out, "risk.txt");
            emit(&path, text.as_bytes())
        }
        OutputFormat::Csv => unreachable!("format_or rejects csv"),
    }
}

pub fn cmd_bench(ctx: &Context, args: BenchArgs) -> CliResult<()> {
    let grid_name = args
        .grid
        .or_else(|| ctx.cfg.get_raw("grid").map(str::to_string))
        .unwrap_or_else(|| "benchmark".to_string());
    if grid_name != "benchmark" {
        return Err(CliError::usage(format!(
            "unknown grid {grid_name:?}; available: benchmark"
        )));
    }
    let replications = match args.replications {
        Some(r) => r,
        None => ctx.cfg.get("replications")?.unwrap_or(1000),
    };
    let grid = ExperimentGrid::benchmark(replications, ctx.seed);
    let results = run_grid(&grid)?;

    let csv_path = resolve_out(&ctx.out_dir, args.out, "bench.csv");
    emit(&csv_path, results.to_csv().as_bytes())?;
    let txt_path = csv_path.with_extension("txt");
    emit(&txt_path, results.to_text_tables().as_bytes())?;
    if ctx.format == Some(OutputFormat::Json) {
        let json_path = csv_path.with_extension("json");
        emit(&json_path, &to_json_bytes(&BenchReportJson::build(&results)))?;
    }
    Ok(())
}

pub fn cmd_analyze(ctx: &Context, args: AnalyzeArgs) -> CliResult<()> {
    ctx.format_or(OutputFormat::Json, &[OutputFormat::Json])?;
    let date_column = args
        .date_column
        .or_else(|| ctx.cfg.get_raw("date_column").map(str::to_string))
        .unwrap_or_else(|| "date".to_string());
    let value_column = args
        .value_column
        .or_else(|| ctx.cfg.get_raw("value_column").map(str::to_string))
        .unwrap_or_else(|| "value".to_string());
    let date_format = args
        .date_format
        .or_else(|| ctx.cfg.get_raw("date_format").map(str::to_string))
        .unwrap_or_else(|| "%Y-%m-%d".to_string());
    let p = match args.p {
        Some(p) => p,
        None => ctx.cfg.get("p")?.unwrap_or(1),
    };
    let lambda = match args.lambda {
        Some(l) => l,
        None => ctx.cfg.get("lambda")?.unwrap_or(DEFAULT_LAMBDA),
    };
    let alphas = match args.alpha {
        Some(a) => a,
        None => ctx
            .cfg
            .get_list("alpha")?
            .unwrap_or_else(|| DEFAULT_ALPHAS.to_vec()),
    };
    let flag_level = match args.flag_level {
        Some(f) => f,
        None => ctx.cfg.get("flag_level")?.unwrap_or(0.99),
    };
    let label = args
        .label
        .or_else(|| ctx.cfg.get_raw("label").map(str::to_string))
        .unwrap_or_else(|| {
            args.input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "series".to_string())
        });

    let parsed = parse_daily_csv(&args.input, &date_column, &value_column, &date_format)?;
    let outcome = analyze(&parsed.records, &label, p, lambda, &alphas, flag_level)?;
    let report = AnalysisReportJson::build(&outcome, parsed.value_warnings);

    let report_path = resolve_out(&ctx.out_dir, args.out, "analysis.json");
    emit(&report_path, &to_json_bytes(&report))?;

    let mut exc_csv = String::from("date,residual\n");
    for (date, residual) in &outcome.exceedances {
        exc_csv.push_str(&format!("{date},{residual}\n"));
    }
    let exc_path = resolve_out(&ctx.out_dir, args.exceedance_out, "exceedances.csv");
    emit(&exc_path, exc_csv.as_bytes())
}
