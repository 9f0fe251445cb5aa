//! Monte Carlo benchmark harness: feasible-vs-oracle tail-risk estimation
//! over a grid of AR models, innovation scenarios, sample sizes and levels.
//!
//! Each replication simulates a series, fits slopes by rank dispersion
//! (feasible path) and injects the true slopes (oracle path), then evaluates
//! the CVaR estimator on both residual sets. Innovation streams are keyed by
//! (scenario, n, replication) only, so every model and level sees the same
//! draws; oracle columns then agree across models of equal order, which makes
//! the feasible-vs-oracle comparison sharp.

use crate::ar::{build_lagged_design, residuals, simulate_ar, ARModel};
use crate::error::{Error, Result};
use crate::rank::{fit_r_estimator, SolverOptions, StepScore};
use crate::risk::{cvar_min_form, cvar_target, CvarTarget};
use crate::scenario::InnovationScenario;
use crate::seed::derive_seed;
use crate::util::bias_rmse;
use rayon::prelude::*;

/// Recursion steps discarded before the kept sample.
pub const DEFAULT_BURN_IN: usize = 500;

/// Draws used for Monte Carlo CVaR targets.
pub const TARGET_MC_SIZE: usize = 10_000_000;

/// Score level for the feasible fits.
const LAMBDA: f64 = 0.5;

/// Seed-path tags keeping replication and target streams apart.
const REP_TAG: u64 = 0x5245;
const TARGET_TAG: u64 = 0x5447;

/// A labeled model in an experiment grid.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub label: String,
    pub model: ARModel,
}

impl ModelSpec {
    pub fn new(label: impl Into<String>, model: ARModel) -> Self {
        ModelSpec {
            label: label.into(),
            model,
        }
    }
}

/// Full experiment specification; every cell is determined by
/// (model, scenario, n, alpha, master_seed).
#[derive(Debug, Clone)]
pub struct ExperimentGrid {
    pub models: Vec<ModelSpec>,
    pub sizes: Vec<usize>,
    pub alphas: Vec<f64>,
    pub scenarios: Vec<InnovationScenario>,
    pub replications: usize,
    pub master_seed: u64,
}

impl ExperimentGrid {
    /// The benchmark layout: AR(1) 0.5, AR(1) 0.8, AR(2) (0.5, -0.2);
    /// n in {100, 200, 500}; levels 0.95 and 0.99; all four scenarios.
    pub fn benchmark(replications: usize, master_seed: u64) -> Self {
        ExperimentGrid {
            models: vec![
                ModelSpec::new("AR(1) phi=0.5", ARModel::new(vec![0.5]).unwrap()),
                ModelSpec::new("AR(1) phi=0.8", ARModel::new(vec![0.8]).unwrap()),
                ModelSpec::new("AR(2) phi=(0.5,-0.2)", ARModel::new(vec![0.5, -0.2]).unwrap()),
            ],
            sizes: vec![100, 200, 500],
            alphas: vec![0.95, 0.99],
            scenarios: InnovationScenario::ALL.to_vec(),
            replications,
            master_seed,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.models.len() * self.sizes.len() * self.alphas.len() * self.scenarios.len()
    }

    fn validate(&self) -> Result<()> {
        if self.models.is_empty()
            || self.sizes.is_empty()
            || self.alphas.is_empty()
            || self.scenarios.is_empty()
        {
            return Err(Error::invalid("experiment grid has an empty axis"));
        }
        if self.replications == 0 {
            return Err(Error::invalid("need at least one replication"));
        }
        Ok(())
    }
}

/// Aggregated estimates for one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub bias_r: f64,
    pub rmse_r: f64,
    pub bias_oracle: f64,
    pub rmse_oracle: f64,
    pub target: f64,
    pub replications_used: usize,
    pub failures: usize,
}

/// One grid cell with its identity; failed cells carry the error text.
#[derive(Debug, Clone)]
pub struct GridRow {
    pub model: String,
    pub scenario: InnovationScenario,
    pub n: usize,
    pub alpha: f64,
    pub outcome: std::result::Result<CellResult, String>,
}

/// All cells of a completed grid run.
#[derive(Debug, Clone)]
pub struct GridResults {
    pub rows: Vec<GridRow>,
    pub replications: usize,
    pub master_seed: u64,
}

fn target_seed(master_seed: u64, scenario: InnovationScenario, alpha: f64) -> u64 {
    derive_seed(master_seed, &[TARGET_TAG, scenario.tag(), alpha.to_bits()])
}

fn replication_seed(master_seed: u64, scenario: InnovationScenario, n: usize, rep: usize) -> u64 {
    derive_seed(
        master_seed,
        &[REP_TAG, scenario.tag(), n as u64, rep as u64],
    )
}

/// Feasible and oracle CVaR estimates per level for the replications of one
/// (model, scenario, n) block. Sharing the simulated series across levels
/// halves the work without changing any cell value: replication seeds never
/// depend on alpha.
fn run_block(
    model: &ARModel,
    scenario: InnovationScenario,
    n: usize,
    alphas: &[f64],
    replications: usize,
    master_seed: u64,
    targets: &[Result<CvarTarget>],
) -> Vec<Result<CellResult>> {
    debug_assert_eq!(alphas.len(), targets.len());
    let p = model.order();
    let score = StepScore::new(LAMBDA).expect("lambda in range");
    let opts = SolverOptions::default();

    // Per replication: per-alpha (feasible, oracle) estimates, or None when
    // that stage failed. Collected in replication order for deterministic
    // aggregation regardless of scheduling.
    let reps: Vec<Vec<Option<(f64, f64)>>> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let whole_rep_failure = vec![None; alphas.len()];
            let seed = replication_seed(master_seed, scenario, n, rep);
            let z = scenario.sample(n + DEFAULT_BURN_IN, seed);
            let Ok(series) = simulate_ar(model, &z, n, DEFAULT_BURN_IN) else {
                return whole_rep_failure;
            };
            let Ok(design) = build_lagged_design(&series, p, false) else {
                return whole_rep_failure;
            };
            let Ok(fit) = fit_r_estimator(&design, &score, &opts) else {
                return whole_rep_failure;
            };
            let feasible = residuals(&design, &fit.slopes, None).expect("fit dims match");
            let oracle = residuals(&design, model.phi(), None).expect("model dims match");
            alphas
                .iter()
                .map(|&alpha| {
                    match (
                        cvar_min_form(&feasible, alpha),
                        cvar_min_form(&oracle, alpha),
                    ) {
                        (Ok(f), Ok(o)) => Some((f.cvar_hat, o.cvar_hat)),
                        _ => None,
                    }
                })
                .collect()
        })
        .collect();

    alphas
        .iter()
        .enumerate()
        .map(|(ai, _)| {
            let target = match &targets[ai] {
                Ok(t) => t.value,
                Err(e) => return Err(e.clone()),
            };
            let mut feas = Vec::with_capacity(replications);
            let mut orac = Vec::with_capacity(replications);
            for rep in &reps {
                if let Some((f, o)) = rep[ai] {
                    feas.push(f);
                    orac.push(o);
                }
            }
            let used = feas.len();
            let failures = replications - used;
            if (failures as f64) > 0.01 * replications as f64 {
                return Err(Error::TooManyFailures {
                    failures,
                    replications,
                });
            }
            let (bias_r, rmse_r) = bias_rmse(&feas, target);
            let (bias_oracle, rmse_oracle) = bias_rmse(&orac, target);
            Ok(CellResult {
                bias_r,
                rmse_r,
                bias_oracle,
                rmse_oracle,
                target,
                replications_used: used,
                failures,
            })
        })
        .collect()
}

/// Runs a single cell. Equivalent to the corresponding cell of [`run_grid`],
/// bit for bit.
pub fn run_cell(
    model: &ARModel,
    scenario: InnovationScenario,
    n: usize,
    alpha: f64,
    replications: usize,
    master_seed: u64,
) -> Result<CellResult> {
    if replications == 0 {
        return Err(Error::invalid("need at least one replication"));
    }
    let check = crate::ar::check_stationary(model);
    if !check.stationary {
        return Err(Error::NotStationary {
            radius: check.max_modulus,
        });
    }
    let targets = vec![cvar_target(
        scenario,
        alpha,
        TARGET_MC_SIZE,
        target_seed(master_seed, scenario, alpha),
    )];
    run_block(model, scenario, n, &[alpha], replications, master_seed, &targets)
        .pop()
        .expect("one alpha in, one cell out")
}

/// Runs every cell of the grid. Individual cell failures are recorded in the
/// row and do not stop the run.
pub fn run_grid(grid: &ExperimentGrid) -> Result<GridResults> {
    grid.validate()?;
    for spec in &grid.models {
        let check = crate::ar::check_stationary(&spec.model);
        if !check.stationary {
            return Err(Error::NotStationary {
                radius: check.max_modulus,
            });
        }
    }

    // One target per (scenario, alpha), shared by every block.
    let target_table: Vec<Vec<Result<CvarTarget>>> = grid
        .scenarios
        .par_iter()
        .map(|&sc| {
            grid.alphas
                .iter()
                .map(|&alpha| {
                    cvar_target(sc, alpha, TARGET_MC_SIZE, target_seed(grid.master_seed, sc, alpha))
                })
                .collect()
        })
        .collect();

    // Blocks are (model, scenario, n); each yields one cell per alpha.
    let mut block_keys = Vec::new();
    for (mi, _) in grid.models.iter().enumerate() {
        for (si, _) in grid.scenarios.iter().enumerate() {
            for &n in &grid.sizes {
                block_keys.push((mi, si, n));
            }
        }
    }
    let block_cells: Vec<Vec<Result<CellResult>>> = block_keys
        .par_iter()
        .map(|&(mi, si, n)| {
            run_block(
                &grid.models[mi].model,
                grid.scenarios[si],
                n,
                &grid.alphas,
                grid.replications,
                grid.master_seed,
                &target_table[si],
            )
        })
        .collect();

    // Emission order mirrors the benchmark tables: model, then level, then
    // scenario, then sample size.
    let mut rows = Vec::with_capacity(grid.cell_count());
    for (mi, spec) in grid.models.iter().enumerate() {
        for (ai, &alpha) in grid.alphas.iter().enumerate() {
            for (si, &scenario) in grid.scenarios.iter().enumerate() {
                for &n in &grid.sizes {
                    let bi = block_keys
                        .iter()
                        .position(|&k| k == (mi, si, n))
                        .expect("block exists");
                    rows.push(GridRow {
                        model: spec.label.clone(),
                        scenario,
                        n,
                        alpha,
                        outcome: block_cells[bi][ai].clone().map_err(|e| e.to_string()),
                    });
                }
            }
        }
    }
    Ok(GridResults {
        rows,
        replications: grid.replications,
        master_seed: grid.master_seed,
    })
}

impl GridResults {
    pub fn find(
        &self,
        model: &str,
        scenario: InnovationScenario,
        n: usize,
        alpha: f64,
    ) -> Option<&GridRow> {
        self.rows.iter().find(|r| {
            r.model == model && r.scenario == scenario && r.n == n && r.alpha == alpha
        })
    }

    /// Flat CSV, one row per cell. Failed cells leave the numeric fields
    /// empty. Floats print with shortest-roundtrip precision, so equal seeds
    /// give byte-identical output.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "model,n,scenario,alpha,bias_r,rmse_r,bias_oracle,rmse_oracle,target,R_used,failures\n",
        );
        for row in &self.rows {
            match &row.outcome {
                Ok(c) => {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},{},{}\n",
                        row.model,
                        row.n,
                        row.scenario,
                        row.alpha,
                        c.bias_r,
                        c.rmse_r,
                        c.bias_oracle,
                        c.rmse_oracle,
                        c.target,
                        c.replications_used,
                        c.failures
                    ));
                }
                Err(_) => {
                    out.push_str(&format!(
                        "{},{},{},{},,,,,,0,{}\n",
                        row.model, row.n, row.scenario, row.alpha, self.replications
                    ));
                }
            }
        }
        out
    }

    /// Fixed-width tables in the benchmark layout: one block per model,
    /// scenario sections ordered within each level.
    pub fn to_text_tables(&self) -> String {
        let mut out = String::new();
        let mut models: Vec<&str> = Vec::new();
        for row in &self.rows {
            if !models.contains(&row.model.as_str()) {
                models.push(&row.model);
            }
        }
        for model in models {
            out.push_str(&format!(
                "Model {model}   (R = {}, master seed = {})\n",
                self.replications, self.master_seed
            ));
            out.push_str(&format!(
                "{:<7} {:<15} {:>5} {:>10} {:>10} {:>12} {:>12}\n",
                "alpha", "scenario", "n", "bias (R)", "RMSE (R)", "bias (Orac)", "RMSE (Orac)"
            ));
            for row in self.rows.iter().filter(|r| r.model == model) {
                match &row.outcome {
                    Ok(c) => out.push_str(&format!(
                        "{:<7} {:<15} {:>5} {:>10} {:>10} {:>12} {:>12}\n",
                        row.alpha,
                        row.scenario.name(),
                        row.n,
                        format_stat(c.bias_r),
                        format_stat(c.rmse_r),
                        format_stat(c.bias_oracle),
                        format_stat(c.rmse_oracle)
                    )),
                    Err(e) => out.push_str(&format!(
                        "{:<7} {:<15} {:>5} {}\n",
                        row.alpha,
                        row.scenario.name(),
                        row.n,
                        format!("failed: {e}")
                    )),
                }
            }
            out.push('\n');
        }
        out
    }
}

fn format_stat(v: f64) -> String {
    format!("{v:.4}")
}
