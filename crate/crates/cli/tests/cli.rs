//! End-to-end tests against the built binary: exit codes, determinism,
//! artifact shapes, and schema validity of emitted reports.

mod common;

use common::*;
use std::fs;
use std::path::{Path, PathBuf};

fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn sample_csv(values: &[f64]) -> String {
    let mut s = String::from("value\n");
    for v in values {
        s.push_str(&format!("{v}\n"));
    }
    s
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["--help"][..], &["--version"][..], &["fit", "--help"][..]] {
        let out = run_arrisk(dir.path(), args);
        assert!(out.status.success(), "{args:?}: {}", stderr_of(&out));
    }
}

#[test]
fn bad_usage_exits_one_with_prefixed_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_arrisk(dir.path(), &["fit", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).starts_with("ERROR[1]:"), "{}", stderr_of(&out));

    let out = run_arrisk(dir.path(), &["nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate", "--phi", "0.5", "--n", "100", "--scenario", "normal", "--seed", "7",
        "--out", "a.csv",
    ];
    let out = run_arrisk(dir.path(), &args);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let mut again = args;
    again[args.len() - 1] = "b.csv";
    run_arrisk(dir.path(), &again);
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    let b = fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);

    let out = run_arrisk(
        dir.path(),
        &["simulate", "--phi", "0.5", "--n", "100", "--seed", "8", "--out", "c.csv"],
    );
    assert!(out.status.success(), "{}", stderr_of(&out));
    let c = fs::read(dir.path().join("c.csv")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn simulate_rejects_explosive_models() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_arrisk(dir.path(), &["simulate", "--phi", "1.2", "--n", "50"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).starts_with("ERROR[1]:"), "{}", stderr_of(&out));
}

#[test]
fn simulate_then_fit_round_trips_the_slope() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_arrisk(
        dir.path(),
        &["simulate", "--phi", "0.6", "--n", "600", "--seed", "11", "--out", "series.csv"],
    );
    assert!(out.status.success(), "{}", stderr_of(&out));

    for method in ["r", "arq"] {
        let out_name = format!("fit_{method}.json");
        let out = run_arrisk(
            dir.path(),
            &["fit", "--input", "series.csv", "--method", method, "--out", &out_name],
        );
        assert!(out.status.success(), "{}", stderr_of(&out));
        let report = read_json(&dir.path().join(&out_name));
        let slope = report["slopes"][0].as_f64().unwrap();
        assert!((slope - 0.6).abs() < 0.1, "{method}: slope {slope}");
        let schema = load_schema("fit_report.schema.json");
        validate_schema(&schema, &report).unwrap();
    }
}

#[test]
fn risk_matches_the_hand_example() {
    let dir = tempfile::tempdir().unwrap();
    write_file(
        dir.path(),
        "residuals.csv",
        &sample_csv(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]),
    );
    let out = run_arrisk(
        dir.path(),
        &["risk", "--alpha", "0.9", "--input", "residuals.csv"],
    );
    assert!(out.status.success(), "{}", stderr_of(&out));
    let report = read_json(&dir.path().join("risk.json"));
    let entry = &report["estimates"][0];
    assert_eq!(entry["var_hat"].as_f64().unwrap(), 9.0);
    assert_eq!(entry["cvar_hat"].as_f64().unwrap(), 10.0);
    assert_eq!(entry["xi_star"].as_f64().unwrap(), 9.0);
    let schema = load_schema("risk_report.schema.json");
    validate_schema(&schema, &report).unwrap();
}

#[test]
fn risk_with_order_fits_before_estimating() {
    let dir = tempfile::tempdir().unwrap();
    run_arrisk(
        dir.path(),
        &["simulate", "--phi", "0.5", "--n", "400", "--seed", "3", "--out", "series.csv"],
    );
    let out = run_arrisk(
        dir.path(),
        &["risk", "--input", "series.csv", "--p", "1", "--alpha", "0.95,0.99"],
    );
    assert!(out.status.success(), "{}", stderr_of(&out));
    let report = read_json(&dir.path().join("risk.json"));
    assert_eq!(report["p"].as_u64(), Some(1));
    assert_eq!(report["n_eff"].as_u64(), Some(399));
    let slope = report["slopes"][0].as_f64().unwrap();
    assert!((slope - 0.5).abs() < 0.15, "slope {slope}");
    assert_eq!(report["estimates"].as_array().unwrap().len(), 2);
    // Innovations are standard normal; the fitted-residual CVaR should sit
    // near the population value.
    let cvar = report["estimates"][0]["cvar_hat"].as_f64().unwrap();
    assert!((cvar - 2.06).abs() < 0.45, "cvar {cvar}");
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_arrisk(dir.path(), &["risk", "--input", "absent.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).starts_with("ERROR[2]:"), "{}", stderr_of(&out));
}

#[test]
fn degenerate_series_is_a_numeric_error() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "flat.csv", &sample_csv(&[5.0; 40]));
    let out = run_arrisk(dir.path(), &["fit", "--input", "flat.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_of(&out).starts_with("ERROR[3]:"), "{}", stderr_of(&out));
}

#[test]
fn unsupported_format_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_arrisk(
        dir.path(),
        &["simulate", "--phi", "0.5", "--n", "20", "--format", "json"],
    );
    assert_eq!(out.status.code(), Some(1));

    write_file(dir.path(), "s.csv", &sample_csv(&[1.0, 2.0, 3.0]));
    let out = run_arrisk(
        dir.path(),
        &["risk", "--input", "s.csv", "--format", "csv"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn text_format_writes_plain_reports() {
    let dir = tempfile::tempdir().unwrap();
    run_arrisk(
        dir.path(),
        &["simulate", "--phi", "0.4", "--n", "200", "--seed", "2", "--out", "series.csv"],
    );
    let out = run_arrisk(
        dir.path(),
        &["fit", "--input", "series.csv", "--format", "text"],
    );
    assert!(out.status.success(), "{}", stderr_of(&out));
    let text = fs::read_to_string(dir.path().join("fit.txt")).unwrap();
    assert!(text.starts_with("method rank-dispersion"), "{text}");
}

#[test]
fn config_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "run.conf", "seed=7\nburn_in=500\n");

    run_arrisk(
        dir.path(),
        &["simulate", "--phi", "0.5", "--n", "80", "--config", "run.conf", "--out", "from_config.csv"],
    );
    run_arrisk(
        dir.path(),
        &["simulate", "--phi", "0.5", "--n", "80", "--seed", "7", "--out", "from_flag.csv"],
    );
    assert_eq!(
        fs::read(dir.path().join("from_config.csv")).unwrap(),
        fs::read(dir.path().join("from_flag.csv")).unwrap()
    );

    // The explicit flag wins over the config value.
    run_arrisk(
        dir.path(),
        &["simulate", "--phi", "0.5", "--n", "80", "--config", "run.conf", "--seed", "9", "--out", "override.csv"],
    );
    run_arrisk(
        dir.path(),
        &["simulate", "--phi", "0.5", "--n", "80", "--seed", "9", "--out", "plain9.csv"],
    );
    assert_eq!(
        fs::read(dir.path().join("override.csv")).unwrap(),
        fs::read(dir.path().join("plain9.csv")).unwrap()
    );
    assert_ne!(
        fs::read(dir.path().join("override.csv")).unwrap(),
        fs::read(dir.path().join("from_flag.csv")).unwrap()
    );
}

#[test]
fn bench_grid_emits_all_seventy_two_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_arrisk(
        dir.path(),
        &["bench", "--grid", "benchmark", "--replications", "4", "--seed", "5", "--format", "json"],
    );
    assert!(out.status.success(), "{}", stderr_of(&out));

    let csv = fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "model,n,scenario,alpha,bias_r,rmse_r,bias_oracle,rmse_oracle,target,R_used,failures"
    );
    assert_eq!(lines.count(), 72);

    let text = fs::read_to_string(dir.path().join("bench.txt")).unwrap();
    assert!(text.contains("AR(2)"), "{text}");

    let report = read_json(&dir.path().join("bench.json"));
    assert_eq!(report["rows"].as_array().unwrap().len(), 72);
    let schema = load_schema("bench_report.schema.json");
    validate_schema(&schema, &report).unwrap();

    let out = run_arrisk(dir.path(), &["bench", "--grid", "unknown"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_gauge_fixture_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = gauge_fixture_path();
    let out = run_arrisk(
        dir.path(),
        &[
            "analyze",
            "--input",
            fixture.to_str().unwrap(),
            "--value-column",
            "QD",
        ],
    );
    assert!(out.status.success(), "{}", stderr_of(&out));

    let report = read_json(&dir.path().join("analysis.json"));
    let schema = load_schema("analysis_report.schema.json");
    validate_schema(&schema, &report).unwrap();

    let phi = report["phi_hat"][0].as_f64().unwrap();
    assert!((phi - GAUGE_PHI).abs() < 0.05, "phi_hat {phi}");
    // 1198 rows on file, 1195 observed values, six segments each losing one
    // row to the lag.
    assert_eq!(report["n_eff"].as_u64(), Some(1189));
    assert_eq!(report["segments_used"].as_u64(), Some(6));
    assert_eq!(report["value_warnings"].as_u64(), Some(3));
    assert_eq!(report["label"].as_str(), Some("synthetic_gauge"));
    assert_eq!(report["period"]["start"].as_str(), Some("2021-01-01"));

    let exc = fs::read_to_string(dir.path().join("exceedances.csv")).unwrap();
    let count = report["exceedance_count"].as_u64().unwrap() as usize;
    assert_eq!(exc.lines().count(), count + 1);
    assert!(exc.starts_with("date,residual\n"));

    // Exceedance dates are reported in calendar order.
    let dates: Vec<&str> = exc.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    let mut sorted = dates.clone();
    sorted.sort_unstable();
    assert_eq!(dates, sorted);
}

#[test]
fn fixture_matches_its_generator() {
    let on_disk = fs::read_to_string(gauge_fixture_path()).unwrap();
    assert_eq!(on_disk, synthetic_gauge_csv());
}

/// Regenerates the committed fixture. Run explicitly:
/// `cargo test -p arrisk-cli --test cli regenerate_gauge_fixture -- --ignored`
#[test]
#[ignore]
fn regenerate_gauge_fixture() {
    let path = gauge_fixture_path();
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(&path, synthetic_gauge_csv()).unwrap();
    println!("wrote {}", path.display());
}
