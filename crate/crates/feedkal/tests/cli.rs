//! Integration tests of the harness surface: argument parsing, exit codes,
//! artifact layout, and the numeric content of written files.

mod common;

use std::fs;
use std::path::Path;

use approx::assert_abs_diff_eq;

use common::*;
use feedkal::cli::{cmd_compare, cmd_riccati, main_with_args, EstimatorKind, RunConfig};
use feedkal::{DiscretizationMethod, Error, ScenarioKind};

fn run_cli(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("feedkal").chain(args.iter().copied()))
}

fn parse_cell(cell: &str) -> f64 {
    cell.parse().unwrap_or_else(|_| panic!("cell {cell:?} is not a float"))
}

#[test]
fn run_writes_artifacts_and_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("artifacts");
    let sys_path = feedthrough_json();
    let code = run_cli(&[
        "run",
        "--system",
        sys_path.to_str().unwrap(),
        "--steps",
        "300",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    for name in [
        "tv_corrected.csv",
        "ss_corrected.csv",
        "ss_legacy.csv",
        "summary.json",
        "plot.py",
    ] {
        assert!(out.join(name).is_file(), "missing artifact {name}");
    }
    for entry in fs::read_dir(&out).unwrap() {
        let name = entry.unwrap().file_name();
        assert!(
            !name.to_string_lossy().ends_with(".tmp"),
            "leftover temp file {name:?}"
        );
    }

    let text = fs::read_to_string(out.join("ss_corrected.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,time,z1,y_true1,y_true2,y_hat1,y_hat2,y_err1,y_err2,x_true1,x_hat1,w_true1,w_hat1"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 300);
    for (k, row) in rows.iter().enumerate() {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 13);
        assert_eq!(cells[0], k.to_string());
        for cell in &cells[1..] {
            let v = parse_cell(cell);
            // Cells are written with 17 significant digits: parsing and
            // re-rendering must reproduce them exactly.
            assert_eq!(format!("{v:.16e}").as_str(), *cell);
        }
        let f = |i: usize| parse_cell(cells[i]);
        assert_eq!(f(7), f(3) - f(5), "y_err1 must equal y_true1 - y_hat1");
        assert_eq!(f(8), f(4) - f(6), "y_err2 must equal y_true2 - y_hat2");
        // In this system the second output row IS the disturbance, so its
        // estimate must coincide with w_hat.
        assert_eq!(f(6), f(12));
        assert_abs_diff_eq!(f(1), k as f64 * 0.1, epsilon = 1e-15);
    }

    // The legacy estimator never reconstructs the disturbance.
    let legacy = fs::read_to_string(out.join("ss_legacy.csv")).unwrap();
    for row in legacy.lines().skip(1) {
        let w_hat = parse_cell(row.rsplit(',').next().unwrap());
        assert_eq!(w_hat, 0.0);
    }

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    for id in ["tv_corrected", "ss_corrected", "ss_legacy"] {
        let block = &summary[id];
        assert_eq!(block["y_err_var"].as_array().unwrap().len(), 2, "{id}");
        assert_eq!(block["x_rms"].as_array().unwrap().len(), 1, "{id}");
        assert!(block["w_rms"].is_f64(), "{id}");
    }
    let plot = fs::read_to_string(out.join("plot.py")).unwrap();
    assert!(plot.starts_with("#!/usr/bin/env python3"));
}

#[test]
fn equal_seeds_give_byte_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let sys_path = feedthrough_json();
    let args = |out: &Path, seed: &str| {
        vec![
            "run".to_string(),
            "--system".into(),
            sys_path.to_str().unwrap().into(),
            "--steps".into(),
            "200".into(),
            "--seed".into(),
            seed.into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert_eq!(main_with_args(std::iter::once("feedkal".into()).chain(args(&a, "9"))), 0);
    assert_eq!(main_with_args(std::iter::once("feedkal".into()).chain(args(&b, "9"))), 0);
    assert_eq!(main_with_args(std::iter::once("feedkal".into()).chain(args(&c, "10"))), 0);

    for name in ["tv_corrected.csv", "ss_corrected.csv", "ss_legacy.csv", "summary.json"] {
        let bytes_a = fs::read(a.join(name)).unwrap();
        assert_eq!(bytes_a, fs::read(b.join(name)).unwrap(), "{name} not reproducible");
        if name != "summary.json" {
            assert_ne!(
                bytes_a,
                fs::read(c.join(name)).unwrap(),
                "{name} ignored the seed"
            );
        }
    }
}

#[test]
fn seed_env_variable_fills_in_when_flag_is_absent() {
    let dir = tempfile::tempdir().unwrap();
    let sys_path = feedthrough_json();
    let (a, b) = (dir.path().join("env"), dir.path().join("flag"));

    std::env::set_var("FEEDKAL_SEED", "123");
    let code = run_cli(&[
        "run",
        "--system",
        sys_path.to_str().unwrap(),
        "--steps",
        "150",
        "--out",
        a.to_str().unwrap(),
    ]);
    std::env::remove_var("FEEDKAL_SEED");
    assert_eq!(code, 0);

    let code = run_cli(&[
        "run",
        "--system",
        sys_path.to_str().unwrap(),
        "--steps",
        "150",
        "--seed",
        "123",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        fs::read(a.join("ss_corrected.csv")).unwrap(),
        fs::read(b.join("ss_corrected.csv")).unwrap()
    );
}

#[test]
fn riccati_command_reproduces_the_benchmark_solution() {
    let report = cmd_riccati(&RunConfig::for_system(feedthrough_json())).unwrap();
    assert_abs_diff_eq!(report.p_star[(0, 0)], 0.010_304_123_021_909_434, epsilon = 1e-10);
    assert_abs_diff_eq!(report.kg[(0, 0)], 0.009_280_451_011_804_542, epsilon = 1e-10);
    assert_abs_diff_eq!(report.kg2[(0, 0)], 0.900_654_135_443_814_1, epsilon = 1e-10);
    assert_abs_diff_eq!(report.a_cl[(0, 0)], 0.800_681_526_409_550_7, epsilon = 1e-10);
    assert_abs_diff_eq!(report.spectral_radius, 0.800_681_526_409_550_7, epsilon = 1e-10);
    assert_abs_diff_eq!(report.var_y[(0, 0)], 0.090_993_458_645_561_86, epsilon = 1e-10);
    assert!(report.residual <= 1e-9 && report.iterations > 0);

    let rendered = format!("{report}");
    assert!(rendered.contains("spectral radius"));
    assert!(rendered.contains("stable"));
}

#[test]
fn continuous_files_discretize_at_the_configured_step() {
    // The continuous file carries dt = 0.1 and its forward-difference
    // discretization is exactly the bundled discrete system.
    let cont = cmd_riccati(&RunConfig::for_system(feedthrough_continuous_json())).unwrap();
    let disc = cmd_riccati(&RunConfig::for_system(feedthrough_json())).unwrap();
    assert_abs_diff_eq!(cont.p_star[(0, 0)], disc.p_star[(0, 0)], epsilon = 1e-12);

    // Overriding the step or the method must change the answer.
    let mut cfg = RunConfig::for_system(feedthrough_continuous_json());
    cfg.dt = Some(0.05);
    let halved = cmd_riccati(&cfg).unwrap();
    assert!((halved.p_star[(0, 0)] - disc.p_star[(0, 0)]).abs() > 1e-6);

    let mut cfg = RunConfig::for_system(feedthrough_continuous_json());
    cfg.method = DiscretizationMethod::ZeroOrderHold;
    let zoh = cmd_riccati(&cfg).unwrap();
    let gap = (zoh.p_star[(0, 0)] - disc.p_star[(0, 0)]).abs();
    assert!(gap > 1e-9 && gap < 1e-3, "ZOH should move P* slightly, moved {gap:.2e}");
}

#[test]
fn dt_flag_on_a_discrete_file_is_an_error() {
    let sys_path = feedthrough_json();
    let code = run_cli(&["riccati", "--system", sys_path.to_str().unwrap(), "--dt", "0.1"]);
    assert_eq!(code, 1);

    let mut cfg = RunConfig::for_system(feedthrough_json());
    cfg.dt = Some(0.1);
    assert!(matches!(cmd_riccati(&cfg), Err(Error::InvalidArgument(_))));
}

#[test]
fn file_problems_exit_with_code_1() {
    assert_eq!(run_cli(&["riccati", "--system", "/nonexistent/sys.json"]), 1);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ this is not json").unwrap();
    assert_eq!(run_cli(&["riccati", "--system", bad.to_str().unwrap()]), 1);

    // Structurally broken: ragged matrix rows.
    let ragged = dir.path().join("ragged.json");
    fs::write(
        &ragged,
        r#"{"A": [[0.5, 0.0], [0.1]], "G": [[1.0], [0.0]], "C": [[1.0, 0.0]],
            "H": [[0.0]], "Cm": [[1.0, 0.0]], "Hm": [[0.0]],
            "Q": [[1.0]], "R": [[0.1]], "N": [[0.0]], "dt": 0.1}"#,
    )
    .unwrap();
    assert_eq!(run_cli(&["riccati", "--system", ragged.to_str().unwrap()]), 1);
}

#[test]
fn numerical_failure_exits_with_code_2() {
    // Unstable plant whose measurement carries no information about the
    // state: the covariance recursion has no fixed point to find.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("divergent.json");
    fs::write(
        &path,
        r#"{"A": [[1.5]], "G": [[1.0]], "C": [[1.0]], "H": [[0.0]],
            "Cm": [[0.0]], "Hm": [[0.0]],
            "Q": [[1.0]], "R": [[0.1]], "N": [[0.0]], "dt": 0.1}"#,
    )
    .unwrap();
    assert_eq!(run_cli(&["riccati", "--system", path.to_str().unwrap()]), 2);
}

#[test]
fn compare_reports_the_legacy_variance_ratio() {
    let mut cfg = RunConfig::for_system(feedthrough_json());
    cfg.steps = 20_000;
    cfg.seed = 1;
    let report = cmd_compare(&cfg).unwrap();

    let kinds: Vec<_> = report.results.iter().map(|r| r.kind).collect();
    assert_eq!(
        kinds,
        [
            EstimatorKind::TvCorrected,
            EstimatorKind::SsCorrected,
            EstimatorKind::SsLegacy
        ]
    );
    assert_eq!(report.ratios.len(), 2);
    for (kind, ratio) in &report.ratios {
        assert_ne!(*kind, EstimatorKind::SsLegacy);
        assert!(
            ratio[0] > 5.0,
            "{kind:?}: expected a large variance gap on y1, got {:.2}",
            ratio[0]
        );
    }
    let rendered = format!("{report}");
    assert!(rendered.contains("legacy / corrected"));
}

#[test]
fn estimator_selection_is_deduplicated_and_checked() {
    let mut cfg = RunConfig::for_system(feedthrough_json());
    cfg.steps = 500;
    cfg.estimators = vec![EstimatorKind::SsLegacy, EstimatorKind::SsLegacy];
    let report = cmd_compare(&cfg).unwrap();
    assert_eq!(report.results.len(), 1);
    assert!(report.ratios.is_empty(), "no corrected run, so no ratios");

    cfg.estimators = vec![];
    assert!(matches!(cmd_compare(&cfg), Err(Error::InvalidArgument(_))));

    let sys_path = feedthrough_json();
    let code = run_cli(&[
        "compare",
        "--system",
        sys_path.to_str().unwrap(),
        "--steps",
        "500",
        "--seed",
        "2",
        "--estimators",
        "ss_corrected,ss_legacy",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn invalid_initial_covariance_scale_is_rejected() {
    let mut cfg = RunConfig::for_system(feedthrough_json());
    cfg.steps = 500;
    cfg.p0_scale = -1.0;
    assert!(matches!(cmd_compare(&cfg), Err(Error::InvalidArgument(_))));
}

#[test]
fn random_walk_scenario_runs_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rw");
    let sys_path = feedthrough_json();
    let code = run_cli(&[
        "run",
        "--system",
        sys_path.to_str().unwrap(),
        "--scenario",
        "randomwalk",
        "--bias-std",
        "0.02",
        "--steps",
        "2000",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.join("summary.json").is_file());

    let mut cfg = RunConfig::for_system(feedthrough_json());
    cfg.scenario = ScenarioKind::RandomWalkBias;
    cfg.steps = 2000;
    cfg.seed = 7;
    cfg.bias_step_std = 0.02;
    let report = cmd_compare(&cfg).unwrap();
    let legacy = report
        .results
        .iter()
        .find(|r| r.kind == EstimatorKind::SsLegacy)
        .unwrap();
    let corrected = report
        .results
        .iter()
        .find(|r| r.kind == EstimatorKind::SsCorrected)
        .unwrap();
    assert!(corrected.stats.w_rms < legacy.stats.w_rms);
}

#[test]
fn help_version_and_usage_errors() {
    assert_eq!(run_cli(&["--help"]), 0);
    assert_eq!(run_cli(&["--version"]), 0);
    assert_eq!(run_cli(&["riccati", "--help"]), 0);
    assert_eq!(run_cli(&["not-a-command"]), 1);
    assert_eq!(run_cli(&["riccati"]), 1, "--system is required");
    assert_eq!(run_cli(&[]), 1, "a subcommand is required");
}
