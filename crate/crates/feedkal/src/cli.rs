//! Command-line harness.
//!
//! Three subcommands, all operating on a JSON system definition file:
//!
//! - `riccati`: solve for the steady-state covariance, print `P*`, the
//!   gains, and the closed-loop stability margin.
//! - `run`: simulate a scenario, run the selected estimators on the shared
//!   realization, and write per-estimator CSVs, `summary.json`, and a
//!   `plot.py` into the output directory.
//! - `compare`: same pipeline without file output; prints an error-variance
//!   table with legacy-to-corrected ratios.
//!
//! Exit codes: 0 success, 1 input/configuration errors, 2 numerical
//! failures (non-convergence, singular innovation covariance, non-finite
//! values).

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};

use crate::filter_ss::{self, SteadyFilter};
use crate::filter_tv::{self, EstimateFrame, FilterState, OutputMode};
use crate::model::{self, DiscreteSystem, DiscretizationMethod, LoadedSystem};
use crate::sim::{self, ErrorStats, Scenario, ScenarioKind, Trajectory};
use crate::{Error, Result};

/// Environment variable consulted for the seed when `--seed` is absent.
pub const SEED_ENV: &str = "FEEDKAL_SEED";

/// The estimators the harness knows how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorKind {
    /// Time-varying filter with the corrected output update.
    #[value(name = "tv_corrected")]
    TvCorrected,
    /// Steady-state (constant gain) filter with the corrected output update.
    #[value(name = "ss_corrected")]
    SsCorrected,
    /// Steady-state filter with the traditional output update; the baseline.
    #[value(name = "ss_legacy")]
    SsLegacy,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [
        EstimatorKind::TvCorrected,
        EstimatorKind::SsCorrected,
        EstimatorKind::SsLegacy,
    ];

    /// Identifier used for CLI selection, file names, and summary keys.
    pub fn id(self) -> &'static str {
        match self {
            EstimatorKind::TvCorrected => "tv_corrected",
            EstimatorKind::SsCorrected => "ss_corrected",
            EstimatorKind::SsLegacy => "ss_legacy",
        }
    }

    /// Short legend used in tables and plots.
    pub fn legend(self) -> &'static str {
        match self {
            EstimatorKind::TvCorrected => "new",
            EstimatorKind::SsCorrected => "new ss",
            EstimatorKind::SsLegacy => "prev ss",
        }
    }

    pub fn mode(self) -> OutputMode {
        match self {
            EstimatorKind::SsLegacy => OutputMode::Legacy,
            _ => OutputMode::Corrected,
        }
    }
}

/// Full configuration of one harness invocation, independent of how it was
/// parsed.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Path to the JSON system definition.
    pub system: PathBuf,
    /// Discretization step for continuous files; overrides the file's `dt`.
    pub dt: Option<f64>,
    pub method: DiscretizationMethod,
    pub scenario: ScenarioKind,
    pub steps: usize,
    pub seed: u64,
    pub estimators: Vec<EstimatorKind>,
    /// Initial covariance of the time-varying run: `P0 = p0_scale * I`.
    pub p0_scale: f64,
    /// Per-step increment std for the random-walk bias scenario.
    pub bias_step_std: f64,
    /// Artifact directory; only `run` writes files.
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    /// A minimal config for commands that only need the system file.
    pub fn for_system(system: PathBuf) -> Self {
        Self {
            system,
            dt: None,
            method: DiscretizationMethod::Euler,
            scenario: ScenarioKind::Nominal,
            steps: 10_000,
            seed: 0,
            estimators: EstimatorKind::ALL.to_vec(),
            p0_scale: 1.0,
            bias_step_std: sim::DEFAULT_BIAS_STEP_STD,
            out_dir: None,
        }
    }
}

/// Resolves the effective seed: explicit value, else the `FEEDKAL_SEED`
/// environment variable, else 0. A malformed environment value is ignored.
pub fn resolve_seed(explicit: Option<u64>) -> u64 {
    seed_from(explicit, std::env::var(SEED_ENV).ok().as_deref())
}

fn seed_from(explicit: Option<u64>, env_value: Option<&str>) -> u64 {
    explicit
        .or_else(|| env_value.and_then(|s| s.trim().parse().ok()))
        .unwrap_or(0)
}

/// Exit code for an error per the harness contract: 2 for numerical
/// failures, 1 for everything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::RiccatiNotConverged { .. }
        | Error::SingularInnovation { .. }
        | Error::ResidualTooLarge { .. }
        | Error::NonFinite(_) => 2,
        _ => 1,
    }
}

fn load_discrete(cfg: &RunConfig) -> Result<DiscreteSystem> {
    match model::load_system(&cfg.system)? {
        LoadedSystem::Discrete(sys) => {
            if cfg.dt.is_some() {
                return Err(Error::InvalidArgument(
                    "--dt only applies to continuous system files; this file is already discrete"
                        .into(),
                ));
            }
            Ok(sys)
        }
        LoadedSystem::Continuous { system, default_dt } => {
            let dt = cfg.dt.or(default_dt).ok_or_else(|| {
                Error::InvalidArgument(
                    "continuous system file has no dt; pass --dt".into(),
                )
            })?;
            model::discretize(&system, dt, cfg.method)
        }
    }
}

/// Keeps the canonical estimator order and drops duplicates.
fn canonical_selection(kinds: &[EstimatorKind]) -> Vec<EstimatorKind> {
    EstimatorKind::ALL
        .into_iter()
        .filter(|k| kinds.contains(k))
        .collect()
}

/// Report of `riccati`: the solution and the quantities worth eyeballing.
#[derive(Debug, Clone)]
pub struct RiccatiReport {
    pub p_star: DMatrix<f64>,
    pub kg: DMatrix<f64>,
    pub kg2: DMatrix<f64>,
    pub a_cl: DMatrix<f64>,
    pub spectral_radius: f64,
    pub var_y: DMatrix<f64>,
    pub residual: f64,
    pub iterations: usize,
}

impl fmt::Display for RiccatiReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "steady-state covariance P* (converged in {} iterations, residual {:.3e}):{}",
            self.iterations, self.residual, self.p_star
        )?;
        writeln!(f, "state gain Kg:{}", self.kg)?;
        writeln!(f, "noise gain Kg2:{}", self.kg2)?;
        writeln!(f, "closed-loop predictor A - M_AG Cm:{}", self.a_cl)?;
        writeln!(
            f,
            "spectral radius: {:.6} ({})",
            self.spectral_radius,
            if self.spectral_radius < 1.0 {
                "stable"
            } else {
                "NOT stable"
            }
        )?;
        write!(f, "steady output covariance var_y:{}", self.var_y)
    }
}

/// Solves the steady-state problem for the configured system.
pub fn cmd_riccati(cfg: &RunConfig) -> Result<RiccatiReport> {
    let sys = load_discrete(cfg)?;
    let sol = filter_ss::solve_riccati_default(&sys)?;
    let filter = SteadyFilter::build(&sys, &sol.p_star)?;
    Ok(RiccatiReport {
        p_star: sol.p_star,
        kg: filter.gains.kg.clone(),
        kg2: filter.gains.kg2.clone(),
        a_cl: filter.a_cl.clone(),
        spectral_radius: filter.spectral_radius,
        var_y: filter.var_y.clone(),
        residual: sol.residual,
        iterations: sol.iterations,
    })
}

/// One estimator's scored result.
#[derive(Debug, Clone)]
pub struct EstimatorResult {
    pub kind: EstimatorKind,
    pub stats: ErrorStats,
}

fn run_estimators(
    cfg: &RunConfig,
) -> Result<(DiscreteSystem, Trajectory, Vec<(EstimatorKind, Vec<EstimateFrame>)>)> {
    let kinds = canonical_selection(&cfg.estimators);
    if kinds.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one estimator must be selected".into(),
        ));
    }
    if !(cfg.p0_scale >= 0.0 && cfg.p0_scale.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "p0 scale must be finite and non-negative, got {}",
            cfg.p0_scale
        )));
    }
    let sys = load_discrete(cfg)?;
    let scenario = match cfg.scenario {
        ScenarioKind::Nominal => Scenario::nominal(cfg.steps, cfg.seed),
        ScenarioKind::RandomWalkBias => {
            Scenario::random_walk_bias(cfg.steps, cfg.seed, cfg.bias_step_std)
        }
    };
    let traj = sim::simulate(&sys, &scenario)?;

    let steady = if kinds
        .iter()
        .any(|k| matches!(k, EstimatorKind::SsCorrected | EstimatorKind::SsLegacy))
    {
        let sol = filter_ss::solve_riccati_default(&sys)?;
        Some(SteadyFilter::build(&sys, &sol.p_star)?)
    } else {
        None
    };

    let x0 = DVector::zeros(sys.nx());
    let mut runs = Vec::with_capacity(kinds.len());
    for kind in kinds {
        let frames = match kind {
            EstimatorKind::TvCorrected => {
                let p0 = DMatrix::identity(sys.nx(), sys.nx()) * cfg.p0_scale;
                let init = FilterState::new(x0.clone(), p0)?;
                filter_tv::run(&sys, &init, &traj.z, &traj.u, kind.mode())?
            }
            EstimatorKind::SsCorrected | EstimatorKind::SsLegacy => steady
                .as_ref()
                .expect("steady filter built for steady estimators")
                .run(&x0, &traj.z, &traj.u, kind.mode())?,
        };
        runs.push((kind, frames));
    }
    Ok((sys, traj, runs))
}

/// Report of `run`: where the artifacts went and the per-estimator scores.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub csv_files: Vec<PathBuf>,
    pub summary_file: PathBuf,
    pub plot_file: PathBuf,
    pub results: Vec<EstimatorResult>,
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_stats_table(f, &self.results)?;
        writeln!(f)?;
        for path in &self.csv_files {
            writeln!(f, "wrote {}", path.display())?;
        }
        writeln!(f, "wrote {}", self.summary_file.display())?;
        write!(f, "wrote {}", self.plot_file.display())
    }
}

/// Simulates the configured scenario, runs the selected estimators on the
/// shared realization, scores them, and writes one CSV per estimator plus
/// `summary.json` and `plot.py` into the output directory.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunReport> {
    let out_dir = cfg.out_dir.clone().ok_or_else(|| {
        Error::InvalidArgument("run requires an output directory (--out)".into())
    })?;
    let (sys, traj, runs) = run_estimators(cfg)?;

    let mut results = Vec::with_capacity(runs.len());
    for (kind, frames) in &runs {
        results.push(EstimatorResult {
            kind: *kind,
            stats: sim::evaluate(&traj, frames)?,
        });
    }

    std::fs::create_dir_all(&out_dir)?;
    let mut csv_files = Vec::with_capacity(runs.len());
    for (kind, frames) in &runs {
        let path = out_dir.join(format!("{}.csv", kind.id()));
        write_estimator_csv(&path, &sys, &traj, frames)?;
        csv_files.push(path);
    }
    let summary_file = out_dir.join("summary.json");
    atomic_write(&summary_file, &render_summary(&results))?;
    let plot_file = out_dir.join("plot.py");
    atomic_write(&plot_file, PLOT_SCRIPT)?;

    Ok(RunReport {
        out_dir,
        csv_files,
        summary_file,
        plot_file,
        results,
    })
}

/// Report of `compare`: scores per estimator plus legacy-to-corrected
/// variance ratios per output (present when `ss_legacy` was selected).
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub results: Vec<EstimatorResult>,
    /// `(corrected estimator, legacy y_err_var ./ corrected y_err_var)`.
    pub ratios: Vec<(EstimatorKind, DVector<f64>)>,
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_stats_table(f, &self.results)?;
        if !self.ratios.is_empty() {
            writeln!(f)?;
            writeln!(f, "output error-variance ratios (legacy / corrected):")?;
            for (kind, ratio) in &self.ratios {
                writeln!(
                    f,
                    "  prev ss / {:<8} {}",
                    kind.legend(),
                    format_vector(ratio)
                )?;
            }
        }
        Ok(())
    }
}

/// Runs all selected estimators on one shared noise realization and reports
/// the error-variance comparison; writes nothing.
pub fn cmd_compare(cfg: &RunConfig) -> Result<CompareReport> {
    let (_, traj, runs) = run_estimators(cfg)?;
    let mut results = Vec::with_capacity(runs.len());
    for (kind, frames) in &runs {
        results.push(EstimatorResult {
            kind: *kind,
            stats: sim::evaluate(&traj, frames)?,
        });
    }

    let mut ratios = Vec::new();
    if let Some(legacy) = results
        .iter()
        .find(|r| r.kind == EstimatorKind::SsLegacy)
        .map(|r| r.stats.y_err_var.clone())
    {
        for res in &results {
            if res.kind == EstimatorKind::SsLegacy {
                continue;
            }
            let ratio = DVector::from_fn(legacy.len(), |i, _| {
                legacy[i] / res.stats.y_err_var[i]
            });
            ratios.push((res.kind, ratio));
        }
    }
    Ok(CompareReport { results, ratios })
}

fn write_stats_table(f: &mut fmt::Formatter<'_>, results: &[EstimatorResult]) -> fmt::Result {
    writeln!(
        f,
        "{:<10} {:<34} {:<24} {:<12}",
        "estimator", "y_err_var", "x_rms", "w_rms"
    )?;
    for res in results {
        writeln!(
            f,
            "{:<10} {:<34} {:<24} {:<12}",
            res.kind.legend(),
            format_vector(&res.stats.y_err_var),
            format_vector(&res.stats.x_rms),
            format!("{:.4e}", res.stats.w_rms)
        )?;
    }
    Ok(())
}

fn format_vector(v: &DVector<f64>) -> String {
    let comps: Vec<String> = v.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", comps.join(", "))
}

/// 17 significant digits, scientific notation: round-trips f64 exactly.
fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes via a temp file plus rename so a crash never leaves a truncated
/// artifact behind.
fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let mut tmp_name = path.as_os_str().to_owned();
    tmp_name.push(".tmp");
    let tmp = PathBuf::from(tmp_name);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn write_estimator_csv(
    path: &Path,
    sys: &DiscreteSystem,
    traj: &Trajectory,
    frames: &[EstimateFrame],
) -> Result<()> {
    let (nx, nw, ny, nz) = (sys.nx(), sys.nw(), sys.ny(), sys.nz());
    let mut header = vec!["step".to_string(), "time".to_string()];
    let push_group = |prefix: &str, count: usize, header: &mut Vec<String>| {
        for i in 1..=count {
            header.push(format!("{prefix}{i}"));
        }
    };
    push_group("z", nz, &mut header);
    push_group("y_true", ny, &mut header);
    push_group("y_hat", ny, &mut header);
    push_group("y_err", ny, &mut header);
    push_group("x_true", nx, &mut header);
    push_group("x_hat", nx, &mut header);
    push_group("w_true", nw, &mut header);
    push_group("w_hat", nw, &mut header);

    let mut out = String::with_capacity(traj.len() * header.len() * 26);
    out.push_str(&header.join(","));
    out.push('\n');

    for (k, frame) in frames.iter().enumerate() {
        let mut row = Vec::with_capacity(header.len());
        row.push(k.to_string());
        row.push(format_float(k as f64 * sys.dt));
        let w_hat = sim::disturbance_estimate(frame);
        for v in traj.z[k].iter() {
            row.push(format_float(*v));
        }
        for v in traj.y_true[k].iter() {
            row.push(format_float(*v));
        }
        for v in frame.y_post.iter() {
            row.push(format_float(*v));
        }
        for (t, e) in traj.y_true[k].iter().zip(frame.y_post.iter()) {
            row.push(format_float(t - e));
        }
        for v in traj.x[k].iter() {
            row.push(format_float(*v));
        }
        for v in frame.x_post.iter() {
            row.push(format_float(*v));
        }
        for v in traj.w[k].iter() {
            row.push(format_float(*v));
        }
        for v in w_hat.iter() {
            row.push(format_float(*v));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    atomic_write(path, &out)
}

fn render_summary(results: &[EstimatorResult]) -> String {
    let join_floats = |v: &DVector<f64>| {
        v.iter()
            .map(|x| format_float(*x))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut out = String::from("{\n");
    for (i, res) in results.iter().enumerate() {
        out.push_str(&format!("  \"{}\": {{\n", res.kind.id()));
        out.push_str(&format!(
            "    \"y_err_var\": [{}],\n",
            join_floats(&res.stats.y_err_var)
        ));
        out.push_str(&format!(
            "    \"x_rms\": [{}],\n",
            join_floats(&res.stats.x_rms)
        ));
        out.push_str(&format!(
            "    \"w_rms\": {}\n",
            format_float(res.stats.w_rms)
        ));
        out.push_str(if i + 1 < results.len() { "  },\n" } else { "  }\n" });
    }
    out.push_str("}\n");
    out
}

/// The plot script written next to the CSVs. Static: it discovers which
/// estimator CSVs exist at plot time.
const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Plots for a feedkal run: truth vs estimates, estimate errors, and the
reconstructed disturbance. Reads the estimator CSVs next to this script and
saves PNGs in the same directory. Requires matplotlib."""

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
ESTIMATORS = [
    ("tv_corrected", "new"),
    ("ss_corrected", "new ss"),
    ("ss_legacy", "prev ss"),
]


def load(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {name: [float(r[name]) for r in rows] for name in rows[0]}


runs = {}
for est_id, legend in ESTIMATORS:
    path = os.path.join(HERE, est_id + ".csv")
    if os.path.exists(path):
        runs[est_id] = (legend, load(path))

if not runs:
    raise SystemExit("no estimator CSVs found next to this script")

first = next(iter(runs.values()))[1]
t = first["time"]
ny = sum(1 for name in first if name.startswith("y_true"))
nx = sum(1 for name in first if name.startswith("x_true"))
nw = sum(1 for name in first if name.startswith("w_true"))


def save(fig, name):
    out = os.path.join(HERE, name)
    fig.tight_layout()
    fig.savefig(out, dpi=130)
    plt.close(fig)
    print("wrote", out)


for i in range(1, ny + 1):
    fig, (top, bot) = plt.subplots(2, 1, sharex=True, figsize=(9, 6))
    top.plot(t, first["y_true%d" % i], "k-", lw=0.9, label="truth")
    for legend, cols in runs.values():
        top.plot(t, cols["y_hat%d" % i], lw=0.8, label=legend)
        bot.plot(t, cols["y_err%d" % i], lw=0.8, label=legend)
    top.set_ylabel("y%d" % i)
    top.legend(loc="best", fontsize=8)
    bot.set_ylabel("y%d error" % i)
    bot.set_xlabel("time")
    save(fig, "y%d.png" % i)

for i in range(1, nx + 1):
    fig, ax = plt.subplots(figsize=(9, 4))
    ax.plot(t, first["x_true%d" % i], "k-", lw=0.9, label="truth")
    for legend, cols in runs.values():
        ax.plot(t, cols["x_hat%d" % i], lw=0.8, label=legend)
    ax.set_ylabel("x%d" % i)
    ax.set_xlabel("time")
    ax.legend(loc="best", fontsize=8)
    save(fig, "x%d.png" % i)

for i in range(1, nw + 1):
    fig, ax = plt.subplots(figsize=(9, 4))
    ax.plot(t, first["w_true%d" % i], "k-", lw=0.9, label="truth")
    for legend, cols in runs.values():
        ax.plot(t, cols["w_hat%d" % i], lw=0.8, label=legend)
    ax.set_ylabel("w%d" % i)
    ax.set_xlabel("time")
    ax.legend(loc="best", fontsize=8)
    save(fig, "w%d.png" % i)
"#;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DiscArg {
    Euler,
    Zoh,
}

impl From<DiscArg> for DiscretizationMethod {
    fn from(value: DiscArg) -> Self {
        match value {
            DiscArg::Euler => DiscretizationMethod::Euler,
            DiscArg::Zoh => DiscretizationMethod::ZeroOrderHold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    Nominal,
    #[value(name = "randomwalk")]
    RandomWalk,
}

impl From<ScenarioArg> for ScenarioKind {
    fn from(value: ScenarioArg) -> Self {
        match value {
            ScenarioArg::Nominal => ScenarioKind::Nominal,
            ScenarioArg::RandomWalk => ScenarioKind::RandomWalkBias,
        }
    }
}

#[derive(Debug, clap::Args)]
struct SystemArgs {
    /// Path to the JSON system definition.
    #[arg(long)]
    system: PathBuf,
    /// Discretization step for continuous system files (overrides the
    /// file's dt).
    #[arg(long)]
    dt: Option<f64>,
    /// Discretization method for continuous system files.
    #[arg(long, value_enum, default_value_t = DiscArg::Euler)]
    disc: DiscArg,
}

#[derive(Debug, clap::Args)]
struct ScenarioArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Disturbance scenario to simulate.
    #[arg(long, value_enum, default_value_t = ScenarioArg::Nominal)]
    scenario: ScenarioArg,
    /// Number of simulation steps.
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    /// RNG seed; defaults to $FEEDKAL_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated estimator selection.
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_values_t = EstimatorKind::ALL
    )]
    estimators: Vec<EstimatorKind>,
    /// Initial covariance scale of the time-varying run: P0 = p0_scale * I.
    #[arg(long, default_value_t = 1.0)]
    p0_scale: f64,
    /// Per-step increment std of the random-walk bias scenario.
    #[arg(long, default_value_t = sim::DEFAULT_BIAS_STEP_STD)]
    bias_std: f64,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Directory the CSVs, summary.json, and plot.py are written to.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Parser)]
#[command(
    name = "feedkal",
    version,
    about = "Kalman filtering with minimum-variance output estimates under process-noise feedthrough"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the steady-state covariance; print gains and stability.
    Riccati(SystemArgs),
    /// Simulate, run estimators, and write CSV/JSON/plot artifacts.
    Run(RunArgs),
    /// Run estimators on one shared realization; print a comparison table.
    Compare(ScenarioArgs),
}

impl SystemArgs {
    fn into_config(self) -> RunConfig {
        let mut cfg = RunConfig::for_system(self.system);
        cfg.dt = self.dt;
        cfg.method = self.disc.into();
        cfg
    }
}

impl ScenarioArgs {
    fn into_config(self) -> RunConfig {
        let seed = resolve_seed(self.seed);
        let mut cfg = self.system.into_config();
        cfg.scenario = self.scenario.into();
        cfg.steps = self.steps;
        cfg.seed = seed;
        cfg.estimators = self.estimators;
        cfg.p0_scale = self.p0_scale;
        cfg.bias_step_std = self.bias_std;
        cfg
    }
}

/// Parses `args` (including the program name) and runs the selected command,
/// returning the process exit code. Reports go to stdout, errors to stderr.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version arrive as "errors" with exit code 0;
            // genuine usage errors are input errors.
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Riccati(args) => cmd_riccati(&args.into_config()).map(|r| println!("{r}")),
        Command::Run(args) => {
            let mut cfg = args.scenario.into_config();
            cfg.out_dir = Some(args.out);
            cmd_run(&cfg).map(|r| println!("{r}"))
        }
        Command::Compare(args) => cmd_compare(&args.into_config()).map(|r| println!("{r}")),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
