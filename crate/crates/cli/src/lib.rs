//! Front end for the kernel, bound suite and solver: argument parsing,
//! run manifests and artifact emission.
//!
//! Every command writes `manifest.json` first, then its artifacts, into the
//! output directory (`--out`, overridden by `OUTPUT_DIR`). Files are written
//! through a temporary sibling and renamed into place.

pub mod config;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use ipl_core::bounds::{run_suite, BoundConfig, BoundReport, InequalityCheck};
use ipl_core::kernel::{b_bar_s, b_s, build_map_table, DEFAULT_INVERSION_TOL};
use ipl_core::solver::{
    convergence_study, entropy_monotonicity_check, moment_propagation_check, run_pair, StudyRow,
    TimeSeries, ENTROPY_SLACK,
};

use config::{ConvergeConfig, KernelEvalConfig, SolveConfig};

/// Inputs within this distance above π are read as π (ten-digit input of π rounds up).
const PI_INPUT_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] ipl_core::Error),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    /// 1: failed checks, 2: usage or config, 3: runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Core(ipl_core::Error::Config(_)) => 2,
            CliError::Io(_) | CliError::Core(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ipl", version, about = "Inverse-power-law kernel bounds and hard-sphere limit runs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (OUTPUT_DIR takes precedence).
    #[arg(long, default_value = "ipl-out")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate b_s and b̄_s over an s list and θ grid.
    KernelEval {
        #[command(flatten)]
        common: Common,
        /// Comma-separated s values in (0, 1); replaces the config list.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        s: Vec<f64>,
        /// Comma-separated θ values in (0, π]; replaces the config grid.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        theta: Vec<f64>,
    },
    /// Run the bound suite and write bound_report.json.
    VerifyBounds {
        #[command(flatten)]
        common: Common,
    },
    /// Inverse-power and hard-sphere flows from one initial datum.
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// O(s) convergence study over a list of s.
    Converge {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::KernelEval { .. } => "kernel-eval",
            Command::VerifyBounds { .. } => "verify-bounds",
            Command::Solve { .. } => "solve",
            Command::Converge { .. } => "converge",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::KernelEval { common, .. }
            | Command::VerifyBounds { common }
            | Command::Solve { common }
            | Command::Converge { common } => common,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Versions {
    pub tool: String,
    pub config_sha256: String,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub schema: u32,
    pub command: String,
    pub config_path: Option<String>,
    pub output_dir: String,
    pub seed: u64,
    pub versions: Versions,
    /// The effective configuration after defaults and flag overrides.
    pub config: serde_json::Value,
}

/// Resolved output directory: OUTPUT_DIR if set and nonempty, else `--out`.
pub fn output_dir(out: &Path) -> PathBuf {
    match std::env::var_os("OUTPUT_DIR") {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => out.to_path_buf(),
    }
}

/// Write via a temporary sibling and rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("artifacts serialize");
    bytes.push(b'\n');
    bytes
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// An output directory with its manifest already written.
pub struct Run {
    pub dir: PathBuf,
}

impl Run {
    fn start<C: Serialize>(command: &str, common: &Common, raw: Option<&[u8]>, cfg: &C, seed: u64) -> Result<Run, CliError> {
        let dir = output_dir(&common.out);
        std::fs::create_dir_all(&dir)?;
        let config = serde_json::to_value(cfg).expect("configs serialize");
        // without a file, hash the effective configuration
        let hashed = match raw {
            Some(bytes) => bytes.to_vec(),
            None => serde_json::to_vec(&config).expect("configs serialize"),
        };
        let manifest = RunManifest {
            schema: 1,
            command: command.to_string(),
            config_path: common.config.as_ref().map(|p| p.display().to_string()),
            output_dir: dir.display().to_string(),
            seed,
            versions: Versions {
                tool: format!("ipl {}", env!("CARGO_PKG_VERSION")),
                config_sha256: sha256_hex(&hashed),
            },
            config,
        };
        write_atomic(&dir.join("manifest.json"), &to_json(&manifest))?;
        Ok(Run { dir })
    }

    fn write(&self, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        write_atomic(&path, contents)?;
        Ok(path)
    }
}

fn load<T: serde::de::DeserializeOwned + Default>(common: &Common) -> Result<(T, Option<Vec<u8>>), CliError> {
    match &common.config {
        Some(path) => config::read(path).map(|(c, raw)| (c, Some(raw))),
        None => Ok((T::default(), None)),
    }
}

fn load_required<T: serde::de::DeserializeOwned>(common: &Common, command: &str) -> Result<(T, Vec<u8>), CliError> {
    match &common.config {
        Some(path) => config::read(path),
        None => Err(CliError::Usage(format!("{command} requires --config PATH"))),
    }
}

/// Dispatch a parsed command line; returns the artifact paths written.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let common = cli.command.common();
    match &cli.command {
        Command::KernelEval { s, theta, .. } => {
            let (mut cfg, raw): (KernelEvalConfig, _) = load(common)?;
            if !s.is_empty() {
                cfg.s = s.clone();
            }
            if !theta.is_empty() {
                cfg.theta = theta.clone();
            }
            cmd_kernel_eval(&cfg, common, raw.as_deref())
        }
        Command::VerifyBounds { .. } => {
            let (cfg, raw): (BoundConfig, _) = load(common)?;
            cmd_verify_bounds(&cfg, common, raw.as_deref()).map(|(paths, _)| paths)
        }
        Command::Solve { .. } => {
            let (cfg, raw) = load_required::<SolveConfig>(common, "solve")?;
            cmd_solve(&cfg, common, Some(&raw))
        }
        Command::Converge { .. } => {
            let (cfg, raw) = load_required::<ConvergeConfig>(common, "converge")?;
            cmd_converge(&cfg, common, Some(&raw))
        }
    }
}

/// Validated θ grid; values just above π are read as π.
fn theta_grid(theta: &[f64]) -> Result<Vec<f64>, CliError> {
    if theta.is_empty() {
        return Err(CliError::Usage("empty θ grid (give --theta or a config `theta` list)".into()));
    }
    theta
        .iter()
        .map(|&t| {
            if t > 0.0 && t <= PI {
                Ok(t)
            } else if t > PI && t <= PI + PI_INPUT_TOL {
                Ok(PI)
            } else {
                Err(CliError::Usage(format!("θ = {t} outside (0, π]")))
            }
        })
        .collect()
}

fn s_list(s: &[f64]) -> Result<(), CliError> {
    if s.is_empty() {
        return Err(CliError::Usage("empty s list (give --s or a config `s` list)".into()));
    }
    match s.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
        Some(v) => Err(CliError::Usage(format!("s = {v} outside (0, 1)"))),
        None => Ok(()),
    }
}

/// kernel_eval.csv: `s,theta,b_s,b_bar_s,quad_err,scaled_deviation`, rows in
/// input order (s outer, θ inner); the last column is θ^{2+2s}|b_s − ¼|/s.
pub fn cmd_kernel_eval(cfg: &KernelEvalConfig, common: &Common, raw: Option<&[u8]>) -> Result<Vec<PathBuf>, CliError> {
    s_list(&cfg.s)?;
    let thetas = theta_grid(&cfg.theta)?;
    let run = Run::start("kernel-eval", common, raw, cfg, 0)?;
    let mut csv = String::from("s,theta,b_s,b_bar_s,quad_err,scaled_deviation\n");
    for &s in &cfg.s {
        let table = build_map_table(s, cfg.table_nodes, cfg.tol.max(DEFAULT_INVERSION_TOL))?;
        for &theta in &thetas {
            let v = b_s(&table, theta)?;
            let bar = b_bar_s(&table, theta)?;
            let scaled = theta.powf(2.0 + 2.0 * s) * (v.b - 0.25).abs() / s;
            let _ = writeln!(csv, "{s:.16e},{theta:.16e},{:.16e},{bar:.16e},{:.16e},{scaled:.16e}", v.b, v.quad_err);
        }
    }
    Ok(vec![run.write("kernel_eval.csv", csv.as_bytes())?])
}

/// bound_report.json; fails with [`CliError::ChecksFailed`] after writing if any check fails.
pub fn cmd_verify_bounds(cfg: &BoundConfig, common: &Common, raw: Option<&[u8]>) -> Result<(Vec<PathBuf>, BoundReport), CliError> {
    if cfg.s_grid.is_empty() {
        return Err(CliError::Usage("empty s_grid".into()));
    }
    let run = Run::start("verify-bounds", common, raw, cfg, cfg.seed)?;
    let report = run_suite(cfg);
    let path = run.write("bound_report.json", &to_json(&report))?;
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok((vec![path], report))
}

/// Per-flow summary.
#[derive(Debug, Clone, Serialize)]
pub struct FlowSummary {
    pub kernel: String,
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub max_mass_defect: f64,
    pub max_energy_defect: f64,
    pub drift_flagged: bool,
    pub entropy_violations: usize,
    pub min_f: f64,
    pub checks: Vec<InequalityCheck>,
}

fn flow_summary(series: &TimeSeries) -> FlowSummary {
    let (mass_drift, energy_drift) = series.drift();
    let entropy = entropy_monotonicity_check(series, ENTROPY_SLACK);
    let mut checks = vec![];
    let entropy_violations = entropy.failures.len();
    checks.push(entropy);
    checks.extend(series.k_weights.iter().map(|&k| moment_propagation_check(series, k)));
    FlowSummary {
        kernel: series.kernel.clone(),
        mass_drift,
        energy_drift,
        max_mass_defect: series.max_mass_defect,
        max_energy_defect: series.max_energy_defect,
        drift_flagged: series.flagged(),
        entropy_violations,
        min_f: series.diagnostics.iter().map(|d| d.min_f).fold(f64::INFINITY, f64::min),
        checks,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub schema: u32,
    pub s: f64,
    pub t_end: f64,
    pub dt: f64,
    pub steps: usize,
    pub k_weights: Vec<f64>,
    /// sup_t |F^s|_{L¹_k}, per k.
    pub sup_error: Vec<f64>,
    /// |F^s(T)|_{L¹_k}, per k.
    pub error_at_end: Vec<f64>,
    pub inverse_power: FlowSummary,
    pub hard_sphere: FlowSummary,
}

/// Writes flow_s.csv, flow_0.csv, error.csv, initial.csv, final_s.csv,
/// final_0.csv and summary.json.
pub fn cmd_solve(cfg: &SolveConfig, common: &Common, raw: Option<&[u8]>) -> Result<Vec<PathBuf>, CliError> {
    let solver = cfg.solver();
    solver.validate()?;
    let run = Run::start("solve", common, raw, cfg, 0)?;
    let f_in = cfg.initial.sample(&solver)?;
    let pair = run_pair(&f_in, cfg.s, &solver)?;
    let summary = SolveSummary {
        schema: 1,
        s: cfg.s,
        t_end: solver.t_end,
        dt: pair.flow_0.dt,
        steps: pair.flow_0.times.len().saturating_sub(1),
        k_weights: solver.k_weights.clone(),
        sup_error: pair.error.sup(),
        error_at_end: pair.error.at_end(),
        inverse_power: flow_summary(&pair.flow_s),
        hard_sphere: flow_summary(&pair.flow_0),
    };
    Ok(vec![
        run.write("initial.csv", f_in.to_csv().as_bytes())?,
        run.write("flow_s.csv", pair.flow_s.to_csv().as_bytes())?,
        run.write("flow_0.csv", pair.flow_0.to_csv().as_bytes())?,
        run.write("error.csv", pair.error.to_csv().as_bytes())?,
        run.write("final_s.csv", pair.flow_s.last().to_csv().as_bytes())?,
        run.write("final_0.csv", pair.flow_0.last().to_csv().as_bytes())?,
        run.write("summary.json", &to_json(&summary))?,
    ])
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergeSummary {
    pub schema: u32,
    pub t_end: f64,
    pub dt: f64,
    pub k_weights: Vec<f64>,
    pub rows: Vec<StudyRow>,
    pub ratio_max_min: Vec<f64>,
    pub growth_flagged: Vec<bool>,
    pub floor: Vec<StudyRow>,
    pub floor_margin: Vec<f64>,
    pub hard_sphere: FlowSummary,
}

/// Writes study.csv, flow_0.csv, error_s<s>.csv per s and summary.json.
pub fn cmd_converge(cfg: &ConvergeConfig, common: &Common, raw: Option<&[u8]>) -> Result<Vec<PathBuf>, CliError> {
    let solver = cfg.solver();
    solver.validate()?;
    let run = Run::start("converge", common, raw, cfg, 0)?;
    let f_in = cfg.initial.sample(&solver)?;
    let study = convergence_study(&f_in, &cfg.s_list, &solver)?;
    let mut paths = vec![
        run.write("study.csv", study.to_csv().as_bytes())?,
        run.write("flow_0.csv", study.hard_sphere.to_csv().as_bytes())?,
    ];
    for series in &study.error_series {
        paths.push(run.write(&format!("error_s{}.csv", series.s), series.to_csv().as_bytes())?);
    }
    let summary = ConvergeSummary {
        schema: 1,
        t_end: study.t_end,
        dt: study.dt,
        k_weights: study.k_weights.clone(),
        rows: study.rows.clone(),
        ratio_max_min: study.ratio_max_min.clone(),
        growth_flagged: study.growth_flagged.clone(),
        floor: study.floor.clone(),
        floor_margin: study.floor_margin.clone(),
        hard_sphere: flow_summary(&study.hard_sphere),
    };
    paths.push(run.write("summary.json", &to_json(&summary))?);
    Ok(paths)
}

/// Parse `args`, run, print artifact paths; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("ipl {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
