//! Command-line front end: `solve`, `sweep` and `conserved`.
//!
//! Settings are resolved as built-in defaults, then an optional JSON config
//! file, then command-line flags. Exit codes: 0 success, 1 numerical failure
//! (singular matrix, blow-up, no usable sweep candidate, I/O failure while
//! writing results), 2 usage or configuration error.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    conserved_i1, conserved_i2, error_norms, franke_shape, hardy_shape, log_spaced, sweep_shape,
    SweepOptions, SweepOutcome,
};
use crate::discretization::{NodeSet, Operators};
use crate::error::{DiscretizationError, IntegrationError};
use crate::gfkdv::GfKdvProblem;
use crate::integrator::{integrate, step_count, Trajectory};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::solutions::Preset;

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) | CliError::Io(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<IntegrationError> for CliError {
    fn from(e: IntegrationError) -> Self {
        match e {
            IntegrationError::BlowUp { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<DiscretizationError> for CliError {
    fn from(e: DiscretizationError) -> Self {
        match e {
            DiscretizationError::Singular { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedShape {
    Hardy,
    Franke,
}

/// Shape parameter as a number or one of the rule-of-thumb formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShapeChoice {
    Value(f64),
    Named(NamedShape),
}

impl ShapeChoice {
    pub fn resolve(&self, nodes: &NodeSet) -> Result<f64, CliError> {
        let shape = match self {
            ShapeChoice::Value(c) => *c,
            ShapeChoice::Named(NamedShape::Hardy) => {
                hardy_shape(nodes.as_slice()).map_err(|e| CliError::Usage(e.to_string()))?
            }
            ShapeChoice::Named(NamedShape::Franke) => {
                franke_shape(nodes.as_slice()).map_err(|e| CliError::Usage(e.to_string()))?
            }
        };
        if !(shape.is_finite() && shape > 0.0) {
            return Err(CliError::Usage(format!(
                "shape parameter must be positive, got {shape}"
            )));
        }
        Ok(shape)
    }
}

impl FromStr for ShapeChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hardy" => Ok(ShapeChoice::Named(NamedShape::Hardy)),
            "franke" => Ok(ShapeChoice::Named(NamedShape::Franke)),
            other => other
                .parse::<f64>()
                .map(ShapeChoice::Value)
                .map_err(|_| format!("expected a number, `hardy` or `franke`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Full description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Preset,
    pub kernel: KernelFamily,
    pub shape: ShapeChoice,
    pub k: f64,
    pub x0: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_every: usize,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub cond_cap: f64,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: Preset::Lax,
            kernel: KernelFamily::Gaussian,
            shape: ShapeChoice::Value(5451.0),
            k: 0.001,
            x0: 0.0,
            x_min: -6.0,
            x_max: 6.0,
            n: 121,
            dt: 0.01,
            t_end: 2.0,
            snapshot_every: 10,
            out: PathBuf::from("out"),
            format: OutputFormat::Csv,
            cond_cap: SweepOptions::DEFAULT_CONDITION_CAP,
            jobs: None,
        }
    }
}

/// Validated inputs of a run.
#[derive(Debug, Clone)]
pub struct Setup {
    pub nodes: NodeSet,
    pub problem: GfKdvProblem,
    pub steps: usize,
}

impl RunConfig {
    /// Reads a JSON config file. A summary written by `solve` is accepted too;
    /// its `config` member is used.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
        let body = match value.get("config") {
            Some(inner) if inner.is_object() => inner.clone(),
            _ => value,
        };
        serde_json::from_value(body)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Checks every precondition without touching the file system.
    pub fn setup(&self) -> Result<Setup, CliError> {
        let nodes = NodeSet::uniform(self.x_min, self.x_max, self.n)?;
        let problem = GfKdvProblem::preset(self.preset, self.k, self.x0, (self.x_min, self.x_max))
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let steps = step_count(0.0, self.t_end, self.dt)?;
        if self.snapshot_every == 0 {
            return Err(CliError::Usage(
                "--snapshot-every must be at least 1".into(),
            ));
        }
        if self.cond_cap.is_nan() || self.cond_cap <= 0.0 {
            return Err(CliError::Usage(format!(
                "--cond-cap must be positive, got {}",
                self.cond_cap
            )));
        }
        if self.jobs == Some(0) {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        Ok(Setup {
            nodes,
            problem,
            steps,
        })
    }

    pub fn kernel_spec(&self, nodes: &NodeSet) -> Result<KernelSpec, CliError> {
        let shape = self.shape.resolve(nodes)?;
        KernelSpec::new(self.kernel, shape).map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// Formats a float with the shortest representation that round-trips.
/// Non-finite values print as `inf`, `-inf` and `nan`.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:e}")
    }
}

/// serde adapter writing non-finite floats as the strings `inf`/`-inf`/`nan`.
pub mod lenient_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&super::format_f64(*v))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    #[serde(with = "lenient_f64")]
    pub max_error: f64,
    #[serde(with = "lenient_f64")]
    pub l2_error: f64,
    #[serde(with = "lenient_f64")]
    pub rms_error: f64,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub config: RunConfig,
    pub kernel: KernelSpec,
    pub n: usize,
    pub h: f64,
    pub steps: usize,
    pub t_final: f64,
    pub errors: Option<ErrorSummary>,
    #[serde(with = "lenient_f64")]
    pub condition: f64,
    pub ill_conditioned: bool,
    pub fill_distance: f64,
    pub i1_initial: f64,
    pub i1_final: f64,
    pub i2_initial: f64,
    pub i2_final: f64,
    pub wall_clock_seconds: f64,
}

/// A finished simulation with everything the commands report on.
pub struct SolveRun {
    pub setup: Setup,
    pub ops: Operators,
    pub trajectory: Trajectory,
}

/// Assembles operators and integrates the configured problem.
pub fn run_simulation(config: &RunConfig) -> Result<SolveRun, CliError> {
    let setup = config.setup()?;
    let kernel = config.kernel_spec(&setup.nodes)?;
    let ops = Operators::assemble(&setup.nodes, kernel)?;
    if ops.is_ill_conditioned() {
        eprintln!(
            "warning: interpolation matrix is ill-conditioned (cond = {})",
            format_f64(ops.condition())
        );
    }
    let u0 = setup.problem.sample_initial(setup.nodes.as_slice());
    let trajectory = integrate(
        &setup.problem,
        &ops,
        &u0,
        0.0,
        config.t_end,
        config.dt,
        config.snapshot_every,
    )?;
    Ok(SolveRun {
        setup,
        ops,
        trajectory,
    })
}

fn conserved_pair(run: &SolveRun, state: &[f64], preset: Preset) -> Result<(f64, f64), CliError> {
    let nodes = &run.setup.nodes;
    let numeric = |e: crate::error::AnalysisError| CliError::Numerical(e.to_string());
    Ok((
        conserved_i1(state, nodes).map_err(numeric)?,
        conserved_i2(state, nodes, &run.ops, preset).map_err(numeric)?,
    ))
}

fn prepare_output_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    fs::write(path, body).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct SnapshotRow {
    t: f64,
    x: f64,
    u_numeric: f64,
    u_exact: Option<f64>,
    error: Option<f64>,
}

fn snapshot_rows(run: &SolveRun) -> Vec<SnapshotRow> {
    let x = run.setup.nodes.as_slice();
    let mut rows = Vec::with_capacity(run.trajectory.len() * x.len());
    for (&t, state) in run.trajectory.times.iter().zip(&run.trajectory.states) {
        for (&xi, &ui) in x.iter().zip(state) {
            let exact = run.setup.problem.exact(xi, t);
            rows.push(SnapshotRow {
                t,
                x: xi,
                u_numeric: ui,
                u_exact: exact,
                error: exact.map(|e| (ui - e).abs()),
            });
        }
    }
    rows
}

/// CSV body of the snapshot table: `t,x,u_numeric,u_exact,error`.
pub fn snapshots_csv(run: &SolveRun) -> String {
    let mut out = String::from("t,x,u_numeric,u_exact,error\n");
    let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
    for r in snapshot_rows(run) {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            format_f64(r.t),
            format_f64(r.x),
            format_f64(r.u_numeric),
            opt(r.u_exact),
            opt(r.error)
        ));
    }
    out
}

/// `solve`: writes the snapshot table and `summary.json` under `config.out`.
pub fn cmd_solve(config: &RunConfig) -> Result<SolveSummary, CliError> {
    let started = Instant::now();
    let run = run_simulation(config)?;
    let nodes = &run.setup.nodes;
    let h = nodes.mean_spacing();
    let t_final = run.trajectory.final_time();

    let errors = match run.setup.problem.sample_exact(nodes.as_slice(), t_final) {
        Some(exact) => {
            let r = error_norms(run.trajectory.final_state(), &exact, h)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            Some(ErrorSummary {
                max_error: r.max_error,
                l2_error: r.l2_error,
                rms_error: r.rms_error,
            })
        }
        None => None,
    };
    let (i1_initial, i2_initial) =
        conserved_pair(&run, run.trajectory.initial_state(), config.preset)?;
    let (i1_final, i2_final) = conserved_pair(&run, run.trajectory.final_state(), config.preset)?;

    let summary = SolveSummary {
        config: config.clone(),
        kernel: run.ops.kernel(),
        n: nodes.len(),
        h,
        steps: run.setup.steps,
        t_final,
        errors,
        condition: run.ops.condition(),
        ill_conditioned: run.ops.is_ill_conditioned(),
        fill_distance: run.ops.fill_distance(),
        i1_initial,
        i1_final,
        i2_initial,
        i2_final,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };

    prepare_output_dir(&config.out)?;
    let table = config
        .out
        .join(format!("snapshots.{}", config.format.extension()));
    match config.format {
        OutputFormat::Csv => write_file(&table, &snapshots_csv(&run))?,
        OutputFormat::Json => write_file(&table, &to_json(&snapshot_rows(&run))?)?,
    }
    write_file(&config.out.join("summary.json"), &to_json(&summary)?)?;
    Ok(summary)
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Candidate shapes for `sweep`.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeList {
    Explicit(Vec<f64>),
    LogRange { min: f64, max: f64, count: usize },
}

impl ShapeList {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match self {
            ShapeList::Explicit(v) if v.is_empty() => {
                Err(CliError::Usage("empty shape list".into()))
            }
            ShapeList::Explicit(v) => Ok(v.clone()),
            ShapeList::LogRange { min, max, count } => {
                log_spaced(*min, *max, *count).map_err(|e| CliError::Usage(e.to_string()))
            }
        }
    }
}

impl FromStr for ShapeList {
    type Err = String;

    /// Parses `MIN:MAX:COUNT` as a log-spaced range.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, count] = parts.as_slice() else {
            return Err(format!("expected MIN:MAX:COUNT, got `{s}`"));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
        Ok(ShapeList::LogRange {
            min: num(min)?,
            max: num(max)?,
            count: count
                .trim()
                .parse()
                .map_err(|e| format!("`{count}`: {e}"))?,
        })
    }
}

#[derive(Serialize)]
struct SweepRecord {
    shape: f64,
    #[serde(with = "lenient_f64")]
    max_error: f64,
    #[serde(with = "lenient_f64")]
    l2_error: f64,
    #[serde(with = "lenient_f64")]
    rms_error: f64,
    #[serde(with = "lenient_f64")]
    condition: f64,
}

/// CSV body of a sweep: `shape,max_error,l2_error,rms_error,condition`.
pub fn sweep_csv(outcome: &SweepOutcome) -> String {
    let mut out = String::from("shape,max_error,l2_error,rms_error,condition\n");
    for r in &outcome.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            format_f64(r.shape),
            format_f64(r.max_error),
            format_f64(r.l2_error),
            format_f64(r.rms_error),
            format_f64(r.condition)
        ));
    }
    out
}

/// `sweep`: writes the sweep table under `config.out` and returns the outcome.
/// Fails with a numerical error when no candidate qualifies.
pub fn cmd_sweep(config: &RunConfig, shapes: &ShapeList) -> Result<SweepOutcome, CliError> {
    let setup = config.setup()?;
    let shapes = shapes.values()?;
    let options = SweepOptions {
        dt: config.dt,
        t_end: config.t_end,
        condition_cap: config.cond_cap,
        jobs: config.jobs,
    };
    let outcome = sweep_shape(
        &setup.problem,
        &setup.nodes,
        config.kernel,
        &shapes,
        &options,
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;

    prepare_output_dir(&config.out)?;
    let path = config
        .out
        .join(format!("sweep.{}", config.format.extension()));
    match config.format {
        OutputFormat::Csv => write_file(&path, &sweep_csv(&outcome))?,
        OutputFormat::Json => {
            let records: Vec<SweepRecord> = outcome
                .rows
                .iter()
                .map(|r| SweepRecord {
                    shape: r.shape,
                    max_error: r.max_error,
                    l2_error: r.l2_error,
                    rms_error: r.rms_error,
                    condition: r.condition,
                })
                .collect();
            write_file(&path, &to_json(&records)?)?
        }
    }
    if outcome.selected.is_none() {
        return Err(CliError::Numerical(
            "no candidate produced a finite error within the condition cap".into(),
        ));
    }
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservedRow {
    pub t: f64,
    pub i1: f64,
    pub i2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConservedReport {
    pub rows: Vec<ConservedRow>,
}

impl ConservedReport {
    fn relative_drift(&self, pick: impl Fn(&ConservedRow) -> f64) -> f64 {
        let first = pick(&self.rows[0]);
        self.rows
            .iter()
            .map(|r| ((pick(r) - first) / first).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|I₁(t) − I₁(0)| / |I₁(0)|` over the snapshots.
    pub fn i1_drift(&self) -> f64 {
        self.relative_drift(|r| r.i1)
    }

    pub fn i2_drift(&self) -> f64 {
        self.relative_drift(|r| r.i2)
    }
}

/// CSV body of the conserved-quantity table: `t,i1,i2`.
pub fn conserved_csv(report: &ConservedReport) -> String {
    let mut out = String::from("t,i1,i2\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{}\n",
            format_f64(r.t),
            format_f64(r.i1),
            format_f64(r.i2)
        ));
    }
    out
}

/// `conserved`: integrates and tabulates I₁ and I₂ at every snapshot.
pub fn cmd_conserved(config: &RunConfig) -> Result<ConservedReport, CliError> {
    let run = run_simulation(config)?;
    let rows = run
        .trajectory
        .times
        .iter()
        .zip(&run.trajectory.states)
        .map(|(&t, state)| {
            let (i1, i2) = conserved_pair(&run, state, config.preset)?;
            Ok(ConservedRow { t, i1, i2 })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let report = ConservedReport { rows };

    prepare_output_dir(&config.out)?;
    let path = config
        .out
        .join(format!("conserved.{}", config.format.extension()));
    match config.format {
        OutputFormat::Csv => write_file(&path, &conserved_csv(&report))?,
        OutputFormat::Json => write_file(&path, &to_json(&report.rows)?)?,
    }
    Ok(report)
}

#[derive(Debug, Parser)]
#[command(
    name = "molrbf",
    version,
    about = "Meshless RBF method-of-lines solver for fifth-order KdV solitons",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one configuration and write snapshots plus a JSON summary.
    Solve(CommonArgs),
    /// Tabulate error and condition number over a set of shape parameters.
    Sweep(SweepArgs),
    /// Track the conserved densities I1 and I2 along a run.
    Conserved(CommonArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated shape values.
    #[arg(long, value_delimiter = ',', conflicts_with = "log_range")]
    pub shapes: Option<Vec<f64>>,
    /// Log-spaced range MIN:MAX:COUNT.
    #[arg(long)]
    pub log_range: Option<ShapeList>,
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// JSON config file (a previous summary.json also works).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Equation: lax or sk.
    #[arg(long)]
    pub preset: Option<Preset>,
    /// Kernel family: mq, imq or ga.
    #[arg(long)]
    pub kernel: Option<KernelFamily>,
    /// Shape parameter value, or `hardy` / `franke`.
    #[arg(long)]
    pub shape: Option<ShapeChoice>,
    #[arg(long = "k")]
    pub k: Option<f64>,
    #[arg(long = "x0")]
    pub x0: Option<f64>,
    #[arg(long = "xmin")]
    pub x_min: Option<f64>,
    #[arg(long = "xmax")]
    pub x_max: Option<f64>,
    /// Number of nodes.
    #[arg(long = "n")]
    pub n: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub snapshot_every: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub cond_cap: Option<f64>,
    /// Worker threads for sweeps (default: available parallelism).
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl CommonArgs {
    /// Defaults, overridden by the config file, overridden by flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field.clone() { c.$field = v; })*
            };
        }
        take!(
            preset,
            kernel,
            shape,
            k,
            x0,
            x_min,
            x_max,
            n,
            dt,
            t_end,
            snapshot_every,
            out,
            format,
            cond_cap
        );
        if self.jobs.is_some() {
            c.jobs = self.jobs;
        }
        Ok(c)
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => {
            let config = args.resolve()?;
            let summary = cmd_solve(&config)?;
            if let Some(e) = &summary.errors {
                writeln!(
                    stdout,
                    "max_error {} l2_error {} rms_error {} condition {}",
                    format_f64(e.max_error),
                    format_f64(e.l2_error),
                    format_f64(e.rms_error),
                    format_f64(summary.condition)
                )?;
            }
        }
        Command::Sweep(args) => {
            let config = args.common.resolve()?;
            let shapes = match (args.shapes, args.log_range) {
                (Some(list), None) => ShapeList::Explicit(list),
                (None, Some(range)) => range,
                _ => {
                    return Err(CliError::Usage(
                        "sweep needs exactly one of --shapes or --log-range".into(),
                    ))
                }
            };
            let outcome = cmd_sweep(&config, &shapes)?;
            let selected = outcome
                .selected
                .expect("cmd_sweep fails without a selection");
            writeln!(stdout, "{}", format_f64(selected))?;
        }
        Command::Conserved(args) => {
            let config = args.resolve()?;
            let report = cmd_conserved(&config)?;
            let first = report.rows[0];
            let last = report.rows[report.rows.len() - 1];
            writeln!(
                stdout,
                "i1 initial {} final {} max relative drift {}",
                format_f64(first.i1),
                format_f64(last.i1),
                format_f64(report.i1_drift())
            )?;
            writeln!(
                stdout,
                "i2 initial {} final {} max relative drift {}",
                format_f64(first.i2),
                format_f64(last.i2),
                format_f64(report.i2_drift())
            )?;
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_SUCCESS
            };
        }
    };
    match execute(cli, &mut io::stdout().lock()) {
        Ok(()) => EXIT_SUCCESS,
        Err(e) => {
            eprintln!("molrbf: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(format_f64(f64::INFINITY), "inf");
        assert_eq!(format_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_f64(f64::NAN), "nan");
        for v in [4e-6, 0.1, -6.0, 8.470329472543003e-21, 0.0] {
            assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn shape_choice_parsing() {
        assert_eq!(
            "hardy".parse::<ShapeChoice>().unwrap(),
            ShapeChoice::Named(NamedShape::Hardy)
        );
        assert_eq!(
            "5451".parse::<ShapeChoice>().unwrap(),
            ShapeChoice::Value(5451.0)
        );
        assert!("wide".parse::<ShapeChoice>().is_err());
        let json = serde_json::to_string(&ShapeChoice::Named(NamedShape::Franke)).unwrap();
        assert_eq!(json, "\"franke\"");
        let back: ShapeChoice = serde_json::from_str("2e-5").unwrap();
        assert_eq!(back, ShapeChoice::Value(2e-5));
    }

    #[test]
    fn log_range_parsing() {
        let list: ShapeList = "10:1000:3".parse().unwrap();
        let v = list.values().unwrap();
        assert_eq!(v.len(), 3);
        assert!((v[1] - 100.0).abs() < 1e-12);
        assert!("10:1000".parse::<ShapeList>().is_err());
        let bad: ShapeList = "1000:10:3".parse().unwrap();
        assert!(bad.values().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::default().setup().is_ok());
        for bad in [
            RunConfig {
                n: 4,
                ..Default::default()
            },
            RunConfig {
                dt: 0.3,
                ..Default::default()
            },
            RunConfig {
                k: 0.0,
                ..Default::default()
            },
            RunConfig {
                snapshot_every: 0,
                ..Default::default()
            },
            RunConfig {
                jobs: Some(0),
                ..Default::default()
            },
        ] {
            assert!(matches!(bad.setup(), Err(CliError::Usage(_))), "{bad:?}");
        }
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"preset": "sk", "n": 61, "shape": "franke"}"#).unwrap();
        let args = CommonArgs {
            config: Some(path),
            n: Some(81),
            ..Default::default()
        };
        let c = args.resolve().unwrap();
        assert_eq!(c.preset, Preset::Sk);
        assert_eq!(c.n, 81);
        assert_eq!(c.shape, ShapeChoice::Named(NamedShape::Franke));
        assert_eq!(c.dt, 0.01);
    }

    #[test]
    fn unknown_config_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"nodes": 61}"#).unwrap();
        assert!(matches!(
            RunConfig::from_file(&path),
            Err(CliError::Usage(_))
        ));
    }
}
