//! Command-line front end for the `engine` binary.
//!
//! ```text
//! engine <spectrum|ness|sambe|optics|verify> --model <path> --out <path>
//!        [--slices N] [--cutoff L] [--seed S] [--json]
//! ```
//!
//! A model document may embed a `"run"` object whose keys mirror the flags
//! (`slices`, `scheme`, `t0`, `cutoff`, `mode`, `seed`, `ensemble_size`,
//! `linear`, `strong_field`, `tolerances`); flags take precedence. On failure
//! the command writes `<out>.error.json` and exits with one of the codes in
//! [`exit`].

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::model::{LindbladModel, Violation};
use crate::optics::{self, OpticsConfig, TwoBandModel};
use crate::propagator::{sample_period, PropagatorConfig, Scheme};
use crate::sambe::{self, SambeConfig, SambeMode};
use crate::spectral::{self, decompose_with, extract_ness_from_samples, NessOptions, SpectralTolerance};
use crate::superop::{SuperKind, Superoperator};
use crate::verify::{self, EnsembleConfig};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Bad flags, run section or environment; unsupported feature requested.
    pub const CONFIG: i32 = 2;
    /// Input is not valid JSON or does not match the document schema.
    pub const PARSE: i32 = 3;
    /// Input parsed but violates model invariants (e.g. a negative rate).
    pub const VALIDATION: i32 = 4;
    /// A numerical stage failed (no convergence, integrity, extraction).
    pub const NUMERICAL: i32 = 5;
    /// `verify` ran but at least one check failed.
    pub const CHECK_FAILED: i32 = 6;
    /// Reading input or writing output failed.
    pub const IO: i32 = 7;
}

pub const DEFAULT_CUTOFF: usize = 4;

#[derive(Debug, Parser)]
#[command(name = "engine", version, about = "Floquet-Lindblad spectral and optics engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum CommandKind {
    Spectrum,
    Ness,
    Sambe,
    Optics,
    Verify,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Floquet map spectrum as CSV.
    Spectrum(RunArgs),
    /// Periodic steady state trajectory as CSV.
    Ness(RunArgs),
    /// Extended-space quasi-energies (closed models) or steady harmonics.
    Sambe(RunArgs),
    /// Two-band optical response per k-point with totals.
    Optics(RunArgs),
    /// Randomized theorem suite.
    Verify(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub slices: Option<usize>,
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write `<out>.json`.
    #[arg(long)]
    pub json: bool,
    /// `midpoint` or `endpoint`.
    #[arg(long)]
    pub scheme: Option<String>,
    /// `full` or `rwa` (sambe).
    #[arg(long)]
    pub mode: Option<String>,
    /// Ensemble size (verify).
    #[arg(long)]
    pub size: Option<usize>,
    /// Export the response at Ω as well (optics).
    #[arg(long)]
    pub linear: bool,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub steady: Option<f64>,
    pub modulus: Option<f64>,
    pub cluster: Option<f64>,
    pub rank: Option<f64>,
    pub psd: Option<f64>,
}

/// The optional `"run"` object of a model document.
#[derive(Debug, Clone, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub command: Option<String>,
    pub slices: Option<usize>,
    pub scheme: Option<String>,
    pub t0: Option<f64>,
    pub cutoff: Option<usize>,
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub ensemble_size: Option<usize>,
    pub linear: Option<bool>,
    pub strong_field: Option<bool>,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub model_path: Option<PathBuf>,
    pub output_path: PathBuf,
    pub propagator: PropagatorConfig,
    pub sambe: SambeConfig,
    pub seed: u64,
    pub ensemble_size: usize,
    pub spectral: SpectralTolerance,
    pub ness: NessOptions,
    pub json: bool,
    pub linear: bool,
    pub strong_field: bool,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Spectrum => "spectrum",
            CommandKind::Ness => "ness",
            CommandKind::Sambe => "sambe",
            CommandKind::Optics => "optics",
            CommandKind::Verify => "verify",
        }
    }
}

impl Command {
    fn split(self) -> (CommandKind, RunArgs) {
        match self {
            Command::Spectrum(a) => (CommandKind::Spectrum, a),
            Command::Ness(a) => (CommandKind::Ness, a),
            Command::Sambe(a) => (CommandKind::Sambe, a),
            Command::Optics(a) => (CommandKind::Optics, a),
            Command::Verify(a) => (CommandKind::Verify, a),
        }
    }
}

/// Reads the document at `path`, returning it without its `"run"` key.
fn read_document(path: &Path) -> Result<(Value, RunSection)> {
    let text = fs::read_to_string(path)?;
    let mut doc: Value = serde_json::from_str(&text)?;
    let run = match doc.as_object_mut().and_then(|o| o.remove("run")) {
        Some(v) => serde_json::from_value(v).map_err(|e| Error::Config(format!("run section: {e}")))?,
        None => RunSection::default(),
    };
    Ok((doc, run))
}

fn resolve(kind: CommandKind, args: &RunArgs, run: &RunSection) -> Result<RunConfig> {
    if let Some(c) = &run.command {
        if c != kind.name() {
            return Err(Error::Config(format!(
                "run section is for '{c}' but '{}' was requested",
                kind.name()
            )));
        }
    }
    let mut propagator = PropagatorConfig::default();
    if let Some(s) = args.slices.or(run.slices) {
        propagator.slices_per_period = s;
    }
    if let Some(s) = args.scheme.as_deref().or(run.scheme.as_deref()) {
        propagator.scheme = s.parse::<Scheme>()?;
    }
    if let Some(t0) = run.t0 {
        propagator.t0 = t0;
    }
    propagator.validate()?;

    let mode = match args.mode.as_deref().or(run.mode.as_deref()) {
        Some(m) => m.parse::<SambeMode>()?,
        None => SambeMode::Full,
    };
    let sambe = SambeConfig {
        cutoff: args.cutoff.or(run.cutoff).unwrap_or(DEFAULT_CUTOFF),
        mode,
    };

    let t = &run.tolerances;
    let mut spectral = SpectralTolerance::default();
    spectral.steady = t.steady.unwrap_or(spectral.steady);
    spectral.modulus = t.modulus.unwrap_or(spectral.modulus);
    spectral.cluster = t.cluster.unwrap_or(spectral.cluster);
    spectral.rank = t.rank.unwrap_or(spectral.rank);
    spectral.validate()?;
    let mut ness = NessOptions::default();
    if let Some(p) = t.psd {
        if !(p >= 0.0) {
            return Err(Error::Config(format!("psd tolerance must be nonnegative, got {p}")));
        }
        ness.psd_tol = p;
    }

    Ok(RunConfig {
        command: kind,
        model_path: args.model.clone(),
        output_path: args.out.clone(),
        propagator,
        sambe,
        seed: args.seed.or(run.seed).unwrap_or(verify::DEFAULT_SEED),
        ensemble_size: args.size.or(run.ensemble_size).unwrap_or(verify::DEFAULT_ENSEMBLE),
        spectral,
        ness,
        json: args.json,
        linear: args.linear || run.linear.unwrap_or(false),
        strong_field: run.strong_field.unwrap_or(false),
    })
}

/// What a successful command writes: the main file, its JSON mirror and the
/// exit status (nonzero only for failed verification).
#[derive(Debug, Clone)]
pub struct Output {
    pub main: Vec<u8>,
    pub mirror: Value,
    pub status: i32,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::KPoint { source, .. } => exit_code(source),
        Error::Config(_) | Error::Unsupported(_) => exit::CONFIG,
        Error::Parse(_) => exit::PARSE,
        Error::InvalidModel(_) | Error::ModelData(_) | Error::Dimension(_) => exit::VALIDATION,
        Error::NoConvergence { .. }
        | Error::Integrity(_)
        | Error::Extraction(_)
        | Error::Contract(_)
        | Error::DegenerateSteadySpace(_)
        | Error::Domain(_) => exit::NUMERICAL,
        Error::Io(_) => exit::IO,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Dimension(_) => "dimension",
        Error::NoConvergence { .. } => "no_convergence",
        Error::InvalidModel(_) => "invalid_model",
        Error::Domain(_) => "domain",
        Error::Config(_) => "config",
        Error::Integrity(_) => "integrity",
        Error::Extraction(_) => "extraction",
        Error::Contract(_) => "contract",
        Error::DegenerateSteadySpace(_) => "degenerate_steady_space",
        Error::Unsupported(_) => "unsupported",
        Error::ModelData(_) => "model_data",
        Error::KPoint { .. } => "k_point",
        Error::Parse(_) => "parse",
        Error::Io(_) => "io",
    }
}

/// Machine-readable record written to `<out>.error.json`.
pub fn error_record(e: &Error) -> Value {
    let mut rec = json!({
        "exit_code": exit_code(e),
        "kind": error_kind(e),
        "message": e.to_string(),
    });
    match e {
        Error::InvalidModel(report) => {
            let list: Vec<Value> = report
                .violations
                .iter()
                .map(|v| match v {
                    Violation::NegativeRate { jump, rate } => {
                        json!({ "message": v.to_string(), "jump": jump, "rate": rate })
                    }
                    Violation::NonHermitian { l, .. } | Violation::MissingConjugateHarmonic { l } => {
                        json!({ "message": v.to_string(), "harmonic": l })
                    }
                    _ => json!({ "message": v.to_string() }),
                })
                .collect();
            rec["violations"] = Value::Array(list);
        }
        Error::KPoint { index, k, source } => {
            rec["k_index"] = json!(index);
            rec["k"] = json!(k);
            rec["cause"] = error_record(source);
        }
        Error::NoConvergence { iterations, lo, hi, dim } => {
            rec["diagnostics"] = json!({ "iterations": iterations, "lo": lo, "hi": hi, "dim": dim });
        }
        _ => {}
    }
    rec
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn error_path(out: &Path) -> PathBuf {
    with_suffix(out, ".error.json")
}

pub fn json_path(out: &Path) -> PathBuf {
    with_suffix(out, ".json")
}

/// Caps rayon's global pool from `ENGINE_THREADS` (0 or unset = automatic).
fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("ENGINE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("ENGINE_THREADS must be a nonnegative integer, got '{v}'")))?;
    if n > 0 {
        // A second initialization in the same process (tests) is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    let (kind, args) = cli.command.split();
    let out = args.out.clone();
    let result = configure_threads().and_then(|_| run(kind, &args));
    match result {
        Ok(o) => match write_outputs(&out, &o, args.json) {
            Ok(()) => o.status,
            Err(e) => report_error(&out, &e),
        },
        Err(e) => report_error(&out, &e),
    }
}

fn report_error(out: &Path, e: &Error) -> i32 {
    let code = exit_code(e);
    eprintln!("error: {e}");
    let rec = serde_json::to_string_pretty(&error_record(e)).unwrap_or_default();
    if let Err(w) = fs::write(error_path(out), rec) {
        eprintln!("error: could not write error record: {w}");
    }
    code
}

fn write_outputs(out: &Path, o: &Output, json: bool) -> Result<()> {
    fs::write(out, &o.main)?;
    if json {
        fs::write(json_path(out), serde_json::to_string_pretty(&o.mirror)?)?;
    }
    let stale = error_path(out);
    if stale.exists() {
        fs::remove_file(stale)?;
    }
    Ok(())
}

fn run(kind: CommandKind, args: &RunArgs) -> Result<Output> {
    if kind == CommandKind::Verify {
        let run = match &args.model {
            Some(p) => read_document(p)?.1,
            None => RunSection::default(),
        };
        return run_verify(&resolve(kind, args, &run)?);
    }
    let path = args
        .model
        .as_ref()
        .ok_or_else(|| Error::Config(format!("'{}' needs --model", kind.name())))?;
    let (doc, run) = read_document(path)?;
    let cfg = resolve(kind, args, &run)?;
    match kind {
        CommandKind::Optics => run_optics(&cfg, doc),
        _ => {
            let file: crate::model::ModelFile = serde_json::from_value(doc)?;
            let model = file.into_model()?;
            model.ensure_valid()?;
            match kind {
                CommandKind::Spectrum => run_spectrum(&cfg, &model),
                CommandKind::Ness => run_ness(&cfg, &model),
                _ => run_sambe(&cfg, &model),
            }
        }
    }
}

fn propagator_json(cfg: &RunConfig) -> Value {
    json!({
        "slices_per_period": cfg.propagator.slices_per_period,
        "scheme": format!("{:?}", cfg.propagator.scheme).to_lowercase(),
        "t0": cfg.propagator.t0,
    })
}

fn floquet_map(cfg: &RunConfig, model: &LindbladModel, samples: usize) -> Result<(crate::propagator::SampledPeriod, Superoperator)> {
    let sampled = sample_period(model, &cfg.propagator, samples)?;
    let uf = Superoperator::new(model.dim(), sampled.floquet().clone(), SuperKind::Map)?;
    Ok((sampled, uf))
}

pub fn run_spectrum(cfg: &RunConfig, model: &LindbladModel) -> Result<Output> {
    let (_, uf) = floquet_map(cfg, model, 1)?;
    let s = decompose_with(&uf, &cfg.spectral)?;
    let mut main = Vec::new();
    spectral::write_spectrum_csv(&s, &mut main)?;
    let mirror = json!({
        "command": "spectrum",
        "dim": model.dim(),
        "omega": model.omega(),
        "period": model.period(),
        "propagator": propagator_json(cfg),
        "condition_estimate": s.condition_estimate,
        "max_residual": s.max_residual,
        "sweeps": s.sweeps,
        "rows": s.rows(),
    });
    Ok(Output { main, mirror, status: exit::OK })
}

fn entry_columns(n: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for j in 0..n {
        for i in 0..n {
            cols.push(format!("re_rho_{i}{j}"));
            cols.push(format!("im_rho_{i}{j}"));
        }
    }
    cols
}

fn entry_values(t: f64, m: &CMatrix) -> Vec<String> {
    let mut row = vec![t.to_string()];
    for z in m.iter() {
        row.push(z.re.to_string());
        row.push(z.im.to_string());
    }
    row
}

pub fn run_ness(cfg: &RunConfig, model: &LindbladModel) -> Result<Output> {
    let samples = if model.is_static() || cfg.propagator.slices_per_period.is_multiple_of(cfg.ness.samples) {
        cfg.ness.samples
    } else {
        return Err(Error::Config(format!(
            "slices per period ({}) must be a multiple of {} trajectory samples",
            cfg.propagator.slices_per_period, cfg.ness.samples
        )));
    };
    let (sampled, uf) = floquet_map(cfg, model, samples)?;
    let s = decompose_with(&uf, &cfg.spectral)?;
    let ness = extract_ness_from_samples(&s, &sampled, &cfg.ness)?;
    let n = model.dim();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(entry_columns(n))?;
    for (t, rho) in &ness.trajectory {
        w.write_record(entry_values(*t, rho.mat()))?;
    }
    let main = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let rho0: Vec<Vec<[f64; 2]>> = (0..n)
        .map(|i| (0..n).map(|j| [ness.rho0.mat()[(i, j)].re, ness.rho0.mat()[(i, j)].im]).collect())
        .collect();
    let mirror = json!({
        "command": "ness",
        "propagator": propagator_json(cfg),
        "rho0": rho0,
        "fixed_point_residual": ness.fixed_point_residual,
        "periodicity_defect": ness.periodicity_defect(),
        "steady_dimension": ness.steady_dimension,
        "evaluations": ness.evaluations,
        "min_eigenvalue": ness.min_eigenvalue,
        "trajectory_samples": ness.trajectory.len(),
    });
    Ok(Output { main, mirror, status: exit::OK })
}

pub fn run_sambe(cfg: &RunConfig, model: &LindbladModel) -> Result<Output> {
    let sc = &cfg.sambe;
    let mode = format!("{:?}", sc.mode).to_lowercase();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mirror = if model.is_closed() {
        let sf = sambe::build_sf_hamiltonian(model, sc)?;
        let qe = sambe::sf_quasienergies(&sf)?;
        w.write_record(["index", "epsilon", "edge_weight", "converged"])?;
        for (i, q) in qe.iter().enumerate() {
            w.write_record([i.to_string(), q.epsilon.to_string(), q.edge_weight.to_string(), q.converged.to_string()])?;
        }
        json!({
            "command": "sambe",
            "kind": "quasienergies",
            "cutoff": sc.cutoff,
            "mode": mode,
            "quasienergies": qe.iter().map(|q| json!({
                "epsilon": q.epsilon, "edge_weight": q.edge_weight, "converged": q.converged
            })).collect::<Vec<_>>(),
        })
    } else {
        let st = sambe::sf_steady_state(model, sc)?;
        w.write_record(["l", "i", "j", "re", "im"])?;
        let mut blocks = serde_json::Map::new();
        for (l, b) in &st.blocks {
            for j in 0..b.ncols() {
                for i in 0..b.nrows() {
                    let z = b[(i, j)];
                    w.write_record([l.to_string(), i.to_string(), j.to_string(), z.re.to_string(), z.im.to_string()])?;
                }
            }
            let rows: Vec<Vec<[f64; 2]>> = (0..b.nrows())
                .map(|i| (0..b.ncols()).map(|j| [b[(i, j)].re, b[(i, j)].im]).collect())
                .collect();
            blocks.insert(l.to_string(), json!(rows));
        }
        json!({
            "command": "sambe",
            "kind": "steady_state",
            "cutoff": sc.cutoff,
            "mode": mode,
            "edge_weight": st.edge_weight,
            "converged": st.converged,
            "blocks": blocks,
        })
    };
    let main = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(Output { main, mirror, status: exit::OK })
}

pub fn run_optics(cfg: &RunConfig, doc: Value) -> Result<Output> {
    let beta_given = doc.get("beta").is_some_and(|b| !b.is_null());
    let file: optics::BandFile = serde_json::from_value(doc)?;
    let model: TwoBandModel = file.into_model()?;
    let resp = optics::sweep_with(&model, &OpticsConfig { strong_field: cfg.strong_field })?;
    let mut main = Vec::new();
    if !beta_given {
        main.extend_from_slice(b"# beta not given; zero-temperature default applied\n");
    }
    optics::write_optics_csv(&resp, cfg.linear, &mut main)?;
    let mut mirror = serde_json::to_value(&resp)?;
    mirror["command"] = json!("optics");
    mirror["beta"] = if model.beta.is_finite() { json!(model.beta) } else { json!("inf") };
    Ok(Output { main, mirror, status: exit::OK })
}

pub fn run_verify(cfg: &RunConfig) -> Result<Output> {
    let ens = EnsembleConfig {
        size: cfg.ensemble_size,
        seed: cfg.seed,
        ..Default::default()
    };
    let report = verify::run_verify(&ens, &cfg.propagator)?;
    let status = if report.passed() { exit::OK } else { exit::CHECK_FAILED };
    let mut mirror = serde_json::to_value(&report)?;
    mirror["command"] = json!("verify");
    mirror["passed"] = json!(report.passed());
    Ok(Output { main: report.to_string().into_bytes(), mirror, status })
}
