//! The `tdho` command line: JSON experiment configs in, CSV/JSON artifacts
//! and a manifest out.
//!
//! Exit codes: 0 success, 1 error, 2 validation failure under `--strict`.

pub mod config;
mod jobs;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

pub use config::{ConfigError, ExperimentConfig, Job, KernelPath, Method};
pub use jobs::{run_job, JobOutput};

use crate::io::write_atomic;

pub const OUT_ENV: &str = "TDHO_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{module}: {message}")]
    Numeric {
        module: &'static str,
        message: String,
    },
    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub(crate) fn numeric(module: &'static str, e: impl std::fmt::Display) -> Self {
        CliError::Numeric {
            module,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tdho", version, about = "Time-dependent harmonic oscillator propagator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Kernel values on a (q_a, q_b) grid (job kernel-grid).
    Kernel(JobArgs),
    /// Fundamental pair u, v on [t_a, t_b] (job solve-f).
    Classical(JobArgs),
    /// Propagate a Gaussian wavepacket (job propagate).
    Propagate(JobArgs),
    /// Residual check of the closed-form solution (job validate).
    Validate(JobArgs),
    /// Kernel vs Crank–Nicolson vs time slicing (job oracle-compare).
    Compare(JobArgs),
    /// Run the job named in a config or manifest.
    Run(JobArgs),
}

/// Flags mirror the config keys; flags override the file.
#[derive(Debug, Args, Default)]
struct JobArgs {
    /// Config file (or a manifest from an earlier run).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Profile as inline JSON.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    mass: Option<f64>,
    #[arg(long, alias = "t_a", allow_negative_numbers = true)]
    t_a: Option<f64>,
    #[arg(long, alias = "t_b", allow_negative_numbers = true)]
    t_b: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, alias = "q_a_min", allow_negative_numbers = true)]
    q_a_min: Option<f64>,
    #[arg(long, alias = "q_a_max", allow_negative_numbers = true)]
    q_a_max: Option<f64>,
    #[arg(long, alias = "q_a_n")]
    q_a_n: Option<usize>,
    #[arg(long, alias = "q_b_min", allow_negative_numbers = true)]
    q_b_min: Option<f64>,
    #[arg(long, alias = "q_b_max", allow_negative_numbers = true)]
    q_b_max: Option<f64>,
    #[arg(long, alias = "q_b_n")]
    q_b_n: Option<usize>,
    /// robust | literal
    #[arg(long, alias = "kernel_path")]
    kernel_path: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, alias = "q_min", allow_negative_numbers = true)]
    q_min: Option<f64>,
    #[arg(long, alias = "q_max", allow_negative_numbers = true)]
    q_max: Option<f64>,
    #[arg(long, alias = "n_points")]
    n_points: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    center: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    momentum: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// kernel | crank-nicolson | time-sliced
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, alias = "n_slices")]
    n_slices: Option<usize>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, alias = "agreement_tol")]
    agreement_tol: Option<f64>,
    /// Exit with status 2 when a validation check fails.
    #[arg(long)]
    strict: bool,
    /// Output directory (overrides TDHO_OUT and the config).
    #[arg(long, alias = "output_dir")]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
}

impl JobArgs {
    fn flags(&self) -> Result<Map<String, Value>, ConfigError> {
        let mut m = Map::new();
        if let Some(p) = &self.profile {
            let v: Value = serde_json::from_str(p).map_err(|e| ConfigError {
                path: "$.profile".into(),
                message: format!("invalid JSON in --profile: {e}"),
            })?;
            m.insert("profile".into(), v);
        }
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                m.insert(k.into(), v);
            }
        };
        put("mass", self.mass.map(Value::from));
        put("t_a", self.t_a.map(Value::from));
        put("t_b", self.t_b.map(Value::from));
        put("tol", self.tol.map(Value::from));
        put("q_a_min", self.q_a_min.map(Value::from));
        put("q_a_max", self.q_a_max.map(Value::from));
        put("q_a_n", self.q_a_n.map(Value::from));
        put("q_b_min", self.q_b_min.map(Value::from));
        put("q_b_max", self.q_b_max.map(Value::from));
        put("q_b_n", self.q_b_n.map(Value::from));
        put("kernel_path", self.kernel_path.clone().map(Value::from));
        put("samples", self.samples.map(Value::from));
        put("q_min", self.q_min.map(Value::from));
        put("q_max", self.q_max.map(Value::from));
        put("n_points", self.n_points.map(Value::from));
        put("center", self.center.map(Value::from));
        put("momentum", self.momentum.map(Value::from));
        put("sigma", self.sigma.map(Value::from));
        put("method", self.method.clone().map(Value::from));
        put("dt", self.dt.map(Value::from));
        put("n_slices", self.n_slices.map(Value::from));
        put("h", self.h.map(Value::from));
        put("agreement_tol", self.agreement_tol.map(Value::from));
        put("strict", self.strict.then_some(Value::Bool(true)));
        put("name", self.name.clone().map(Value::from));
        Ok(m)
    }
}

/// Outcome of a completed run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub failure: Option<String>,
    pub exit_code: i32,
}

/// Runs one config and writes its artifacts and manifest to `config.output_dir`.
pub fn run(config: &ExperimentConfig) -> Result<RunReport, CliError> {
    let output = run_job(config)?;
    let dir = config.output_dir.clone();
    let mut files = Vec::new();
    let write = |path: &Path, bytes: &[u8]| {
        write_atomic(path, bytes).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    };
    for (name, bytes) in &output.files {
        let path = dir.join(name);
        write(&path, bytes)?;
        files.push(path);
    }
    let manifest = json!({
        "tool": "tdho",
        "version": env!("CARGO_PKG_VERSION"),
        "job": config.job.as_str(),
        "config_sha256": config.hash(),
        "config": config.to_value(),
        "outputs": output.files.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        "summary": output.summary,
        "validation": match &output.failure {
            Some(msg) => json!({"status": "FAIL", "message": msg}),
            None => json!({"status": "PASS"}),
        },
    });
    let manifest_path = dir.join(format!("{}.manifest.json", config.stem()));
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write(&manifest_path, text.as_bytes())?;
    let exit_code = if output.failure.is_some() && config.strict {
        2
    } else {
        0
    };
    Ok(RunReport {
        output_dir: dir,
        files,
        manifest: manifest_path,
        failure: output.failure,
        exit_code,
    })
}

fn job_of(command: &Command) -> (Option<Job>, &JobArgs) {
    match command {
        Command::Kernel(a) => (Some(Job::KernelGrid), a),
        Command::Classical(a) => (Some(Job::SolveF), a),
        Command::Propagate(a) => (Some(Job::Propagate), a),
        Command::Validate(a) => (Some(Job::Validate), a),
        Command::Compare(a) => (Some(Job::OracleCompare), a),
        Command::Run(a) => (None, a),
    }
}

fn resolve(command: &Command, env_out: Option<OsString>) -> Result<ExperimentConfig, CliError> {
    let (job, args) = job_of(command);
    let base = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
                path: path.clone(),
                message: e.to_string(),
            })?;
            serde_json::from_str(&text).map_err(|e| ConfigError {
                path: "$".into(),
                message: format!("invalid JSON in {}: {e}", path.display()),
            })?
        }
        None => Value::Object(Map::new()),
    };
    let mut value = config::overlay(base, args.flags()?);
    if let (Some(job), Value::Object(map)) = (job, &mut value) {
        match map.get("config").and_then(|c| c.get("job")).or_else(|| map.get("job")) {
            Some(existing) if existing != job.as_str() => {
                return Err(ConfigError {
                    path: "$.job".into(),
                    message: format!("config is for job {existing}, subcommand runs {}", job.as_str()),
                }
                .into());
            }
            _ => {}
        }
        if !map.contains_key("config") {
            map.insert("job".into(), Value::from(job.as_str()));
        }
    }
    let mut config = ExperimentConfig::from_value(value)?;
    if let Some(dir) = &args.output_dir {
        config.output_dir = dir.clone();
    } else if let Some(dir) = env_out.filter(|d| !d.is_empty()) {
        config.output_dir = PathBuf::from(dir);
    }
    Ok(config)
}

/// Parses `args` (program name first), runs the job and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = resolve(&cli.command, std::env::var_os(OUT_ENV)).and_then(|c| run(&c));
    match outcome {
        Ok(report) => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            println!("wrote {}", report.manifest.display());
            if let Some(msg) = &report.failure {
                eprintln!("validation: {msg}");
            }
            report.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
