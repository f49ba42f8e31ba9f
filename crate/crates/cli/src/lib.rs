//! `medwit` batch runner: config parsing, mode execution and output.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde_json::json;

use crate::config::Mode;
use crate::error::CliError;

pub const THREADS_ENV: &str = "MEDWIT_THREADS";

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ModeArg {
    Bound,
    Evolve,
    SweepT,
    SweepP,
    Verify,
    Randcheck,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Bound => Mode::Bound,
            ModeArg::Evolve => Mode::Evolve,
            ModeArg::SweepT => Mode::SweepT,
            ModeArg::SweepP => Mode::SweepP,
            ModeArg::Verify => Mode::Verify,
            ModeArg::Randcheck => Mode::Randcheck,
        }
    }
}

/// Bounds and checks correlation gain through a qubit-chain mediator.
#[derive(Debug, Parser)]
#[command(name = "medwit", version)]
pub struct Args {
    pub mode: ModeArg,
    /// TOML experiment file.
    #[arg(long)]
    pub config: PathBuf,
    /// CSV path; JSON and manifest are written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides seeds given in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub quiet: bool,
}

fn thread_count() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{THREADS_ENV}={v:?} is not a positive integer"))),
        },
    }
}

struct Written {
    csv: Option<PathBuf>,
    json: Option<PathBuf>,
}

fn write_outputs(plan: &config::Plan, outcome: &run::Outcome) -> Result<Written, CliError> {
    let Some(path) = plan.output.path.as_ref().map(PathBuf::from) else {
        std::io::stdout().write_all(outcome.csv.as_bytes())?;
        return Ok(Written { csv: None, json: None });
    };
    let mut written = Written { csv: None, json: None };
    if plan.output.csv {
        output::write_atomic(&path, outcome.csv.as_bytes())?;
        written.csv = Some(path.clone());
    }
    if plan.output.json {
        let json_path = output::sibling(&path, ".json");
        let mut text = serde_json::to_string_pretty(&outcome.json)
            .map_err(|e| CliError::Io(format!("serializing JSON: {e}")))?;
        text.push('\n');
        output::write_atomic(&json_path, text.as_bytes())?;
        written.json = Some(json_path);
    }
    Ok(written)
}

fn manifest_path(plan: &config::Plan) -> Option<PathBuf> {
    plan.output.path.as_ref().map(|p| output::sibling(Path::new(p), ".manifest.json"))
}

/// Runs one invocation and returns the process exit code.
pub fn run(args: Args) -> i32 {
    let started = Instant::now();
    let quiet = args.quiet;
    match run_inner(args, started) {
        Ok(summary) => {
            if !quiet {
                eprintln!("medwit: {summary}");
            }
            0
        }
        Err(e) => {
            eprintln!("medwit: {e}");
            e.exit_code()
        }
    }
}

fn run_inner(args: Args, started: Instant) -> Result<String, CliError> {
    let threads = thread_count()?;
    let (raw, bytes) = config::load(&args.config)?;
    let mode: Mode = args.mode.into();
    let plan = config::plan(&raw, mode, args.seed, args.out.as_ref().map(|p| p.display().to_string()))?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| run::execute(&plan))?;
    let written = write_outputs(&plan, &outcome)?;

    if let Some(path) = manifest_path(&plan) {
        let status = if outcome.failures.is_empty() { "ok" } else { "validation_failed" };
        let manifest = json!({
            "tool": "medwit",
            "cli_version": env!("CARGO_PKG_VERSION"),
            "core_version": medwit_core::VERSION,
            "mode": mode.as_str(),
            "config_path": args.config.display().to_string(),
            "config_sha256": output::sha256_hex(&bytes),
            "seed": plan.seed(),
            "threads": pool.current_num_threads(),
            "wall_ms": started.elapsed().as_secs_f64() * 1e3,
            "outputs": {
                "csv": written.csv.map(|p| p.display().to_string()),
                "json": written.json.map(|p| p.display().to_string()),
            },
            "status": status,
            "failures": outcome.failures,
            "stats": outcome.stats,
        });
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Io(format!("serializing manifest: {e}")))?;
        text.push('\n');
        output::write_atomic(&path, text.as_bytes())?;
    }

    if outcome.failures.is_empty() {
        Ok(outcome.summary)
    } else {
        Err(CliError::Validation(format!("failed: {}", outcome.failures.join(", "))))
    }
}
