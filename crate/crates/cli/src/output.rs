//! CSV/JSON rendering and atomic file output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use medwit_core::properties::{PropertyOutcome, Relation};
use medwit_core::witness::WitnessReport;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const COLUMNS: [&str; 15] = [
    "mode", "seed", "t", "p", "dim_A", "T", "dim_B", "comm_norm", "rhs_bound", "sup_bound", "measure",
    "delta_q", "lhs", "slack", "wall_ms",
];

pub const VERIFY_COLUMNS: [&str; 7] =
    ["property", "passed", "instances", "metric", "threshold", "relation", "failing_seeds"];

/// One CSV line. `delta_q`, `lhs` and `slack` are absent in bound mode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub mode: String,
    pub seed: Option<u64>,
    pub t: f64,
    pub p: Vec<f64>,
    #[serde(rename = "dim_A")]
    pub dim_a: usize,
    #[serde(rename = "T")]
    pub mediator_qubits: usize,
    #[serde(rename = "dim_B")]
    pub dim_b: usize,
    pub comm_norm: f64,
    pub rhs_bound: f64,
    pub sup_bound: f64,
    pub measure: String,
    pub delta_q: Option<f64>,
    pub lhs: Option<f64>,
    pub slack: Option<f64>,
    pub wall_ms: f64,
}

impl Row {
    pub fn from_report(mode: &str, r: &WitnessReport, wall_ms: f64) -> Self {
        Self {
            mode: mode.into(),
            seed: r.seed,
            t: r.t,
            p: r.p.clone(),
            dim_a: r.dim_a,
            mediator_qubits: r.mediator_qubits,
            dim_b: r.dim_b,
            comm_norm: r.comm_norm,
            rhs_bound: r.rhs_bound,
            sup_bound: r.sup_bound,
            measure: r.measure.clone(),
            delta_q: Some(r.delta_q),
            lhs: Some(r.lhs),
            slack: Some(r.slack),
            wall_ms,
        }
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// A uniform vector collapses to one number; otherwise values are ';'-joined.
pub fn p_cell(p: &[f64]) -> String {
    match p {
        [] => String::new(),
        [first, rest @ ..] if rest.iter().all(|x| x == first) => num(*first),
        _ => p.iter().map(|x| num(*x)).collect::<Vec<_>>().join(";"),
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn rows_csv(rows: &[Row]) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let cells = [
            quote(&r.mode),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            num(r.t),
            p_cell(&r.p),
            r.dim_a.to_string(),
            r.mediator_qubits.to_string(),
            r.dim_b.to_string(),
            num(r.comm_norm),
            num(r.rhs_bound),
            num(r.sup_bound),
            quote(&r.measure),
            opt_num(r.delta_q),
            opt_num(r.lhs),
            opt_num(r.slack),
            num(r.wall_ms),
        ];
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

fn relation(r: Relation) -> &'static str {
    match r {
        Relation::AtMost => "at_most",
        Relation::Above => "above",
    }
}

pub fn verify_csv(outcomes: &[PropertyOutcome]) -> String {
    let mut out = VERIFY_COLUMNS.join(",");
    out.push('\n');
    for o in outcomes {
        let seeds: Vec<String> = o.failing_seeds.iter().map(u64::to_string).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            o.name,
            o.passed,
            o.instances,
            num(o.metric),
            num(o.threshold),
            relation(o.relation),
            seeds.join(";")
        );
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Writes via a temporary file in the target directory, then renames, so a
/// reader never sees a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// CSV at `path`, JSON and manifest next to it with the same stem.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}
