//! Executes a validated [`Plan`] and renders its outputs.

use std::time::Instant;

use medwit_core::correlations::InitialBoundOptions;
use medwit_core::decoherence::{dephase_hamiltonians, sweep_p, DephasingConfig};
use medwit_core::dense::{spectral_norm, to_dense};
use medwit_core::hamiltonians::{random_ensemble, EnsembleKind};
use medwit_core::pauli::commutator;
use medwit_core::properties::{random_instance, run_property, PropertyOutcome, PROPERTY_NAMES};
use medwit_core::states::random_product_state;
use medwit_core::witness::{bound_sup, BoundSpectrum, Experiment, WitnessReport};
use medwit_core::{OperatorSum, SystemLayout};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Mode, Plan, Setup};
use crate::error::CliError;
use crate::output::{rows_csv, verify_csv, Row};

/// Rendered results plus any property violations found along the way.
#[derive(Debug)]
pub struct Outcome {
    pub csv: String,
    pub json: Value,
    /// Names of failed checks; non-empty means exit 3.
    pub failures: Vec<String>,
    /// Mode-specific counters for the manifest.
    pub stats: Value,
    pub summary: String,
}

fn elapsed_ms(start: Instant, record: bool) -> f64 {
    if record {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    }
}

fn setup(plan: &Plan) -> &Setup {
    plan.setup.as_ref().expect("plan validated a setup for this mode")
}

/// Hamiltonians after the configured dephasing, plus the p vector to report.
fn dephased(plan: &Plan, s: &Setup) -> Result<(OperatorSum, OperatorSum, Vec<f64>), CliError> {
    let q = s.layout.mediator_qubits();
    match &plan.p {
        Some(p) => {
            let cfg = DephasingConfig::new(p.clone(), q)?;
            let (a, b) = dephase_hamiltonians(&s.h_am, &s.h_mb, &cfg)?;
            Ok((a, b, p.clone()))
        }
        None => Ok((s.h_am.clone(), s.h_mb.clone(), vec![1.0; q])),
    }
}

fn experiment(plan: &Plan, s: &Setup) -> Result<Experiment, CliError> {
    let (h_am, h_mb, p) = dephased(plan, s)?;
    let rho0 = s.rho0.clone().expect("plan validated an initial state");
    Ok(Experiment::new(h_am, h_mb, rho0, plan.bound.for_layout(&s.layout), plan.measure.clone(), &plan.initial)?
        .with_p(p)
        .with_seed(s.seed))
}

fn report_json(mode: Mode, rows: &[Row], reports: &[WitnessReport]) -> Value {
    json!({ "mode": mode.as_str(), "rows": rows, "reports": reports })
}

/// Slack below this is counted as a violation; smaller negatives are round-off
/// on rows where both sides vanish.
pub const SLACK_TOL: f64 = 1e-10;

fn witness_outcome(plan: &Plan, rows: Vec<Row>, reports: Vec<WitnessReport>) -> Outcome {
    let min_slack = rows.iter().filter_map(|r| r.slack).fold(f64::INFINITY, f64::min);
    let strict = rows.iter().filter(|r| r.slack.is_some_and(|s| s < 0.0)).count();
    let negative = rows.iter().filter(|r| r.slack.is_some_and(|s| s < -SLACK_TOL)).count();
    Outcome {
        csv: rows_csv(&rows),
        json: report_json(plan.mode, &rows, &reports),
        failures: Vec::new(),
        stats: json!({
            "rows": rows.len(),
            "negative_slack_rows": negative,
            "slack_tolerance": SLACK_TOL,
            "strictly_negative_slack_rows": strict,
        }),
        summary: if min_slack.is_finite() {
            format!("{} rows, min slack {min_slack:.6e}, {negative} below -{SLACK_TOL:e}", rows.len())
        } else {
            format!("{} rows", rows.len())
        },
    }
}

fn run_bound(plan: &Plan) -> Result<Outcome, CliError> {
    let s = setup(plan);
    let start = Instant::now();
    let (h_am, h_mb, p) = dephased(plan, s)?;
    let config = plan.bound.for_layout(&s.layout);
    config.validate()?;
    let k = to_dense(&commutator(&h_am, &h_mb)?)?;
    let spectrum = BoundSpectrum::new(&k)?;
    let t = plan.t.expect("plan validated t");
    let row = Row {
        mode: plan.mode.as_str().into(),
        seed: s.seed,
        t,
        p,
        dim_a: s.layout.dim_a(),
        mediator_qubits: s.layout.mediator_qubits(),
        dim_b: s.layout.dim_b(),
        comm_norm: spectral_norm(k.matrix()),
        rhs_bound: spectrum.rhs(t, &config)?,
        sup_bound: bound_sup(&config),
        measure: plan.measure.kind.to_string(),
        delta_q: None,
        lhs: None,
        slack: None,
        wall_ms: elapsed_ms(start, plan.output.record_timing),
    };
    Ok(witness_outcome(plan, vec![row], Vec::new()))
}

fn run_times(plan: &Plan, ts: &[f64]) -> Result<Outcome, CliError> {
    let exp = experiment(plan, setup(plan))?;
    let record = plan.output.record_timing;
    let results: Vec<(WitnessReport, f64)> = ts
        .par_iter()
        .map(|&t| {
            let start = Instant::now();
            exp.evaluate(t).map(|r| (r, elapsed_ms(start, record)))
        })
        .collect::<Result<_, _>>()?;
    let rows = results.iter().map(|(r, ms)| Row::from_report(plan.mode.as_str(), r, *ms)).collect();
    Ok(witness_outcome(plan, rows, results.into_iter().map(|(r, _)| r).collect()))
}

fn run_sweep_p(plan: &Plan) -> Result<Outcome, CliError> {
    let s = setup(plan);
    let q = s.layout.mediator_qubits();
    let grid: Vec<DephasingConfig> =
        plan.p_grid.iter().map(|p| DephasingConfig::new(p.clone(), q)).collect::<Result<_, _>>()?;
    let start = Instant::now();
    let reports: Vec<WitnessReport> = sweep_p(
        &s.h_am,
        &s.h_mb,
        s.rho0.as_ref().expect("plan validated an initial state"),
        plan.t.expect("plan validated t"),
        &grid,
        &plan.bound.for_layout(&s.layout),
        &plan.measure,
        &plan.initial,
    )?
    .into_iter()
    .map(|mut r| {
        r.seed = s.seed;
        r
    })
    .collect();
    // Sweep cost is shared, so each row gets an equal share.
    let ms = elapsed_ms(start, plan.output.record_timing) / reports.len().max(1) as f64;
    let rows = reports.iter().map(|r| Row::from_report(plan.mode.as_str(), r, ms)).collect();
    Ok(witness_outcome(plan, rows, reports))
}

fn run_verify(plan: &Plan) -> Result<Outcome, CliError> {
    let cfg = &plan.suite;
    let names: Vec<&str> = PROPERTY_NAMES
        .iter()
        .copied()
        .filter(|n| cfg.only.is_empty() || cfg.only.iter().any(|o| o == n))
        .collect();
    let outcomes: Vec<PropertyOutcome> = names
        .par_iter()
        .map(|n| run_property(n, cfg).unwrap_or_default())
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let failures: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name.clone()).collect();
    let passed = outcomes.len() - failures.len();
    Ok(Outcome {
        csv: verify_csv(&outcomes),
        json: json!({ "mode": "verify", "seed": cfg.seed, "properties": outcomes }),
        stats: json!({ "properties": outcomes.len(), "passed": passed }),
        summary: format!("{passed}/{} properties passed", outcomes.len()),
        failures,
    })
}

/// One randcheck instance: its own layout (unless fixed), Hamiltonians and
/// product initial state, all derived from `seed`.
fn randcheck_instance(
    plan: &Plan,
    seed: u64,
    fixed: Option<&std::sync::Arc<SystemLayout>>,
) -> Result<Vec<WitnessReport>, CliError> {
    let rc = &plan.randcheck;
    let (layout, h_am, h_mb) = match fixed {
        Some(l) => {
            let (a, b) = random_ensemble(rc.kind, seed, l.clone(), rc.max_terms, 1.0)?;
            (l.clone(), a, b)
        }
        None => random_instance(rc.kind, seed, rc.max_terms)?,
    };
    let rho0 = random_product_state(&layout, seed)?;
    let initial = InitialBoundOptions { seed, ..plan.initial.clone() };
    let exp = Experiment::new(h_am, h_mb, rho0, plan.bound.for_layout(&layout), plan.measure.clone(), &initial)?
        .with_seed(Some(seed));
    Ok(exp.evaluate_grid(&rc.t_grid)?)
}

fn run_randcheck(plan: &Plan) -> Result<Outcome, CliError> {
    let rc = &plan.randcheck;
    let fixed = plan.setup.as_ref().map(|s| &s.layout);
    let record = plan.output.record_timing;
    let per_instance: Vec<(Vec<WitnessReport>, f64)> = (0..rc.instances as u64)
        .into_par_iter()
        .map(|i| {
            let start = Instant::now();
            randcheck_instance(plan, rc.seed + i, fixed).map(|r| {
                let ms = elapsed_ms(start, record) / r.len().max(1) as f64;
                (r, ms)
            })
        })
        .collect::<Result<_, _>>()?;

    let mut ceiling = Vec::new();
    let mut classical = Vec::new();
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (rs, ms) in per_instance {
        for r in rs {
            let seed = r.seed.unwrap_or_default();
            if r.rhs_bound > r.sup_bound {
                ceiling.push(seed);
            }
            if rc.kind == EnsembleKind::Commuting && r.delta_q.abs() > rc.classical_tol {
                classical.push(seed);
            }
            rows.push(Row::from_report("randcheck", &r, ms));
            reports.push(r);
        }
    }
    ceiling.dedup();
    classical.dedup();
    let mut out = witness_outcome(plan, rows, reports);
    let seeds = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(";");
    if !ceiling.is_empty() {
        out.failures.push(format!("bound_ceiling (seeds {})", seeds(&ceiling)));
    }
    if !classical.is_empty() {
        out.failures.push(format!("classical_null (seeds {})", seeds(&classical)));
    }
    out.stats["instances"] = json!(rc.instances);
    out.stats["ceiling_violations"] = json!(ceiling);
    out.stats["classical_violations"] = json!(classical);
    Ok(out)
}

pub fn execute(plan: &Plan) -> Result<Outcome, CliError> {
    match plan.mode {
        Mode::Bound => run_bound(plan),
        Mode::Evolve => run_times(plan, &[plan.t.expect("plan validated t")]),
        Mode::SweepT => run_times(plan, &plan.t_grid),
        Mode::SweepP => run_sweep_p(plan),
        Mode::Verify => run_verify(plan),
        Mode::Randcheck => run_randcheck(plan),
    }
}
