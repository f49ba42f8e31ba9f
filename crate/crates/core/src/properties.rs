//! Seeded invariant suite behind `medwit verify`.
//!
//! Each property draws its instances from consecutive seeds starting at
//! [`SuiteConfig::seed`]. An instance depends on its own seed only, so a
//! failure listed under seed `s` replays with `seed = s` and one instance.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::correlations::{
    log_negativity, relative_entropy, relative_entropy_of_entanglement, CorrelationMeasure,
    InitialBoundOptions, ReeOptions,
};
use crate::decoherence::{dephase_hamiltonians, kraus_apply_heisenberg, DephasingConfig};
use crate::dense::{herm_eig, spectral_norm, to_dense, DenseOperator, DensityMatrix};
use crate::error::Result;
use crate::hamiltonians::{build, canonical_witness, random_ensemble, EnsembleKind};
use crate::layout::{pauli_matrix, CMatrix, Site, SystemLayout, C64};
use crate::pauli::{commutator, structural_commutator, OperatorSum, PauliLabel};
use crate::states::{product_named, random_product_state, random_pure_state, random_vector};
use crate::witness::{truncation_error, BoundConfig, BoundSpectrum, Experiment};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub commutator_oracle: f64,
    pub pair_identity: f64,
    pub dephasing_dual_path: f64,
    pub commutator_zero: f64,
    pub zassenhaus_slope: f64,
    pub classical_null: f64,
    pub closed_form: f64,
    pub bound_slope: f64,
    /// Allowed excess of rhs_bound over 4·C.
    pub bound_ceiling: f64,
    /// Smallest ΔQ that counts as a gain.
    pub min_gain: f64,
    pub local_unitary: f64,
    pub separable_zero: f64,
    pub ree_certificate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            commutator_oracle: 1e-10,
            pair_identity: 1e-14,
            dephasing_dual_path: 1e-12,
            commutator_zero: 1e-12,
            zassenhaus_slope: 0.2,
            classical_null: 1e-10,
            closed_form: 1e-9,
            bound_slope: 0.1,
            bound_ceiling: 0.0,
            min_gain: 1e-6,
            local_unitary: 1e-10,
            separable_zero: 1e-10,
            ree_certificate: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub oracle_instances: usize,
    pub dephasing_instances: usize,
    pub zassenhaus_instances: usize,
    pub classical_instances: usize,
    pub ceiling_instances: usize,
    pub one_qubit_instances: usize,
    pub correlation_instances: usize,
    pub ree_instances: usize,
    /// Most terms per Hamiltonian in random instances.
    pub max_terms: usize,
    /// Run only these properties; empty runs all.
    pub only: Vec<String>,
    pub tolerances: Tolerances,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            oracle_instances: 200,
            dephasing_instances: 100,
            zassenhaus_instances: 20,
            classical_instances: 100,
            ceiling_instances: 100,
            one_qubit_instances: 20,
            correlation_instances: 50,
            ree_instances: 5,
            max_terms: 6,
            only: Vec::new(),
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// metric ≤ threshold
    AtMost,
    /// metric > threshold
    Above,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyOutcome {
    pub name: String,
    pub passed: bool,
    pub instances: usize,
    /// Worst value over all instances.
    pub metric: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub failing_seeds: Vec<u64>,
}

impl PropertyOutcome {
    fn collect(name: &str, relation: Relation, threshold: f64, per_seed: Vec<(u64, f64)>) -> Self {
        let ok = |m: f64| match relation {
            Relation::AtMost => m <= threshold,
            Relation::Above => m > threshold,
        };
        let worst = |a: f64, b: f64| match relation {
            Relation::AtMost => {
                if b.is_nan() || b > a {
                    b
                } else {
                    a
                }
            }
            Relation::Above => {
                if b.is_nan() || b < a {
                    b
                } else {
                    a
                }
            }
        };
        let init = match relation {
            Relation::AtMost => f64::NEG_INFINITY,
            Relation::Above => f64::INFINITY,
        };
        let metric = per_seed.iter().fold(init, |m, &(_, v)| worst(m, v));
        let failing_seeds: Vec<u64> = per_seed.iter().filter(|(_, v)| !ok(*v)).map(|(s, _)| *s).collect();
        Self {
            name: name.into(),
            passed: failing_seeds.is_empty() && !per_seed.is_empty(),
            instances: per_seed.len(),
            metric,
            threshold,
            relation,
            failing_seeds,
        }
    }
}

pub const PROPERTY_NAMES: [&str; 14] = [
    "commutator_oracle",
    "structural_commutator",
    "mediator_pair_identity",
    "dephasing_dual_path",
    "half_dephasing_commutator",
    "zassenhaus_order",
    "classical_null",
    "canonical_closed_form",
    "canonical_gain",
    "bound_quadratic_scaling",
    "bound_ceiling",
    "one_quantum_qubit",
    "log_negativity_invariance",
    "ree_certificate",
];

/// Runs every selected property in a fixed order.
pub fn run_suite(cfg: &SuiteConfig) -> Vec<PropertyOutcome> {
    PROPERTY_NAMES
        .iter()
        .filter(|n| cfg.only.is_empty() || cfg.only.iter().any(|o| o == *n))
        .flat_map(|n| run_property(n, cfg).unwrap_or_default())
        .collect()
}

/// Outcomes for one named property; `None` for an unknown name. Some
/// properties report more than one line.
pub fn run_property(name: &str, cfg: &SuiteConfig) -> Option<Vec<PropertyOutcome>> {
    let tol = &cfg.tolerances;
    Some(match name {
        "commutator_oracle" => vec![commutator_oracle(cfg)],
        "structural_commutator" => vec![structural_equivalence(cfg)],
        "mediator_pair_identity" => {
            let devs = pair_identity_deviations(PairIdentityForm::Exact);
            vec![PropertyOutcome::collect(
                name,
                Relation::AtMost,
                tol.pair_identity,
                devs.iter().enumerate().map(|(n, d)| (n as u64, d.deviation)).collect(),
            )]
        }
        "dephasing_dual_path" => vec![dephasing_dual_path(cfg)],
        "half_dephasing_commutator" => vec![half_dephasing(cfg)],
        "zassenhaus_order" => vec![zassenhaus_order(cfg)],
        "classical_null" => vec![classical_null(cfg)],
        "canonical_closed_form" => vec![canonical_closed_form(cfg)],
        "canonical_gain" => vec![canonical_gain()],
        "bound_quadratic_scaling" => vec![bound_quadratic_scaling(cfg)],
        "bound_ceiling" => vec![bound_ceiling(cfg)],
        "one_quantum_qubit" => one_quantum_qubit(cfg),
        "log_negativity_invariance" => log_negativity_invariance(cfg),
        "ree_certificate" => vec![ree_certificate(cfg)],
        _ => return None,
    })
}

/// A random local pair with dim_A, dim_B ∈ {2, 3}, T ∈ {1, 2, 3} and
/// 1..=max_terms terms, fully determined by `seed`.
pub fn random_instance(
    kind: EnsembleKind,
    seed: u64,
    max_terms: usize,
) -> Result<(Arc<SystemLayout>, OperatorSum, OperatorSum)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let da = rng.random_range(2..=3);
    let t = rng.random_range(1..=3);
    let db = rng.random_range(2..=3);
    let terms = rng.random_range(1..=max_terms.max(1));
    let layout = Arc::new(SystemLayout::new(da, t, db)?);
    let (h_am, h_mb) = random_ensemble(kind, seed, layout.clone(), terms, 1.0)?;
    Ok((layout, h_am, h_mb))
}

fn max_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |a, z| a.max(z.norm()))
}

/// Least-squares slope of log y against log x.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// `n` points spaced evenly in log between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn seeds(cfg: &SuiteConfig, n: usize) -> impl Iterator<Item = u64> {
    let base = cfg.seed;
    (0..n as u64).map(move |i| base.wrapping_add(i))
}

fn commutator_oracle(cfg: &SuiteConfig) -> PropertyOutcome {
    let name = "commutator_oracle";
    let per_seed = seeds(cfg, cfg.oracle_instances)
        .map(|s| {
            let dev = (|| -> Result<f64> {
                let (_, h_am, h_mb) = random_instance(EnsembleKind::General, s, cfg.max_terms)?;
                let k = to_dense(&commutator(&h_am, &h_mb)?)?;
                let (a, b) = (to_dense(&h_am)?, to_dense(&h_mb)?);
                let dense = a.matrix() * b.matrix() - b.matrix() * a.matrix();
                Ok(max_entry(&(k.matrix() - dense)))
            })();
            (s, dev.unwrap_or(f64::NAN))
        })
        .collect();
    PropertyOutcome::collect(name, Relation::AtMost, cfg.tolerances.commutator_oracle, per_seed)
}

fn structural_equivalence(cfg: &SuiteConfig) -> PropertyOutcome {
    let per_seed = seeds(cfg, cfg.oracle_instances)
        .map(|s| {
            let dev = (|| -> Result<f64> {
                let (_, h_am, h_mb) = random_instance(EnsembleKind::General, s, cfg.max_terms)?;
                let direct = commutator(&h_am, &h_mb)?;
                let structural = structural_commutator(&h_am, &h_mb)?;
                // same canonical term keys, coefficients compared numerically
                let same_keys = direct.len() == structural.len()
                    && direct.terms().iter().zip(structural.terms()).all(|(x, y)| {
                        x.a == y.a && x.mediator == y.mediator && x.b == y.b
                    });
                Ok(if same_keys { direct.max_deviation(&structural) } else { f64::INFINITY })
            })();
            (s, dev.unwrap_or(f64::NAN))
        })
        .collect();
    PropertyOutcome::collect(
        "structural_commutator",
        Relation::AtMost,
        cfg.tolerances.commutator_oracle,
        per_seed,
    )
}

/// Right-hand side used for the two-qubit mediator identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairIdentityForm {
    /// m_{j₁}m_{l₁}⊗{m_{j₂},m_{l₂}} − 2δ_{l₁j₁} I⊗m_{l₂}m_{j₂}
    KroneckerDelta,
    /// m_{j₁}m_{l₁}⊗{m_{j₂},m_{l₂}} − {m_{j₁},m_{l₁}}⊗m_{l₂}m_{j₂}
    Exact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairDeviation {
    pub j: (PauliLabel, PauliLabel),
    pub l: (PauliLabel, PauliLabel),
    pub deviation: f64,
}

/// Left side [m_{j₁},m_{l₁}]⊗m_{j₂}m_{l₂} + m_{l₁}m_{j₁}⊗[m_{j₂},m_{l₂}] against
/// the chosen right side, for all 16 × 16 pairs of two-qubit Pauli strings.
pub fn pair_identity_deviations(form: PairIdentityForm) -> Vec<PairDeviation> {
    let mut out = Vec::with_capacity(256);
    for j1 in PauliLabel::ALL {
        for j2 in PauliLabel::ALL {
            for l1 in PauliLabel::ALL {
                for l2 in PauliLabel::ALL {
                    let (mj1, mj2) = (pauli_matrix(j1), pauli_matrix(j2));
                    let (ml1, ml2) = (pauli_matrix(l1), pauli_matrix(l2));
                    let comm1 = &mj1 * &ml1 - &ml1 * &mj1;
                    let comm2 = &mj2 * &ml2 - &ml2 * &mj2;
                    let anti2 = &mj2 * &ml2 + &ml2 * &mj2;
                    let lhs = comm1.kronecker(&(&mj2 * &ml2)) + (&ml1 * &mj1).kronecker(&comm2);
                    let first = (&mj1 * &ml1).kronecker(&anti2);
                    let second = match form {
                        PairIdentityForm::KroneckerDelta => {
                            let delta = if j1 == l1 { 2.0 } else { 0.0 };
                            CMatrix::identity(2, 2).kronecker(&(&ml2 * &mj2)) * C64::new(delta, 0.0)
                        }
                        PairIdentityForm::Exact => (&mj1 * &ml1 + &ml1 * &mj1).kronecker(&(&ml2 * &mj2)),
                    };
                    out.push(PairDeviation {
                        j: (j1, j2),
                        l: (l1, l2),
                        deviation: max_entry(&(lhs - (first - second))),
                    });
                }
            }
        }
    }
    out
}

fn dephasing_dual_path(cfg: &SuiteConfig) -> PropertyOutcome {
    let per_seed = seeds(cfg, cfg.dephasing_instances)
        .map(|s| {
            let dev = (|| -> Result<f64> {
                let (layout, h_am, h_mb) = random_instance(EnsembleKind::General, s, cfg.max_terms)?;
                let mut worst = 0.0_f64;
                for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
                    let d = DephasingConfig::uniform(p, layout.mediator_qubits())?;
                    let (sa, sb) = dephase_hamiltonians(&h_am, &h_mb, &d)?;
                    for (orig, sym) in [(&h_am, sa), (&h_mb, sb)] {
                        let mut dense = to_dense(orig)?;
                        for k in 0..layout.mediator_qubits() {
                            dense = kraus_apply_heisenberg(&dense, k, p)?;
                        }
                        worst = worst.max(max_entry(&(to_dense(&sym)?.matrix() - dense.matrix())));
                    }
                }
                Ok(worst)
            })();
            (s, dev.unwrap_or(f64::NAN))
        })
        .collect();
    PropertyOutcome::collect(
        "dephasing_dual_path",
        Relation::AtMost,
        cfg.tolerances.dephasing_dual_path,
        per_seed,
    )
}

fn dephased_comm_norm(h_am: &OperatorSum, h_mb: &OperatorSum, p: Vec<f64>) -> Result<f64> {
    let d = DephasingConfig::new(p, h_am.layout().mediator_qubits())?;
    let (a, b) = dephase_hamiltonians(h_am, h_mb, &d)?;
    Ok(spectral_norm(to_dense(&commutator(&a, &b)?)?.matrix()))
}

fn half_dephasing(cfg: &SuiteConfig) -> PropertyOutcome {
    let per_seed = seeds(cfg, cfg.dephasing_instances)
        .map(|s| {
            let v = random_instance(EnsembleKind::General, s, cfg.max_terms).and_then(|(l, a, b)| {
                dephased_comm_norm(&a, &b, vec![0.5; l.mediator_qubits()])
            });
            (s, v.unwrap_or(f64::NAN))
        })
        .collect();
    PropertyOutcome::collect(
        "half_dephasing_commutator",
        Relation::AtMost,
        cfg.tolerances.commutator_zero,
        per_seed,
    )
}

/// Consecutive seeds from the base whose instance has a nonzero commutator.
fn noncommuting_seeds(
    cfg: &SuiteConfig,
    kind: EnsembleKind,
    max_terms: usize,
    n: usize,
) -> Vec<(u64, Arc<SystemLayout>, OperatorSum, OperatorSum)> {
    let mut out = Vec::with_capacity(n);
    let mut s = cfg.seed;
    let limit = cfg.seed.wrapping_add(1000 * n as u64 + 1000);
    while out.len() < n && s != limit {
        if let Ok((l, a, b)) = random_instance(kind, s, max_terms) {
            if commutator(&a, &b).map(|k| !k.is_empty()).unwrap_or(false) {
                out.push((s, l, a, b));
            }
        }
        s = s.wrapping_add(1);
    }
    out
}

fn zassenhaus_order(cfg: &SuiteConfig) -> PropertyOutcome {
    let ts = log_grid(1e-3, 1e-1, 10);
    let per_seed = noncommuting_seeds(cfg, EnsembleKind::General, cfg.max_terms, cfg.zassenhaus_instances)
        .into_iter()
        .map(|(s, _, h_am, h_mb)| {
            let slope = (|| -> Result<f64> {
                let (a, b) = (to_dense(&h_am)?, to_dense(&h_mb)?);
                let errs = ts.iter().map(|&t| truncation_error(&a, &b, t)).collect::<Result<Vec<_>>>()?;
                Ok(log_log_slope(&ts, &errs))
            })();
            (s, slope.map(|x| (x - 3.0).abs()).unwrap_or(f64::NAN))
        })
        .collect();
    PropertyOutcome::collect("zassenhaus_order", Relation::AtMost, cfg.tolerances.zassenhaus_slope, per_seed)
}

fn classical_null(cfg: &SuiteConfig) -> PropertyOutcome {
    let ts: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let per_seed = seeds(cfg, cfg.classical_instances)
        .map(|s| {
            let v = (|| -> Result<f64> {
                let (layout, h_am, h_mb) = random_instance(EnsembleKind::Commuting, s, cfg.max_terms)?;
                let rho0 = random_product_state(&layout, s)?;
                let exp = Experiment::new(
                    h_am,
                    h_mb,
                    rho0,
                    BoundConfig::new(layout.dim_mediator()),
                    CorrelationMeasure::default(),
                    &InitialBoundOptions::default(),
                )?;
                let mut worst = 0.0_f64;
                for &t in &ts {
                    worst = worst.max(log_negativity(&exp.evolved_marginal(t)?)?);
                }
                Ok(worst)
            })();
            (s, v.unwrap_or(f64::NAN))
        })
        .collect();
    PropertyOutcome::collect("classical_null", Relation::AtMost, cfg.tolerances.classical_null, per_seed)
}

fn canonical_closed_form(cfg: &SuiteConfig) -> PropertyOutcome {
    let v = (|| -> Result<f64> {
        let (h_am, h_mb) = build(&canonical_witness())?;
        let k = to_dense(&commutator(&h_am, &h_mb)?)?;
        let config = BoundConfig::new(2);
        let spectrum = BoundSpectrum::new(&k)?;
        let c = config.c_value();
        let mut worst = 0.0_f64;
        for t in [0.1, 0.5, 1.0] {
            let closed = 4.0 * c * (t * t / 2.0_f64).sin().abs();
            worst = worst.max((spectrum.rhs(t, &config)? - closed).abs());
        }
        Ok(worst)
    })();
    PropertyOutcome::collect(
        "canonical_closed_form",
        Relation::AtMost,
        cfg.tolerances.closed_form,
        vec![(0, v.unwrap_or(f64::NAN))],
    )
}

/// Gain of the canonical pair at t = 0.5 from |0⟩_A|+i⟩_M|+⟩_B.
fn canonical_gain() -> PropertyOutcome {
    let v = (|| -> Result<f64> {
        let spec = canonical_witness();
        let (h_am, h_mb) = build(&spec)?;
        let rho0 = product_named(&spec.layout, &["0", "+i", "+"])?;
        let exp = Experiment::new(
            h_am,
            h_mb,
            rho0,
            BoundConfig::new(2),
            CorrelationMeasure::default(),
            &InitialBoundOptions::default(),
        )?;
        Ok(exp.evaluate(0.5)?.delta_q)
    })();
    PropertyOutcome::collect("canonical_gain", Relation::Above, 0.01, vec![(0, v.unwrap_or(f64::NAN))])
}

fn bound_quadratic_scaling(cfg: &SuiteConfig) -> PropertyOutcome {
    let ts = log_grid(1e-3, 1e-2, 10);
    let mut per_seed = Vec::new();
    let slope_of = |h_am: &OperatorSum, h_mb: &OperatorSum| -> Result<f64> {
        let k = to_dense(&commutator(h_am, h_mb)?)?;
        let config = BoundConfig::new(h_am.layout().dim_mediator());
        let spectrum = BoundSpectrum::new(&k)?;
        let rhs = ts.iter().map(|&t| spectrum.rhs(t, &config)).collect::<Result<Vec<_>>>()?;
        Ok(log_log_slope(&ts, &rhs))
    };
    let canonical = build(&canonical_witness()).and_then(|(a, b)| slope_of(&a, &b));
    per_seed.push((u64::MAX, canonical.map(|x| (x - 2.0).abs()).unwrap_or(f64::NAN)));
    for (s, _, a, b) in noncommuting_seeds(cfg, EnsembleKind::General, cfg.max_terms, cfg.zassenhaus_instances) {
        per_seed.push((s, slope_of(&a, &b).map(|x| (x - 2.0).abs()).unwrap_or(f64::NAN)));
    }
    PropertyOutcome::collect("bound_quadratic_scaling", Relation::AtMost, cfg.tolerances.bound_slope, per_seed)
}

fn bound_ceiling(cfg: &SuiteConfig) -> PropertyOutcome {
    let ts: Vec<f64> = (0..=60).map(|i| i as f64 * 0.1).collect();
    let per_seed = seeds(cfg, cfg.ceiling_instances)
        .map(|s| {
            let v = (|| -> Result<f64> {
                let (layout, h_am, h_mb) = random_instance(EnsembleKind::General, s, cfg.max_terms)?;
                let k = to_dense(&commutator(&h_am, &h_mb)?)?;
                let spectrum = BoundSpectrum::new(&k)?;
                let mut worst = f64::NEG_INFINITY;
                for c in [
                    BoundConfig::new(layout.dim_mediator()),
                    BoundConfig::new(layout.dim_mediator()).with_override(1.0),
                ] {
                    let sup = crate::witness::bound_sup(&c);
                    for &t in &ts {
                        worst = worst.max(spectrum.rhs(t, &c)? - sup);
                    }
                }
                Ok(worst)
            })();
            (s, v.unwrap_or(f64::NAN))
        })
        .collect();
    PropertyOutcome::collect("bound_ceiling", Relation::AtMost, cfg.tolerances.bound_ceiling, per_seed)
}

/// Gain from a random product state somewhere on the t grid, and
/// vanishing commutator once qubit 1 alone is fully dephased.
fn one_quantum_qubit(cfg: &SuiteConfig) -> Vec<PropertyOutcome> {
    let ts: Vec<f64> = (1..=12).map(|i| i as f64 * 0.25).collect();
    let instances = noncommuting_seeds(cfg, EnsembleKind::OneQuantumQubit, cfg.max_terms, cfg.one_qubit_instances);
    let mut gains = Vec::new();
    let mut killed = Vec::new();
    for (s, layout, h_am, h_mb) in instances {
        let gain = (|| -> Result<f64> {
            let rho0 = random_product_state(&layout, s)?;
            let exp = Experiment::new(
                h_am.clone(),
                h_mb.clone(),
                rho0,
                BoundConfig::new(layout.dim_mediator()),
                CorrelationMeasure::default(),
                &InitialBoundOptions::default(),
            )?;
            let mut best = f64::NEG_INFINITY;
            for &t in &ts {
                best = best.max(exp.evaluate(t)?.delta_q);
            }
            Ok(best)
        })();
        gains.push((s, gain.unwrap_or(f64::NAN)));
        let mut p = vec![1.0; layout.mediator_qubits()];
        p[0] = 0.5;
        killed.push((s, dephased_comm_norm(&h_am, &h_mb, p).unwrap_or(f64::NAN)));
    }
    vec![
        PropertyOutcome::collect("one_quantum_qubit_gain", Relation::Above, cfg.tolerances.min_gain, gains),
        PropertyOutcome::collect(
            "one_quantum_qubit_dephasing",
            Relation::AtMost,
            cfg.tolerances.commutator_zero,
            killed,
        ),
    ]
}

fn random_unitary(d: usize, rng: &mut ChaCha8Rng) -> Result<CMatrix> {
    let g = CMatrix::from_vec(d, d, random_vector(d * d, rng));
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    Ok(herm_eig(&h)?.apply(|l| C64::from_polar(1.0, l)))
}

fn bipartite_sites(rng: &mut ChaCha8Rng) -> Vec<(Site, usize)> {
    vec![(Site::A, rng.random_range(2..=3)), (Site::B, rng.random_range(2..=3))]
}

/// Log-negativity under local unitaries, and on explicit separable mixtures.
fn log_negativity_invariance(cfg: &SuiteConfig) -> Vec<PropertyOutcome> {
    let mut invariance = Vec::new();
    let mut separable = Vec::new();
    for s in seeds(cfg, cfg.correlation_instances) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let sites = bipartite_sites(&mut rng);
        let (da, db) = (sites[0].1, sites[1].1);
        let dev = (|| -> Result<f64> {
            let a = random_pure_state(sites.clone(), s)?;
            let b = random_pure_state(sites.clone(), s.wrapping_add(1 << 32))?;
            let mixed = a.matrix() * C64::new(0.7, 0.0) + b.matrix() * C64::new(0.3, 0.0);
            let rho = DensityMatrix::new(DenseOperator::new(mixed, sites.clone())?)?;
            let u = random_unitary(da, &mut rng)?.kronecker(&random_unitary(db, &mut rng)?);
            let rotated = &u * rho.matrix() * u.adjoint();
            let rotated = DensityMatrix::new(DenseOperator::new(rotated, sites.clone())?)?;
            Ok((log_negativity(&rho)? - log_negativity(&rotated)?).abs())
        })();
        invariance.push((s, dev.unwrap_or(f64::NAN)));
        let sep = (|| -> Result<f64> {
            let mut m = CMatrix::zeros(da * db, da * db);
            let k = rng.random_range(1..=6);
            let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = weights.iter().sum();
            for w in weights {
                let pa = random_pure_state(vec![(Site::A, da)], rng.random())?;
                let pb = random_pure_state(vec![(Site::B, db)], rng.random())?;
                m += DensityMatrix::product(&[&pa, &pb])?.matrix() * C64::new(w / total, 0.0);
            }
            log_negativity(&DensityMatrix::new(DenseOperator::new(m, sites.clone())?)?)
        })();
        separable.push((s, sep.unwrap_or(f64::NAN)));
    }
    vec![
        PropertyOutcome::collect(
            "log_negativity_local_unitary",
            Relation::AtMost,
            cfg.tolerances.local_unitary,
            invariance,
        ),
        PropertyOutcome::collect(
            "log_negativity_separable_zero",
            Relation::AtMost,
            cfg.tolerances.separable_zero,
            separable,
        ),
    ]
}

/// Re-evaluating S(ρ‖certificate) reproduces the reported REE, and the
/// certificate is a valid separable mixture.
fn ree_certificate(cfg: &SuiteConfig) -> PropertyOutcome {
    let per_seed = seeds(cfg, cfg.ree_instances)
        .map(|s| {
            let v = (|| -> Result<f64> {
                let sites = vec![(Site::A, 2), (Site::B, 2)];
                let a = random_pure_state(sites.clone(), s)?;
                let b = random_pure_state(sites.clone(), s.wrapping_add(1 << 32))?;
                let m = a.matrix() * C64::new(0.6, 0.0) + b.matrix() * C64::new(0.4, 0.0);
                let rho = DensityMatrix::new(DenseOperator::new(m, sites)?)?;
                let r = relative_entropy_of_entanglement(&rho, &ReeOptions { seed: s, ..Default::default() })?;
                if !r.certificate.is_valid() || r.value < 0.0 {
                    return Ok(f64::INFINITY);
                }
                Ok((relative_entropy(rho.matrix(), &r.certificate.matrix())? - r.value).abs())
            })();
            (s, v.unwrap_or(f64::NAN))
        })
        .collect();
    PropertyOutcome::collect("ree_certificate", Relation::AtMost, cfg.tolerances.ree_certificate, per_seed)
}
