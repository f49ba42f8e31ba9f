//! Phase-flip dephasing of the mediator chain.
//!
//! Kraus operators M₀ = √p·I and M₁ = √(1−p)·Z act on one mediator qubit.
//! In the Heisenberg picture X and Y pick up a factor (2p−1), Z and I are
//! untouched. The symbolic route lives in [`crate::pauli::dephase_sum`];
//! [`kraus_apply_heisenberg`] is the literal channel on dense matrices.

use crate::correlations::{CorrelationMeasure, InitialBoundOptions};
use crate::dense::{embed, DenseOperator, DensityMatrix};
use crate::error::{Error, Result};
use crate::layout::{pauli_matrix, Site, C64};
use crate::pauli::{dephase_sum, OperatorSum, PauliLabel};
use crate::witness::{BoundConfig, Experiment, WitnessReport};

#[derive(Clone, Debug, PartialEq)]
pub struct DephasingConfig {
    p: Vec<f64>,
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(())
}

impl DephasingConfig {
    pub fn new(p: Vec<f64>, mediator_qubits: usize) -> Result<Self> {
        if p.len() != mediator_qubits {
            return Err(Error::LayoutMismatch(format!(
                "{} probabilities for {mediator_qubits} mediator qubits",
                p.len()
            )));
        }
        for &x in &p {
            check_probability(x)?;
        }
        Ok(Self { p })
    }

    pub fn uniform(p: f64, mediator_qubits: usize) -> Result<Self> {
        Self::new(vec![p; mediator_qubits], mediator_qubits)
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }
}

/// Σ_a M_a† H M_a = p·H + (1−p)·Z_k H Z_k.
pub fn kraus_apply_heisenberg(h: &DenseOperator, qubit: usize, p: f64) -> Result<DenseOperator> {
    check_probability(p)?;
    let qubits = h.sites().iter().filter(|(s, _)| matches!(s, Site::Mediator(_))).count();
    if !h.sites().iter().any(|&(s, _)| s == Site::Mediator(qubit)) {
        return Err(Error::QubitOutOfRange { index: qubit, len: qubits });
    }
    let d = h.dim();
    let z = embed(h.sites(), Site::Mediator(qubit), &pauli_matrix(PauliLabel::Z))?;
    let kraus = [
        crate::layout::CMatrix::identity(d, d) * C64::new(p.sqrt(), 0.0),
        z * C64::new((1.0 - p).sqrt(), 0.0),
    ];
    Ok(h.map_matrix(|m| kraus.iter().map(|k| k.adjoint() * m * k).fold(crate::layout::CMatrix::zeros(d, d), |acc, x| acc + x)))
}

/// Applies the per-qubit dephasing rule to both Hamiltonians.
pub fn dephase_hamiltonians(
    h_am: &OperatorSum,
    h_mb: &OperatorSum,
    config: &DephasingConfig,
) -> Result<(OperatorSum, OperatorSum)> {
    if h_am.layout() != h_mb.layout() {
        return Err(Error::LayoutMismatch("H_AM and H_MB use different layouts".into()));
    }
    if config.p.len() != h_am.layout().mediator_qubits() {
        return Err(Error::LayoutMismatch(format!(
            "{} probabilities for {} mediator qubits",
            config.p.len(),
            h_am.layout().mediator_qubits()
        )));
    }
    Ok((dephase_sum(h_am, &config.p)?, dephase_sum(h_mb, &config.p)?))
}

/// Witness reports at one time for each dephasing point, ordered by p.
/// The dephased Hamiltonians generate the evolution at every point.
pub fn sweep_p(
    h_am: &OperatorSum,
    h_mb: &OperatorSum,
    rho0: &DensityMatrix,
    t: f64,
    p_grid: &[DephasingConfig],
    config: &BoundConfig,
    measure: &CorrelationMeasure,
    initial: &InitialBoundOptions,
) -> Result<Vec<WitnessReport>> {
    let bound = crate::correlations::initial_bound(rho0, initial, measure)?;
    let mut grid: Vec<&DephasingConfig> = p_grid.iter().collect();
    grid.sort_by(|a, b| {
        a.p.iter()
            .zip(&b.p)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    grid.into_iter()
        .map(|d| {
            let (a, b) = dephase_hamiltonians(h_am, h_mb, d)?;
            Experiment::with_initial_bound(a, b, rho0.clone(), *config, measure.clone(), bound.clone())?
                .with_p(d.p.clone())
                .evaluate(t)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{embed_pauli, to_dense};
    use crate::hamiltonians::{build, canonical_witness, random_ensemble, EnsembleKind};
    use crate::layout::{CMatrix, SystemLayout};
    use crate::states::product_plus_zero_plus;
    use std::sync::Arc;

    fn max_entry(m: &CMatrix) -> f64 {
        m.iter().fold(0.0_f64, |a, z| a.max(z.norm()))
    }

    #[test]
    fn kraus_on_single_paulis() {
        let l = SystemLayout::new(2, 2, 3).unwrap();
        let sites = l.sites();
        for k in 0..2 {
            let z = DenseOperator::new(embed_pauli(&l, k, PauliLabel::Z).unwrap(), sites.clone()).unwrap();
            for p in [0.0, 0.3, 1.0] {
                let out = kraus_apply_heisenberg(&z, k, p).unwrap();
                assert!(max_entry(&(out.matrix() - z.matrix())) < 1e-15);
            }
            let x = DenseOperator::new(embed_pauli(&l, k, PauliLabel::X).unwrap(), sites.clone()).unwrap();
            assert!(max_entry(kraus_apply_heisenberg(&x, k, 0.5).unwrap().matrix()) < 1e-15);
            let y = DenseOperator::new(embed_pauli(&l, k, PauliLabel::Y).unwrap(), sites.clone()).unwrap();
            let out = kraus_apply_heisenberg(&y, k, 0.2).unwrap();
            assert!(max_entry(&(out.matrix() - y.matrix() * C64::new(-0.6, 0.0))) < 1e-15);
        }
        let id = DenseOperator::new(CMatrix::identity(24, 24), sites).unwrap();
        assert_eq!(kraus_apply_heisenberg(&id, 1, 0.4).unwrap().matrix(), id.matrix());
        assert!(matches!(kraus_apply_heisenberg(&id, 2, 0.4), Err(Error::QubitOutOfRange { .. })));
        assert!(matches!(kraus_apply_heisenberg(&id, 0, 1.4), Err(Error::ProbabilityOutOfRange(_))));
    }

    #[test]
    fn symbolic_matches_kraus() {
        let layout = Arc::new(SystemLayout::new(3, 2, 2).unwrap());
        for seed in 0..10 {
            let (h_am, h_mb) = random_ensemble(EnsembleKind::General, seed, layout.clone(), 5, 1.0).unwrap();
            for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let cfg = DephasingConfig::new(vec![p, 1.0 - p / 2.0], 2).unwrap();
                let (da, db) = dephase_hamiltonians(&h_am, &h_mb, &cfg).unwrap();
                for (orig, sym) in [(&h_am, da), (&h_mb, db)] {
                    let mut dense = to_dense(orig).unwrap();
                    for (k, &pk) in cfg.p().iter().enumerate() {
                        dense = kraus_apply_heisenberg(&dense, k, pk).unwrap();
                    }
                    let diff = to_dense(&sym).unwrap().matrix() - dense.matrix();
                    assert!(max_entry(&diff) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(DephasingConfig::new(vec![0.5], 2).is_err());
        assert!(matches!(DephasingConfig::uniform(-0.1, 1), Err(Error::ProbabilityOutOfRange(_))));
        let (h_am, h_mb) = build(&canonical_witness()).unwrap();
        assert!(dephase_hamiltonians(&h_am, &h_mb, &DephasingConfig::uniform(0.5, 2).unwrap()).is_err());
    }

    fn canonical_sweep(ps: &[f64]) -> Vec<WitnessReport> {
        let spec = canonical_witness();
        let (h_am, h_mb) = build(&spec).unwrap();
        let rho0 = product_plus_zero_plus(&spec.layout).unwrap();
        let grid: Vec<_> = ps.iter().map(|&p| DephasingConfig::uniform(p, 1).unwrap()).collect();
        sweep_p(
            &h_am,
            &h_mb,
            &rho0,
            0.5,
            &grid,
            &BoundConfig::new(2),
            &CorrelationMeasure::default(),
            &InitialBoundOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn sweep_follows_linear_law() {
        let reports = canonical_sweep(&[1.0, 0.5, 0.0, 0.75, 0.25]);
        let ps: Vec<f64> = reports.iter().map(|r| r.p[0]).collect();
        assert_eq!(ps, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        for r in &reports {
            let expected = 2.0 * (2.0 * r.p[0] - 1.0).abs();
            assert!((r.comm_norm - expected).abs() < 1e-12, "p={} {}", r.p[0], r.comm_norm);
        }
        assert!(reports[2].comm_norm <= 1e-12 && reports[2].rhs_bound <= 1e-10);
        for (a, b) in [(0, 4), (1, 3)] {
            assert!((reports[a].comm_norm - reports[b].comm_norm).abs() < 1e-12);
            assert!((reports[a].rhs_bound - reports[b].rhs_bound).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_point_matches_plain_evaluation() {
        let spec = canonical_witness();
        let (h_am, h_mb) = build(&spec).unwrap();
        let rho0 = product_plus_zero_plus(&spec.layout).unwrap();
        let plain = crate::witness::evaluate(
            &h_am,
            &h_mb,
            &rho0,
            0.5,
            &BoundConfig::new(2),
            &CorrelationMeasure::default(),
        )
        .unwrap();
        assert_eq!(canonical_sweep(&[1.0])[0], plain);
    }

    #[test]
    fn bound_monotone_above_half() {
        let ps: Vec<f64> = (0..=20).map(|i| 0.5 + i as f64 / 40.0).collect();
        let reports = canonical_sweep(&ps);
        for w in reports.windows(2) {
            assert!(w[1].rhs_bound >= w[0].rhs_bound);
        }
    }
}
