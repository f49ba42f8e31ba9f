//! The commutator bound on correlation gain and its evaluation against
//! exact dynamics.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::correlations::{
    delta_q, initial_bound, CorrelationMeasure, GFunction, InitialBound, InitialBoundOptions,
};
use crate::dense::{herm_eig, partial_trace, spectral_norm, to_dense, DenseOperator, DensityMatrix, Propagator};
use crate::error::{Error, Result};
use crate::layout::{Site, C64};
use crate::pauli::{commutator, OperatorSum};

const SKEW_TOL: f64 = 1e-10;

/// Named forms of the dimension constant C(d).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CChoice {
    Dimension,
    Sqrt,
    Constant(f64),
}

impl FromStr for CChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "d" | "dimension" => Ok(Self::Dimension),
            "sqrt" | "sqrt_d" => Ok(Self::Sqrt),
            other => other
                .parse::<f64>()
                .map(Self::Constant)
                .map_err(|_| Error::InvalidArgument(format!("unknown C choice `{other}`"))),
        }
    }
}

impl fmt::Display for CChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dimension => f.write_str("d"),
            Self::Sqrt => f.write_str("sqrt_d"),
            Self::Constant(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundConfig {
    pub c: CChoice,
    /// Replaces the named choice when set.
    pub c_override: Option<f64>,
    /// Mediator Hilbert-space dimension, 2^T.
    pub dim_mediator: usize,
}

impl BoundConfig {
    pub fn new(dim_mediator: usize) -> Self {
        Self { c: CChoice::Dimension, c_override: None, dim_mediator }
    }

    pub fn with_c(mut self, c: CChoice) -> Self {
        self.c = c;
        self
    }

    pub fn with_override(mut self, c: f64) -> Self {
        self.c_override = Some(c);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim_mediator == 0 {
            return Err(Error::InvalidArgument("mediator dimension must be >= 1".into()));
        }
        let c = self.c_value();
        if !(c.is_finite() && c >= 1.0) {
            return Err(Error::InvalidArgument(format!("C(dim_M) = {c} must be >= 1")));
        }
        Ok(())
    }

    pub fn c_value(&self) -> f64 {
        if let Some(c) = self.c_override {
            return c;
        }
        let d = self.dim_mediator as f64;
        match self.c {
            CChoice::Dimension => d,
            CChoice::Sqrt => d.sqrt(),
            CChoice::Constant(c) => c,
        }
    }

    pub fn c_label(&self) -> String {
        match self.c_override {
            Some(c) => format!("override({c})"),
            None => self.c.to_string(),
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time {t} must be finite and >= 0")));
    }
    Ok(())
}

/// H_K = −i·K for skew-Hermitian K.
pub fn hermitian_generator(k: &DenseOperator) -> Result<DenseOperator> {
    let m = k.matrix();
    let scale = m.iter().fold(1.0_f64, |s, x| s.max(x.norm()));
    let dev = (m + m.adjoint()).iter().fold(0.0_f64, |d, x| d.max(x.norm()));
    if dev > SKEW_TOL * scale {
        return Err(Error::NotSkewHermitian(dev));
    }
    Ok(k.map_matrix(|m| m * C64::new(0.0, -1.0)))
}

/// Eigenvalues of H_K, kept so the bound can be evaluated at many times.
#[derive(Clone, Debug)]
pub struct BoundSpectrum {
    values: Vec<f64>,
}

impl BoundSpectrum {
    pub fn new(k: &DenseOperator) -> Result<Self> {
        let hk = hermitian_generator(k)?;
        Ok(Self { values: herm_eig(hk.matrix())?.values })
    }

    /// σ_max(2(I − cos(H_K t²/2))), written as 4 sin²(λt²/4) to avoid
    /// cancellation at small t.
    pub fn sigma_max(&self, t: f64) -> f64 {
        let s = t * t / 4.0;
        self.values.iter().fold(0.0_f64, |m, &l| m.max(4.0 * (l * s).sin().powi(2)))
    }

    pub fn rhs(&self, t: f64, config: &BoundConfig) -> Result<f64> {
        check_time(t)?;
        config.validate()?;
        Ok(2.0 * config.c_value() * self.sigma_max(t).sqrt())
    }
}

/// 2·C(dim_M)·sqrt(σ_max(2(I − cos(H_K t²/2)))).
pub fn bound_rhs(k: &DenseOperator, t: f64, config: &BoundConfig) -> Result<f64> {
    BoundSpectrum::new(k)?.rhs(t, config)
}

/// 4·C(dim_M).
pub fn bound_sup(config: &BoundConfig) -> f64 {
    4.0 * config.c_value()
}

fn check_pair(h_am: &DenseOperator, h_mb: &DenseOperator) -> Result<()> {
    if !h_am.same_sites(h_mb) {
        return Err(Error::LayoutMismatch("H_AM and H_MB act on different sites".into()));
    }
    for (name, h) in [("H_AM", h_am), ("H_MB", h_mb)] {
        let dev = h.hermitian_deviation();
        if dev > crate::dense::HERMITIAN_TOL {
            return Err(Error::NotHermitian(format!("{name} (deviation {dev:e})")));
        }
    }
    Ok(())
}

/// exp(−iH_AM t)·exp(−iH_MB t)·exp([H_AM, H_MB]·t²/2).
pub fn zassenhaus_unitary(h_am: &DenseOperator, h_mb: &DenseOperator, t: f64) -> Result<DenseOperator> {
    check_pair(h_am, h_mb)?;
    let (a, b) = (h_am.matrix(), h_mb.matrix());
    let k = a * b - b * a;
    // exp(K s) = exp(i H_K s) with H_K = −iK Hermitian
    let hk = &k * C64::new(0.0, -1.0);
    let s = t * t / 2.0;
    let u1 = herm_eig(a)?.apply(|l| C64::from_polar(1.0, -l * t));
    let u2 = herm_eig(b)?.apply(|l| C64::from_polar(1.0, -l * t));
    let u3 = herm_eig(&hk)?.apply(|l| C64::from_polar(1.0, l * s));
    DenseOperator::new(u1 * u2 * u3, h_am.sites().to_vec())
}

/// ‖exp(−i(H_AM + H_MB)t) − zassenhaus_unitary(H_AM, H_MB, t)‖.
pub fn truncation_error(h_am: &DenseOperator, h_mb: &DenseOperator, t: f64) -> Result<f64> {
    let approx = zassenhaus_unitary(h_am, h_mb, t)?;
    let total = h_am.matrix() + h_mb.matrix();
    let exact = herm_eig(&total)?.apply(|l| C64::from_polar(1.0, -l * t));
    Ok(spectral_norm(&(exact - approx.matrix())))
}

pub fn apply_g_inverse(delta_q: f64, g: &GFunction) -> Result<f64> {
    g.inverse(delta_q)
}

/// Both sides of the inequality at one time point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub t: f64,
    /// Phase-flip probability per mediator qubit; all ones when undephased.
    pub p: Vec<f64>,
    pub comm_norm: f64,
    pub rhs_bound: f64,
    pub sup_bound: f64,
    /// g⁻¹(ΔQ).
    pub lhs: f64,
    pub delta_q: f64,
    pub slack: f64,
    pub dim_a: usize,
    pub mediator_qubits: usize,
    pub dim_b: usize,
    pub layout: String,
    pub seed: Option<u64>,
    pub measure: String,
    pub g: String,
    pub c_choice: String,
    pub c_value: f64,
    pub initial_bound: f64,
}

/// Densified Hamiltonians, commutator spectrum and initial budget, ready for
/// repeated evaluation over a time grid.
#[derive(Clone, Debug)]
pub struct Experiment {
    h_am: OperatorSum,
    h_mb: OperatorSum,
    rho0: DensityMatrix,
    propagator: Propagator,
    spectrum: BoundSpectrum,
    comm_norm: f64,
    initial: InitialBound,
    measure: CorrelationMeasure,
    config: BoundConfig,
    p: Vec<f64>,
    seed: Option<u64>,
}

impl Experiment {
    pub fn new(
        h_am: OperatorSum,
        h_mb: OperatorSum,
        rho0: DensityMatrix,
        config: BoundConfig,
        measure: CorrelationMeasure,
        initial: &InitialBoundOptions,
    ) -> Result<Self> {
        let bound = initial_bound(&rho0, initial, &measure)?;
        Self::with_initial_bound(h_am, h_mb, rho0, config, measure, bound)
    }

    pub fn with_initial_bound(
        h_am: OperatorSum,
        h_mb: OperatorSum,
        rho0: DensityMatrix,
        config: BoundConfig,
        measure: CorrelationMeasure,
        initial: InitialBound,
    ) -> Result<Self> {
        let layout = h_am.layout().clone();
        if rho0.sites() != layout.sites().as_slice() {
            return Err(Error::LayoutMismatch(format!(
                "initial state does not live on layout {}",
                layout.summary()
            )));
        }
        if config.dim_mediator != layout.dim_mediator() {
            return Err(Error::LayoutMismatch(format!(
                "bound configured for dim_M = {}, layout has {}",
                config.dim_mediator,
                layout.dim_mediator()
            )));
        }
        config.validate()?;
        measure.g.validate()?;
        let k = to_dense(&commutator(&h_am, &h_mb)?)?;
        let spectrum = BoundSpectrum::new(&k)?;
        let comm_norm = spectral_norm(k.matrix());
        let total = to_dense(&h_am)?.matrix() + to_dense(&h_mb)?.matrix();
        let propagator = Propagator::new(&DenseOperator::on_layout(total, &layout)?)?;
        let p = vec![1.0; layout.mediator_qubits()];
        Ok(Self {
            h_am,
            h_mb,
            rho0,
            propagator,
            spectrum,
            comm_norm,
            initial,
            measure,
            config,
            p,
            seed: None,
        })
    }

    pub fn with_p(mut self, p: Vec<f64>) -> Self {
        self.p = p;
        self
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn hamiltonians(&self) -> (&OperatorSum, &OperatorSum) {
        (&self.h_am, &self.h_mb)
    }

    pub fn comm_norm(&self) -> f64 {
        self.comm_norm
    }

    pub fn initial_bound(&self) -> &InitialBound {
        &self.initial
    }

    /// A:B marginal after exact evolution for time t.
    pub fn evolved_marginal(&self, t: f64) -> Result<DensityMatrix> {
        check_time(t)?;
        let rho_t = self.propagator.evolve(&self.rho0, t)?;
        partial_trace(&rho_t, &[Site::A, Site::B])
    }

    pub fn rhs(&self, t: f64) -> Result<f64> {
        self.spectrum.rhs(t, &self.config)
    }

    pub fn evaluate(&self, t: f64) -> Result<WitnessReport> {
        let marginal = self.evolved_marginal(t)?;
        let dq = delta_q(&marginal, &self.initial, &self.measure)?;
        let lhs = apply_g_inverse(dq, &self.measure.g)?;
        let rhs = self.rhs(t)?;
        let layout = self.h_am.layout();
        Ok(WitnessReport {
            t,
            p: self.p.clone(),
            comm_norm: self.comm_norm,
            rhs_bound: rhs,
            sup_bound: bound_sup(&self.config),
            lhs,
            delta_q: dq,
            slack: rhs - lhs,
            dim_a: layout.dim_a(),
            mediator_qubits: layout.mediator_qubits(),
            dim_b: layout.dim_b(),
            layout: layout.summary(),
            seed: self.seed,
            measure: self.measure.kind.to_string(),
            g: self.measure.g.name(),
            c_choice: self.config.c_label(),
            c_value: self.config.c_value(),
            initial_bound: self.initial.value,
        })
    }

    pub fn evaluate_grid(&self, ts: &[f64]) -> Result<Vec<WitnessReport>> {
        ts.iter().map(|&t| self.evaluate(t)).collect()
    }
}

/// One-shot evaluation with a product-state initial budget.
pub fn evaluate(
    h_am: &OperatorSum,
    h_mb: &OperatorSum,
    rho0: &DensityMatrix,
    t: f64,
    config: &BoundConfig,
    measure: &CorrelationMeasure,
) -> Result<WitnessReport> {
    Experiment::new(
        h_am.clone(),
        h_mb.clone(),
        rho0.clone(),
        *config,
        measure.clone(),
        &InitialBoundOptions::default(),
    )?
    .evaluate(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::to_dense;
    use crate::hamiltonians::{build, canonical_witness, classical_pair};
    use crate::layout::{pauli_matrix, CMatrix};
    use crate::pauli::PauliLabel;
    use crate::states::product_plus_zero_plus;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn xyz() -> CMatrix {
        pauli_matrix(PauliLabel::X)
            .kronecker(&pauli_matrix(PauliLabel::Y))
            .kronecker(&pauli_matrix(PauliLabel::Z))
    }

    fn three_qubits(m: CMatrix) -> DenseOperator {
        DenseOperator::new(m, vec![(Site::A, 2), (Site::Mediator(0), 2), (Site::B, 2)]).unwrap()
    }

    #[test]
    fn generator_of_canonical_commutator() {
        let k = three_qubits(xyz() * C64::new(0.0, -2.0));
        let hk = hermitian_generator(&k).unwrap();
        assert!((hk.matrix() + xyz() * c(2.0)).norm() < 1e-15);
        let ev = herm_eig(hk.matrix()).unwrap().values;
        assert!((ev[0] + 2.0).abs() < 1e-12 && (ev[7] - 2.0).abs() < 1e-12);
        let zero = three_qubits(CMatrix::zeros(8, 8));
        assert!(hermitian_generator(&zero).unwrap().matrix().norm() == 0.0);
        let herm = three_qubits(xyz());
        assert!(matches!(hermitian_generator(&herm), Err(Error::NotSkewHermitian(_))));
    }

    #[test]
    fn bound_closed_form() {
        let k = three_qubits(xyz() * C64::new(0.0, -2.0));
        let cfg = BoundConfig::new(2);
        let rhs = bound_rhs(&k, 0.5, &cfg).unwrap();
        assert!((rhs - 8.0 * 0.125_f64.sin()).abs() < 1e-12);
        assert!((rhs - 0.99740).abs() < 1e-5);
        assert_eq!(bound_rhs(&three_qubits(CMatrix::zeros(8, 8)), 0.7, &cfg).unwrap(), 0.0);
        assert!(bound_rhs(&k, -1.0, &cfg).is_err());
    }

    #[test]
    fn bound_sup_values() {
        assert_eq!(bound_sup(&BoundConfig::new(2)), 8.0);
        assert_eq!(bound_sup(&BoundConfig::new(2).with_override(1.0)), 4.0);
        assert_eq!(bound_sup(&BoundConfig::new(4).with_c(CChoice::Sqrt)), 8.0);
        assert!(BoundConfig::new(2).with_override(0.5).validate().is_err());
    }

    #[test]
    fn bound_even_in_k() {
        let (h_am, h_mb) = build(&canonical_witness()).unwrap();
        let k = to_dense(&commutator(&h_am, &h_mb).unwrap()).unwrap();
        let neg = k.map_matrix(|m| -m);
        let cfg = BoundConfig::new(2);
        for t in [0.1, 0.9, 2.3] {
            assert_eq!(bound_rhs(&k, t, &cfg).unwrap(), bound_rhs(&neg, t, &cfg).unwrap());
        }
    }

    #[test]
    fn zassenhaus_basics() {
        let (h_am, h_mb) = build(&canonical_witness()).unwrap();
        let (a, b) = (to_dense(&h_am).unwrap(), to_dense(&h_mb).unwrap());
        let u0 = zassenhaus_unitary(&a, &b, 0.0).unwrap();
        assert!((u0.matrix() - CMatrix::identity(8, 8)).norm() < 1e-14);
        let u = zassenhaus_unitary(&a, &b, 0.7).unwrap();
        let uu = u.matrix() * u.matrix().adjoint();
        assert!((uu - CMatrix::identity(8, 8)).norm() < 1e-10);
        assert!(truncation_error(&a, &b, 0.01).unwrap() <= 1e-5);

        let (c_am, c_mb) = build(&classical_pair()).unwrap();
        let (ca, cb) = (to_dense(&c_am).unwrap(), to_dense(&c_mb).unwrap());
        for t in [0.1, 1.0, 3.0] {
            assert!(truncation_error(&ca, &cb, t).unwrap() <= 1e-12);
        }
        let bad = a.map_matrix(|m| m * C64::new(0.0, 1.0));
        assert!(matches!(zassenhaus_unitary(&bad, &b, 0.1), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn truncation_error_scales_as_cube() {
        let (h_am, h_mb) = build(&canonical_witness()).unwrap();
        let (a, b) = (to_dense(&h_am).unwrap(), to_dense(&h_mb).unwrap());
        let e1 = truncation_error(&a, &b, 0.01).unwrap();
        let e2 = truncation_error(&a, &b, 0.02).unwrap();
        assert!((e2 / e1 - 8.0).abs() < 0.2, "{}", e2 / e1);
    }

    #[test]
    fn g_inverse() {
        assert_eq!(apply_g_inverse(0.0, &GFunction::Identity).unwrap(), 0.0);
        assert_eq!(apply_g_inverse(0.0, &GFunction::Log).unwrap(), 1.0);
        assert!((apply_g_inverse(2f64.ln(), &GFunction::Log).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn canonical_evaluation() {
        let spec = canonical_witness();
        let (h_am, h_mb) = build(&spec).unwrap();
        let rho0 = product_plus_zero_plus(&spec.layout).unwrap();
        let cfg = BoundConfig::new(2);
        let m = CorrelationMeasure::default();
        let r = evaluate(&h_am, &h_mb, &rho0, 0.5, &cfg, &m).unwrap();
        // X_A commutes with H and |+>_A is an X_A eigenstate: A never entangles
        assert!(r.delta_q.abs() < 1e-12, "{}", r.delta_q);
        assert!((r.rhs_bound - 8.0 * 0.125_f64.sin()).abs() < 1e-9);
        assert!((r.comm_norm - 2.0).abs() < 1e-12);
        assert_eq!(r.sup_bound, 8.0);
        assert_eq!(r.p, vec![1.0]);
        assert_eq!(r.layout, "2x2^1x2");
        assert!(r.slack > 0.0);

        let r0 = evaluate(&h_am, &h_mb, &rho0, 0.0, &cfg, &m).unwrap();
        assert!(r0.delta_q.abs() < 1e-12 && r0.rhs_bound == 0.0 && r0.slack.abs() < 1e-12);
    }

    #[test]
    fn canonical_gain_from_y_polarized_mediator() {
        let spec = canonical_witness();
        let (h_am, h_mb) = build(&spec).unwrap();
        let rho0 = crate::states::product_named(&spec.layout, &["0", "+i", "+"]).unwrap();
        let r = evaluate(&h_am, &h_mb, &rho0, 0.5, &BoundConfig::new(2), &CorrelationMeasure::default()).unwrap();
        // reference from an independent dense simulation
        assert!((r.delta_q - 0.186096).abs() < 1e-6, "{}", r.delta_q);
        assert!(r.slack > 0.0);
    }

    #[test]
    fn classical_pair_has_no_gain() {
        let spec = classical_pair();
        let (h_am, h_mb) = build(&spec).unwrap();
        let rho0 = product_plus_zero_plus(&spec.layout).unwrap();
        let exp = Experiment::new(
            h_am,
            h_mb,
            rho0,
            BoundConfig::new(2),
            CorrelationMeasure::default(),
            &InitialBoundOptions::default(),
        )
        .unwrap();
        for t in [0.0, 0.3, 1.0, 2.5] {
            let r = exp.evaluate(t).unwrap();
            assert!(r.delta_q <= 1e-10 && r.rhs_bound <= 1e-10);
        }
    }

    #[test]
    fn experiment_checks_layout() {
        let (h_am, h_mb) = build(&canonical_witness()).unwrap();
        let wrong = DensityMatrix::maximally_mixed(vec![(Site::A, 2), (Site::B, 2)]).unwrap();
        assert!(matches!(
            evaluate(&h_am, &h_mb, &wrong, 0.1, &BoundConfig::new(2), &CorrelationMeasure::default()),
            Err(Error::LayoutMismatch(_))
        ));
        let rho0 = product_plus_zero_plus(h_am.layout()).unwrap();
        assert!(evaluate(&h_am, &h_mb, &rho0, 0.1, &BoundConfig::new(4), &CorrelationMeasure::default()).is_err());
    }
}
