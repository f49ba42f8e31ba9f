//! Construction of the local interaction Hamiltonians `H_AM` and `H_MB`.
//!
//! Every `H_AM` term carries the identity on B and every `H_MB` term the
//! identity on A, so the pair never contains a direct A–B coupling.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::layout::{Probe, SystemLayout, C64};
use crate::pauli::{OperatorString, OperatorSum, PauliLabel, ProbeWord};

/// One explicit term: `coeff · a ⊗ mediator ⊗ b`, keys resolved by the layout.
#[derive(Clone, Debug, PartialEq)]
pub struct TermSpec {
    pub coeff: C64,
    pub a: String,
    pub mediator: String,
    pub b: String,
}

impl TermSpec {
    pub fn am(coeff: f64, a: &str, mediator: &str) -> Self {
        Self { coeff: C64::new(coeff, 0.0), a: a.into(), mediator: mediator.into(), b: "I".into() }
    }

    pub fn mb(coeff: f64, mediator: &str, b: &str) -> Self {
        Self { coeff: C64::new(coeff, 0.0), a: "I".into(), mediator: mediator.into(), b: b.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnsembleKind {
    /// Uniform mediator labels on every qubit.
    General,
    /// Mediator factors restricted to {I, Z} in both Hamiltonians.
    Commuting,
    /// Qubit 1 unrestricted, qubits 2…T restricted to {I, Z}.
    OneQuantumQubit,
}

impl FromStr for EnsembleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Self::General),
            "commuting" => Ok(Self::Commuting),
            "one_quantum_qubit" => Ok(Self::OneQuantumQubit),
            other => Err(Error::InvalidArgument(format!("unknown ensemble kind `{other}`"))),
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::General => "general",
            Self::Commuting => "commuting",
            Self::OneQuantumQubit => "one_quantum_qubit",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub seed: u64,
    pub term_count: usize,
    pub coeff_scale: f64,
}

#[derive(Clone, Debug)]
pub struct HamiltonianSpec {
    pub layout: Arc<SystemLayout>,
    pub terms_am: Vec<TermSpec>,
    pub terms_mb: Vec<TermSpec>,
    pub ensemble: Option<EnsembleSpec>,
}

impl HamiltonianSpec {
    pub fn explicit(layout: Arc<SystemLayout>, terms_am: Vec<TermSpec>, terms_mb: Vec<TermSpec>) -> Self {
        Self { layout, terms_am, terms_mb, ensemble: None }
    }

    pub fn ensemble(layout: Arc<SystemLayout>, ensemble: EnsembleSpec) -> Self {
        Self { layout, terms_am: Vec::new(), terms_mb: Vec::new(), ensemble: Some(ensemble) }
    }
}

/// `H_AM = X_A X_M`, `H_MB = Z_M Z_B` on qubit probes and a single mediator qubit.
pub fn canonical_witness() -> HamiltonianSpec {
    HamiltonianSpec::explicit(
        Arc::new(SystemLayout::new(2, 1, 2).expect("valid layout")),
        vec![TermSpec::am(1.0, "X", "X")],
        vec![TermSpec::mb(1.0, "Z", "Z")],
    )
}

/// `H_AM = X_A Z_M`, `H_MB = Z_M Z_B`: commuting, hence classical.
pub fn classical_pair() -> HamiltonianSpec {
    HamiltonianSpec::explicit(
        Arc::new(SystemLayout::new(2, 1, 2).expect("valid layout")),
        vec![TermSpec::am(1.0, "X", "Z")],
        vec![TermSpec::mb(1.0, "Z", "Z")],
    )
}

pub fn build(spec: &HamiltonianSpec) -> Result<(OperatorSum, OperatorSum)> {
    if let Some(e) = &spec.ensemble {
        if !spec.terms_am.is_empty() || !spec.terms_mb.is_empty() {
            return Err(Error::InvalidArgument(
                "give either explicit terms or an ensemble, not both".into(),
            ));
        }
        return random_ensemble(e.kind, e.seed, spec.layout.clone(), e.term_count, e.coeff_scale);
    }
    let h_am = build_side(&spec.layout, &spec.terms_am, Probe::A)?;
    let h_mb = build_side(&spec.layout, &spec.terms_mb, Probe::B)?;
    Ok((h_am, h_mb))
}

fn build_side(layout: &Arc<SystemLayout>, terms: &[TermSpec], side: Probe) -> Result<OperatorSum> {
    let name = match side {
        Probe::A => "H_AM",
        Probe::B => "H_MB",
    };
    let mut strings = Vec::with_capacity(terms.len());
    for (n, t) in terms.iter().enumerate() {
        if !(t.coeff.re.is_finite() && t.coeff.im.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} term {n}: coefficient {} is not finite", t.coeff)));
        }
        if t.coeff.im != 0.0 {
            return Err(Error::NotHermitian(format!(
                "{name} term {n}: coefficient {} is not real",
                t.coeff
            )));
        }
        let foreign = match side {
            Probe::A => &t.b,
            Probe::B => &t.a,
        };
        if !ProbeWord::key(foreign).is_identity() {
            return Err(Error::Locality(format!(
                "{name} term {n} acts on the far probe with `{foreign}`"
            )));
        }
        let own = match side {
            Probe::A => &t.a,
            Probe::B => &t.b,
        };
        let word = ProbeWord::key(own);
        if !word.is_identity() && layout.operator(side, own).is_none() {
            return Err(Error::UnknownOperator { site: format!("{side:?}"), key: own.clone() });
        }
        let mediator = PauliLabel::parse_string(&t.mediator)?;
        if mediator.len() != layout.mediator_qubits() {
            return Err(Error::LayoutMismatch(format!(
                "{name} term {n}: `{}` has {} labels, mediator has {} qubits",
                t.mediator,
                mediator.len(),
                layout.mediator_qubits()
            )));
        }
        let (a, b) = match side {
            Probe::A => (word, ProbeWord::identity()),
            Probe::B => (ProbeWord::identity(), word),
        };
        strings.push(OperatorString::new(t.coeff, a, mediator, b));
    }
    OperatorSum::from_terms(layout.clone(), strings)?.into_hermitian()
}

/// Seeded random pair of local Hamiltonians. Deterministic in `seed`.
pub fn random_ensemble(
    kind: EnsembleKind,
    seed: u64,
    layout: Arc<SystemLayout>,
    term_count: usize,
    coeff_scale: f64,
) -> Result<(OperatorSum, OperatorSum)> {
    if term_count == 0 {
        return Err(Error::InvalidArgument("term_count must be >= 1".into()));
    }
    if !(coeff_scale.is_finite() && coeff_scale > 0.0) {
        return Err(Error::InvalidArgument(format!("coeff_scale {coeff_scale} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = |probe: Probe, rng: &mut ChaCha8Rng| -> Result<OperatorSum> {
        let keys = layout.operator_keys(probe);
        let t = layout.mediator_qubits();
        let terms: Vec<_> = (0..term_count)
            .map(|_| {
                let coeff = rng.random_range(-coeff_scale..=coeff_scale);
                let word = if keys.is_empty() {
                    ProbeWord::identity()
                } else {
                    ProbeWord::key(keys[rng.random_range(0..keys.len())])
                };
                let mediator = (0..t).map(|k| random_label(kind, k, rng)).collect();
                let (a, b) = match probe {
                    Probe::A => (word, ProbeWord::identity()),
                    Probe::B => (ProbeWord::identity(), word),
                };
                OperatorString::new(C64::new(coeff, 0.0), a, mediator, b)
            })
            .collect();
        OperatorSum::from_terms(layout.clone(), terms)?.into_hermitian()
    };
    let h_am = side(Probe::A, &mut rng)?;
    let h_mb = side(Probe::B, &mut rng)?;
    Ok((h_am, h_mb))
}

fn random_label(kind: EnsembleKind, qubit: usize, rng: &mut ChaCha8Rng) -> PauliLabel {
    const DIAGONAL: [PauliLabel; 2] = [PauliLabel::I, PauliLabel::Z];
    let unrestricted = match kind {
        EnsembleKind::General => true,
        EnsembleKind::Commuting => false,
        EnsembleKind::OneQuantumQubit => qubit == 0,
    };
    if unrestricted {
        PauliLabel::ALL[rng.random_range(0..4)]
    } else {
        DIAGONAL[rng.random_range(0..2)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{embed, to_dense};
    use crate::layout::{CMatrix, Site};
    use crate::pauli::{commutator, dephase_sum};

    #[test]
    fn canonical_and_classical() {
        let (h_am, h_mb) = build(&canonical_witness()).unwrap();
        let k = commutator(&h_am, &h_mb).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(k.terms()[0].coeff, C64::new(0.0, -2.0));
        assert_eq!(k.terms()[0].mediator, vec![PauliLabel::Y]);

        let (h_am, h_mb) = build(&classical_pair()).unwrap();
        assert!(commutator(&h_am, &h_mb).unwrap().is_empty());
    }

    #[test]
    fn empty_terms() {
        let l = Arc::new(SystemLayout::new(2, 2, 2).unwrap());
        let (h_am, h_mb) = build(&HamiltonianSpec::explicit(l, vec![], vec![])).unwrap();
        assert!(h_am.is_empty() && h_mb.is_empty());
        assert!(h_am.is_hermitian());
    }

    #[test]
    fn build_errors() {
        let l = Arc::new(SystemLayout::new(2, 1, 3).unwrap());
        let spec = |am: TermSpec, mb: TermSpec| HamiltonianSpec::explicit(l.clone(), vec![am], vec![mb]);
        let ok_mb = TermSpec::mb(1.0, "Z", "L1");

        let nonlocal = TermSpec { b: "L2".into(), ..TermSpec::am(1.0, "X", "X") };
        assert!(matches!(build(&spec(nonlocal, ok_mb.clone())), Err(Error::Locality(_))));

        let unknown = TermSpec::am(1.0, "Q", "X");
        assert!(matches!(build(&spec(unknown, ok_mb.clone())), Err(Error::UnknownOperator { .. })));

        // qubit keys do not exist on a qutrit probe
        let wrong_dim = TermSpec::mb(1.0, "Z", "X");
        assert!(matches!(
            build(&spec(TermSpec::am(1.0, "X", "X"), wrong_dim)),
            Err(Error::UnknownOperator { .. })
        ));

        let complex = TermSpec { coeff: C64::new(1.0, 0.5), ..TermSpec::am(1.0, "X", "X") };
        assert!(matches!(build(&spec(complex, ok_mb.clone())), Err(Error::NotHermitian(_))));

        let short = TermSpec::am(1.0, "X", "XZ");
        assert!(matches!(build(&spec(short, ok_mb)), Err(Error::LayoutMismatch(_))));
    }

    #[test]
    fn ensemble_kind_parsing() {
        assert_eq!("commuting".parse::<EnsembleKind>().unwrap(), EnsembleKind::Commuting);
        assert_eq!(
            EnsembleKind::OneQuantumQubit.to_string().parse::<EnsembleKind>().unwrap(),
            EnsembleKind::OneQuantumQubit
        );
        assert!("quantum".parse::<EnsembleKind>().is_err());
    }

    #[test]
    fn ensembles_are_deterministic() {
        let l = Arc::new(SystemLayout::new(3, 2, 2).unwrap());
        let a = random_ensemble(EnsembleKind::General, 42, l.clone(), 5, 1.0).unwrap();
        let b = random_ensemble(EnsembleKind::General, 42, l.clone(), 5, 1.0).unwrap();
        assert!(a.0.approx_eq(&b.0, 0.0) && a.1.approx_eq(&b.1, 0.0));
        let c = random_ensemble(EnsembleKind::General, 43, l.clone(), 5, 1.0).unwrap();
        assert!(!a.0.approx_eq(&c.0, 0.0));
        assert!(random_ensemble(EnsembleKind::General, 1, l.clone(), 0, 1.0).is_err());
        assert!(random_ensemble(EnsembleKind::General, 1, l, 3, -1.0).is_err());
    }

    #[test]
    fn ensemble_shapes_respect_locality() {
        let l = Arc::new(SystemLayout::new(2, 3, 3).unwrap());
        for seed in 0..20 {
            let (h_am, h_mb) = random_ensemble(EnsembleKind::General, seed, l.clone(), 6, 2.0).unwrap();
            assert!(h_am.terms().iter().all(|s| s.b.is_identity() && s.coeff.norm() <= 2.0 * 6.0));
            assert!(h_mb.terms().iter().all(|s| s.a.is_identity()));
        }
    }

    #[test]
    fn commuting_ensemble_commutes() {
        let l = Arc::new(SystemLayout::new(2, 2, 2).unwrap());
        for seed in 0..100 {
            let (h_am, h_mb) = random_ensemble(EnsembleKind::Commuting, seed, l.clone(), 4, 1.0).unwrap();
            assert!(commutator(&h_am, &h_mb).unwrap().is_empty(), "seed {seed}");
        }
    }

    #[test]
    fn one_quantum_qubit_dephasing_first_qubit_kills_commutator() {
        let l = Arc::new(SystemLayout::new(2, 3, 2).unwrap());
        for seed in 0..50 {
            let (h_am, h_mb) =
                random_ensemble(EnsembleKind::OneQuantumQubit, seed, l.clone(), 5, 1.0).unwrap();
            for s in h_am.terms().iter().chain(h_mb.terms()) {
                assert!(s.mediator[1..].iter().all(|l| !l.is_off_diagonal()));
            }
            let p = [0.5, 1.0, 1.0];
            let k = commutator(&dephase_sum(&h_am, &p).unwrap(), &dephase_sum(&h_mb, &p).unwrap()).unwrap();
            assert!(k.is_empty(), "seed {seed}: {k}");
        }
    }

    #[test]
    fn h_am_commutes_with_b_operators() {
        let l = Arc::new(SystemLayout::new(2, 2, 3).unwrap());
        let ob = CMatrix::from_fn(3, 3, |i, j| C64::new((i * 3 + j) as f64 * 0.1, (i as f64) - (j as f64)));
        for seed in 0..10 {
            let (h_am, _) = random_ensemble(EnsembleKind::General, seed, l.clone(), 6, 1.0).unwrap();
            let h = to_dense(&h_am).unwrap();
            let o = embed(h.sites(), Site::B, &ob).unwrap();
            let c = h.matrix() * &o - &o * h.matrix();
            assert!(c.iter().all(|x| x.norm() < 1e-12));
        }
    }
}
