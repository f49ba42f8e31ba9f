//! Subsystem layout: probe A, a chain of mediator qubits, probe B.
//!
//! The layout owns the dictionaries that resolve symbolic probe operator
//! keys to Hermitian matrices. Qubit probes get the Pauli keys `X`, `Y`,
//! `Z`; larger probes get the generalized Gell-Mann basis under keys
//! `L1 ... L(d^2-1)`. The key `I` always denotes the identity.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Largest total Hilbert-space dimension handled densely.
pub const MAX_DIMENSION: usize = 4096;

const HERMITIAN_TOL: f64 = 1e-10;

/// One tensor factor of the A ⊗ M₁ ⊗ … ⊗ M_T ⊗ B space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Site {
    A,
    /// Zero-based mediator qubit index.
    Mediator(usize),
    B,
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::A => write!(f, "A"),
            Site::Mediator(k) => write!(f, "M{}", k + 1),
            Site::B => write!(f, "B"),
        }
    }
}

/// Probe side, used where only A or B is meaningful.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Probe {
    A,
    B,
}

impl From<Probe> for Site {
    fn from(p: Probe) -> Self {
        match p {
            Probe::A => Site::A,
            Probe::B => Site::B,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemLayout {
    dim_a: usize,
    mediator_qubits: usize,
    dim_b: usize,
    a_ops: BTreeMap<String, CMatrix>,
    b_ops: BTreeMap<String, CMatrix>,
}

impl SystemLayout {
    /// Layout with the default probe dictionaries.
    pub fn new(dim_a: usize, mediator_qubits: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidArgument("probe dimensions must be >= 1".into()));
        }
        if mediator_qubits == 0 {
            return Err(Error::InvalidArgument("mediator needs at least one qubit".into()));
        }
        let total = u32::try_from(mediator_qubits)
            .ok()
            .filter(|&t| t < usize::BITS)
            .map(|t| 1usize << t)
            .and_then(|m| m.checked_mul(dim_a))
            .and_then(|x| x.checked_mul(dim_b));
        match total {
            Some(d) if d <= MAX_DIMENSION => {}
            _ => {
                return Err(Error::DimensionTooLarge(format!(
                    "{dim_a} x 2^{mediator_qubits} x {dim_b} exceeds {MAX_DIMENSION}"
                )))
            }
        }
        Ok(Self {
            dim_a,
            mediator_qubits,
            dim_b,
            a_ops: default_dictionary(dim_a),
            b_ops: default_dictionary(dim_b),
        })
    }

    /// Registers an extra named Hermitian operator on a probe.
    pub fn with_operator(mut self, probe: Probe, key: &str, matrix: CMatrix) -> Result<Self> {
        let dim = self.probe_dim(probe);
        if key.is_empty() || key == "I" || key.contains('*') {
            return Err(Error::InvalidArgument(format!("reserved operator key `{key}`")));
        }
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::LayoutMismatch(format!(
                "operator `{key}` is {}x{}, probe {probe:?} has dimension {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if hermitian_deviation(&matrix) > HERMITIAN_TOL {
            return Err(Error::NotHermitian(key.to_string()));
        }
        match probe {
            Probe::A => self.a_ops.insert(key.to_string(), matrix),
            Probe::B => self.b_ops.insert(key.to_string(), matrix),
        };
        Ok(self)
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn mediator_qubits(&self) -> usize {
        self.mediator_qubits
    }

    /// Mediator Hilbert-space dimension, 2^T.
    pub fn dim_mediator(&self) -> usize {
        1 << self.mediator_qubits
    }

    pub fn total_dim(&self) -> usize {
        self.dim_a * self.dim_mediator() * self.dim_b
    }

    pub fn probe_dim(&self, probe: Probe) -> usize {
        match probe {
            Probe::A => self.dim_a,
            Probe::B => self.dim_b,
        }
    }

    /// Sites in tensor order A, M₁ … M_T, B with their dimensions.
    pub fn sites(&self) -> Vec<(Site, usize)> {
        let mut sites = Vec::with_capacity(self.mediator_qubits + 2);
        sites.push((Site::A, self.dim_a));
        sites.extend((0..self.mediator_qubits).map(|k| (Site::Mediator(k), 2)));
        sites.push((Site::B, self.dim_b));
        sites
    }

    /// Non-identity operator keys registered for a probe, in sorted order.
    pub fn operator_keys(&self, probe: Probe) -> Vec<&str> {
        self.dictionary(probe).keys().map(String::as_str).collect()
    }

    pub fn operator(&self, probe: Probe, key: &str) -> Option<&CMatrix> {
        self.dictionary(probe).get(key)
    }

    fn dictionary(&self, probe: Probe) -> &BTreeMap<String, CMatrix> {
        match probe {
            Probe::A => &self.a_ops,
            Probe::B => &self.b_ops,
        }
    }

    /// Same tensor shape, ignoring dictionaries.
    pub fn same_shape(&self, other: &SystemLayout) -> bool {
        self.dim_a == other.dim_a
            && self.mediator_qubits == other.mediator_qubits
            && self.dim_b == other.dim_b
    }

    pub fn summary(&self) -> String {
        format!("{}x2^{}x{}", self.dim_a, self.mediator_qubits, self.dim_b)
    }
}

/// Max entrywise |m - m†|.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn pauli_matrix(label: crate::pauli::PauliLabel) -> CMatrix {
    use crate::pauli::PauliLabel::*;
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let entries = match label {
        I => [l, o, o, l],
        X => [o, l, l, o],
        Y => [o, -i, i, o],
        Z => [l, o, o, -l],
    };
    CMatrix::from_row_slice(2, 2, &entries)
}

fn default_dictionary(dim: usize) -> BTreeMap<String, CMatrix> {
    use crate::pauli::PauliLabel;
    let mut ops = BTreeMap::new();
    if dim == 2 {
        for (key, label) in [("X", PauliLabel::X), ("Y", PauliLabel::Y), ("Z", PauliLabel::Z)] {
            ops.insert(key.to_string(), pauli_matrix(label));
        }
    } else if dim > 2 {
        for (n, m) in gell_mann_basis(dim).into_iter().enumerate() {
            ops.insert(format!("L{}", n + 1), m);
        }
    }
    ops
}

/// Generalized Gell-Mann matrices for dimension `d`: symmetric, then
/// antisymmetric off-diagonal generators, then the d-1 diagonal ones.
/// Normalized so that tr(λ_a λ_b) = 2 δ_ab.
pub fn gell_mann_basis(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = C64::new(1.0, 0.0);
            m[(k, j)] = C64::new(1.0, 0.0);
            out.push(m);
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = C64::new(0.0, -1.0);
            m[(k, j)] = C64::new(0.0, 1.0);
            out.push(m);
        }
    }
    for l in 1..d {
        let mut m = CMatrix::zeros(d, d);
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        for j in 0..l {
            m[(j, j)] = C64::new(norm, 0.0);
        }
        m[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
        out.push(m);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_dimension() {
        let l = SystemLayout::new(3, 2, 2).unwrap();
        assert_eq!(l.total_dim(), 3 * 4 * 2);
        assert_eq!(l.dim_mediator(), 4);
        assert_eq!(l.sites().len(), 4);
    }

    #[test]
    fn rejects_degenerate_layouts() {
        assert!(SystemLayout::new(0, 1, 2).is_err());
        assert!(SystemLayout::new(2, 0, 2).is_err());
        assert!(matches!(
            SystemLayout::new(4, 12, 4),
            Err(Error::DimensionTooLarge(_))
        ));
    }

    #[test]
    fn gell_mann_is_orthonormal_traceless_hermitian() {
        for d in 2..=4 {
            let basis = gell_mann_basis(d);
            assert_eq!(basis.len(), d * d - 1);
            for (a, ma) in basis.iter().enumerate() {
                assert!(hermitian_deviation(ma) < 1e-15);
                assert!(ma.trace().norm() < 1e-14);
                for (b, mb) in basis.iter().enumerate() {
                    let ip = (ma * mb).trace();
                    let expect = if a == b { 2.0 } else { 0.0 };
                    assert!((ip.re - expect).abs() < 1e-12 && ip.im.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn default_dictionaries() {
        let l = SystemLayout::new(2, 1, 3).unwrap();
        assert_eq!(l.operator_keys(Probe::A), vec!["X", "Y", "Z"]);
        assert_eq!(l.operator_keys(Probe::B).len(), 8);
        assert!(l.operator(Probe::B, "L8").is_some());
    }

    #[test]
    fn custom_operator_validation() {
        let l = SystemLayout::new(2, 1, 2).unwrap();
        let mut bad = CMatrix::zeros(2, 2);
        bad[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(
            l.clone().with_operator(Probe::A, "N", bad),
            Err(Error::NotHermitian(_))
        ));
        let proj = CMatrix::from_diagonal_element(2, 2, C64::new(1.0, 0.0));
        assert!(l.clone().with_operator(Probe::A, "I", proj.clone()).is_err());
        assert!(l.clone().with_operator(Probe::A, "P", CMatrix::zeros(3, 3)).is_err());
        let l = l.with_operator(Probe::B, "P", proj).unwrap();
        assert!(l.operator(Probe::B, "P").is_some());
    }
}
