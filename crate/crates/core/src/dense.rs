//! Dense complex linear algebra over the A ⊗ M ⊗ B space.
//!
//! Every matrix function goes through a Hermitian eigendecomposition; at
//! the dimensions targeted here (D ≤ a few hundred) this is exact to
//! rounding and has no series-truncation error of its own.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::layout::{hermitian_deviation, pauli_matrix, CMatrix, Probe, Site, SystemLayout, C64};
use crate::pauli::{OperatorString, OperatorSum, PauliLabel, ProbeWord};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const STATE_TOL: f64 = 1e-10;

/// Matrix plus the tensor factors it acts on, most significant first.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    data: CMatrix,
    sites: Vec<(Site, usize)>,
}

impl DenseOperator {
    pub fn new(data: CMatrix, sites: Vec<(Site, usize)>) -> Result<Self> {
        let dim: usize = sites.iter().map(|&(_, d)| d).product();
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::LayoutMismatch(format!(
                "{}x{} matrix on sites of total dimension {dim}",
                data.nrows(),
                data.ncols()
            )));
        }
        for (n, (s, _)) in sites.iter().enumerate() {
            if sites[..n].iter().any(|(t, _)| t == s) {
                return Err(Error::InvalidSubsystems(format!("site {s} repeated")));
            }
        }
        Ok(Self { data, sites })
    }

    pub fn on_layout(data: CMatrix, layout: &SystemLayout) -> Result<Self> {
        Self::new(data, layout.sites())
    }

    pub fn zeros_like(&self) -> Self {
        Self { data: CMatrix::zeros(self.dim(), self.dim()), sites: self.sites.clone() }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn sites(&self) -> &[(Site, usize)] {
        &self.sites
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { data: self.data.adjoint(), sites: self.sites.clone() }
    }

    pub fn map_matrix(&self, f: impl FnOnce(&CMatrix) -> CMatrix) -> Self {
        Self { data: f(&self.data), sites: self.sites.clone() }
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.data)
    }

    pub fn same_sites(&self, other: &DenseOperator) -> bool {
        self.sites == other.sites
    }
}

/// A validated state: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(DenseOperator);

impl DensityMatrix {
    pub fn new(op: DenseOperator) -> Result<Self> {
        let dev = op.hermitian_deviation();
        if dev > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {dev:e})")));
        }
        let tr = op.data.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let min = herm_eig(&op.data)?.values[0];
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self(op))
    }

    /// Internal constructor for outputs of trace- and positivity-preserving maps.
    pub(crate) fn trusted(op: DenseOperator) -> Self {
        Self(op)
    }

    /// |ψ⟩⟨ψ| for a normalized (or normalizable) vector.
    pub fn pure(amplitudes: &[C64], sites: Vec<(Site, usize)>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let v = nalgebra::DVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|a| a / norm));
        Self::new(DenseOperator::new(&v * v.adjoint(), sites)?)
    }

    /// Tensor product of states on disjoint sites, in the given order.
    pub fn product(factors: &[&DensityMatrix]) -> Result<Self> {
        let mut data = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        let mut sites = Vec::new();
        for f in factors {
            data = data.kronecker(f.matrix());
            sites.extend_from_slice(f.sites());
        }
        Ok(Self(DenseOperator::new(data, sites)?))
    }

    /// Maximally mixed state on the given sites.
    pub fn maximally_mixed(sites: Vec<(Site, usize)>) -> Result<Self> {
        let d: usize = sites.iter().map(|&(_, d)| d).product();
        let data = CMatrix::from_diagonal_element(d, d, C64::new(1.0 / d as f64, 0.0));
        Ok(Self(DenseOperator::new(data, sites)?))
    }

    pub fn operator(&self) -> &DenseOperator {
        &self.0
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0.data
    }

    pub fn sites(&self) -> &[(Site, usize)] {
        &self.0.sites
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn purity(&self) -> f64 {
        (self.matrix() * self.matrix()).trace().re
    }
}

/// Resolves a probe word to the ordered product of its key matrices.
pub fn probe_word_matrix(layout: &SystemLayout, probe: Probe, word: &ProbeWord) -> Result<CMatrix> {
    let d = layout.probe_dim(probe);
    let mut m = CMatrix::identity(d, d);
    for key in word.keys() {
        let op = layout.operator(probe, key).ok_or_else(|| Error::UnknownOperator {
            site: format!("{probe:?}"),
            key: key.clone(),
        })?;
        m *= op;
    }
    Ok(m)
}

/// Kronecker embedding of a single string.
pub fn string_matrix(layout: &SystemLayout, s: &OperatorString) -> Result<CMatrix> {
    if s.mediator.len() != layout.mediator_qubits() {
        return Err(Error::LayoutMismatch(format!(
            "string over {} mediator qubits on layout {}",
            s.mediator.len(),
            layout.summary()
        )));
    }
    let mut m = probe_word_matrix(layout, Probe::A, &s.a)?;
    for &l in &s.mediator {
        m = m.kronecker(&pauli_matrix(l));
    }
    m = m.kronecker(&probe_word_matrix(layout, Probe::B, &s.b)?);
    Ok(m * s.coeff)
}

pub fn to_dense(h: &OperatorSum) -> Result<DenseOperator> {
    let layout = h.layout();
    let d = layout.total_dim();
    let mut m = CMatrix::zeros(d, d);
    for s in h.terms() {
        m += string_matrix(layout, s)?;
    }
    DenseOperator::on_layout(m, layout)
}

/// Embeds `op` on one site, identity elsewhere.
pub fn embed(sites: &[(Site, usize)], site: Site, op: &CMatrix) -> Result<CMatrix> {
    let mut found = false;
    let mut m = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for &(s, d) in sites {
        if s == site {
            if op.nrows() != d || op.ncols() != d {
                return Err(Error::LayoutMismatch(format!("operator on {s} must be {d}x{d}")));
            }
            m = m.kronecker(op);
            found = true;
        } else {
            m = m.kronecker(&CMatrix::identity(d, d));
        }
    }
    if !found {
        return Err(Error::InvalidSubsystems(format!("site {site} not present")));
    }
    Ok(m)
}

/// Pauli label embedded on mediator qubit `k` of a full layout.
pub fn embed_pauli(layout: &SystemLayout, k: usize, label: PauliLabel) -> Result<CMatrix> {
    if k >= layout.mediator_qubits() {
        return Err(Error::QubitOutOfRange { index: k, len: layout.mediator_qubits() });
    }
    embed(&layout.sites(), Site::Mediator(k), &pauli_matrix(label))
}

/// Eigenvalues ascending, eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// V diag(f(λ)) V†.
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let fl = f(l);
            for x in scaled.column_mut(j).iter_mut() {
                *x *= fl;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|l| C64::new(l, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, l| m.max(l.abs()))
    }
}

fn hermitian_scale(m: &CMatrix) -> f64 {
    m.iter().fold(1.0_f64, |s, x| s.max(x.norm()))
}

pub fn herm_eig(m: &CMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::NotHermitian("non-square matrix".into()));
    }
    let dev = hermitian_deviation(m);
    if dev > HERMITIAN_TOL * hermitian_scale(m) {
        return Err(Error::NotHermitian(format!("deviation {dev:e}")));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(
        &order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>(),
    );
    Ok(HermitianEigen { values, vectors })
}

/// f(m) for Hermitian `m` by spectral calculus.
pub fn matrix_func_herm(m: &CMatrix, f: impl Fn(f64) -> C64) -> Result<CMatrix> {
    Ok(herm_eig(m)?.apply(f))
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() || m.iter().all(|x| *x == C64::new(0.0, 0.0)) {
        return 0.0;
    }
    m.singular_values().max()
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMatrix) -> Result<f64> {
    Ok(herm_eig(m)?.values.iter().map(|l| l.abs()).sum())
}

/// Von Neumann entropy in bits.
pub fn entropy(rho: &CMatrix) -> Result<f64> {
    Ok(herm_eig(rho)?
        .values
        .iter()
        .filter(|&&l| l > 1e-300)
        .map(|&l| -l * l.log2())
        .sum())
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Traces out every site not in `keep`. Kept sites retain their original order.
pub fn partial_trace_operator(op: &DenseOperator, keep: &[Site]) -> Result<DenseOperator> {
    for (n, s) in keep.iter().enumerate() {
        if !op.sites.iter().any(|(t, _)| t == s) {
            return Err(Error::InvalidSubsystems(format!("site {s} not present")));
        }
        if keep[..n].contains(s) {
            return Err(Error::InvalidSubsystems(format!("site {s} repeated")));
        }
    }
    let dims: Vec<usize> = op.sites.iter().map(|&(_, d)| d).collect();
    let kept_mask: Vec<bool> = op.sites.iter().map(|(s, _)| keep.contains(s)).collect();
    let kept_sites: Vec<(Site, usize)> =
        op.sites.iter().zip(&kept_mask).filter(|(_, &k)| k).map(|(s, _)| *s).collect();
    let kept_dims: Vec<usize> = kept_sites.iter().map(|&(_, d)| d).collect();
    let traced_dims: Vec<usize> =
        dims.iter().zip(&kept_mask).filter(|(_, &k)| !k).map(|(&d, _)| d).collect();
    let kstr = strides(&kept_dims);
    let tstr = strides(&traced_dims);
    let fstr = strides(&dims);

    let dk: usize = kept_dims.iter().product();
    let dt: usize = traced_dims.iter().product();
    // full index of (kept multi-index, traced multi-index)
    let split = |idx: usize| -> (usize, usize) {
        let (mut kk, mut ki, mut ti, mut tt) = (0, 0, 0, 0);
        for (n, &s) in fstr.iter().enumerate() {
            let digit = (idx / s) % dims[n];
            if kept_mask[n] {
                ki += digit * kstr[kk];
                kk += 1;
            } else {
                ti += digit * tstr[tt];
                tt += 1;
            }
        }
        (ki, ti)
    };
    let full = op.dim();
    let mut by_traced: Vec<Vec<(usize, usize)>> = vec![Vec::new(); dt];
    for idx in 0..full {
        let (ki, ti) = split(idx);
        by_traced[ti].push((ki, idx));
    }
    let mut out = CMatrix::zeros(dk, dk);
    for group in &by_traced {
        for &(ri, r) in group {
            for &(ci, c) in group {
                out[(ri, ci)] += op.data[(r, c)];
            }
        }
    }
    DenseOperator::new(out, kept_sites)
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[Site]) -> Result<DensityMatrix> {
    Ok(DensityMatrix::trusted(partial_trace_operator(&rho.0, keep)?))
}

/// Transposes one factor of a two-site operator.
pub fn partial_transpose(rho: &DensityMatrix, site: Site) -> Result<DenseOperator> {
    partial_transpose_operator(rho.operator(), site)
}

pub fn partial_transpose_operator(op: &DenseOperator, site: Site) -> Result<DenseOperator> {
    let [(s0, d0), (s1, d1)] = op.sites[..] else {
        return Err(Error::LayoutMismatch(format!(
            "partial transpose needs a bipartite operator, got {} sites",
            op.sites.len()
        )));
    };
    let first = if site == s0 {
        true
    } else if site == s1 {
        false
    } else {
        return Err(Error::InvalidSubsystems(format!("site {site} not present")));
    };
    let m = &op.data;
    let mut out = CMatrix::zeros(d0 * d1, d0 * d1);
    for a in 0..d0 {
        for b in 0..d1 {
            for a2 in 0..d0 {
                for b2 in 0..d1 {
                    let v = if first {
                        m[(a2 * d1 + b, a * d1 + b2)]
                    } else {
                        m[(a * d1 + b2, a2 * d1 + b)]
                    };
                    out[(a * d1 + b, a2 * d1 + b2)] = v;
                }
            }
        }
    }
    DenseOperator::new(out, op.sites.clone())
}

/// Cached eigendecomposition of a Hamiltonian for repeated evolution.
#[derive(Clone, Debug)]
pub struct Propagator {
    eig: HermitianEigen,
    sites: Vec<(Site, usize)>,
}

impl Propagator {
    pub fn new(h: &DenseOperator) -> Result<Self> {
        Ok(Self { eig: herm_eig(h.matrix())?, sites: h.sites.clone() })
    }

    /// exp(−iHt).
    pub fn unitary(&self, t: f64) -> CMatrix {
        self.eig.apply(|l| C64::from_polar(1.0, -l * t))
    }

    pub fn evolve(&self, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        if rho.sites() != self.sites.as_slice() {
            return Err(Error::LayoutMismatch("state and Hamiltonian sites differ".into()));
        }
        if t == 0.0 {
            return Ok(rho.clone());
        }
        let u = self.unitary(t);
        let data = &u * rho.matrix() * u.adjoint();
        Ok(DensityMatrix::trusted(DenseOperator { data, sites: self.sites.clone() }))
    }
}

/// U ρ₀ U† with U = exp(−iHt).
pub fn evolve(rho0: &DensityMatrix, h: &DenseOperator, t: f64) -> Result<DensityMatrix> {
    Propagator::new(h)?.evolve(rho0, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::OperatorSum;
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().fold(0.0, |m, x| m.max(x.norm()))
    }

    fn qubit_sites() -> Vec<(Site, usize)> {
        vec![(Site::A, 2), (Site::B, 2)]
    }

    fn bell() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)], qubit_sites()).unwrap()
    }

    #[test]
    fn densify_identity_and_zero() {
        let l = Arc::new(SystemLayout::new(2, 2, 3).unwrap());
        let z = to_dense(&OperatorSum::zero(l.clone())).unwrap();
        assert_eq!(z.dim(), 24);
        assert!(z.matrix().iter().all(|x| x.norm() == 0.0));
        let id = OperatorSum::from_terms(l.clone(), vec![OperatorString::identity(2)]).unwrap();
        let d = to_dense(&id).unwrap();
        assert_eq!(max_diff(d.matrix(), &CMatrix::identity(24, 24)), 0.0);
    }

    #[test]
    fn densify_unknown_key() {
        let l = Arc::new(SystemLayout::new(2, 1, 2).unwrap());
        let h = OperatorSum::from_terms(l, vec![OperatorString::parse(1.0, "L3", "X", "I").unwrap()]).unwrap();
        assert!(matches!(to_dense(&h), Err(Error::UnknownOperator { .. })));
    }

    #[test]
    fn eig_of_z_and_identity() {
        let e = herm_eig(&pauli_matrix(PauliLabel::Z)).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);
        let e = herm_eig(&CMatrix::identity(3, 3)).unwrap();
        assert!(e.values.iter().all(|&l| (l - 1.0).abs() < 1e-15));
        let mut bad = CMatrix::zeros(2, 2);
        bad[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(herm_eig(&bad), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn matrix_functions() {
        let cos0 = matrix_func_herm(&CMatrix::zeros(3, 3), |l| c(l.cos(), 0.0)).unwrap();
        assert!(max_diff(&cos0, &CMatrix::identity(3, 3)) < 1e-15);

        let u = matrix_func_herm(&pauli_matrix(PauliLabel::Z), |l| {
            C64::from_polar(1.0, -std::f64::consts::PI * l)
        })
        .unwrap();
        assert!(max_diff(&u, &(-CMatrix::identity(2, 2))) < 1e-15);

        let t: f64 = 0.5;
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0, 0.0), c(-2.0, 0.0)]))
            * c(t * t / 2.0, 0.0);
        let cm = matrix_func_herm(&m, |l| c(l.cos(), 0.0)).unwrap();
        let expect = 0.25_f64.cos();
        assert!((cm[(0, 0)].re - expect).abs() < 1e-15);
        assert!((cm[(1, 1)].re - expect).abs() < 1e-15);
    }

    #[test]
    fn norms() {
        assert_eq!(spectral_norm(&CMatrix::zeros(4, 4)), 0.0);
        assert!((spectral_norm(&pauli_matrix(PauliLabel::X)) - 1.0).abs() < 1e-15);
        let xyz = pauli_matrix(PauliLabel::X)
            .kronecker(&pauli_matrix(PauliLabel::Y))
            .kronecker(&pauli_matrix(PauliLabel::Z))
            * c(0.0, -2.0);
        assert!((spectral_norm(&xyz) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn partial_trace_product_and_mixed() {
        let ra = DensityMatrix::pure(&[c(0.6, 0.0), c(0.0, 0.8)], vec![(Site::A, 2)]).unwrap();
        let rm = DensityMatrix::maximally_mixed(vec![(Site::Mediator(0), 2)]).unwrap();
        let rb = DensityMatrix::pure(&[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)], vec![(Site::B, 3)]).unwrap();
        let full = DensityMatrix::product(&[&ra, &rm, &rb]).unwrap();
        let ab = partial_trace(&full, &[Site::A, Site::B]).unwrap();
        let expect = DensityMatrix::product(&[&ra, &rb]).unwrap();
        assert!(max_diff(ab.matrix(), expect.matrix()) < 1e-15);
        assert_eq!(ab.sites(), expect.sites());

        let mixed = DensityMatrix::maximally_mixed(vec![(Site::A, 3), (Site::Mediator(0), 2), (Site::B, 2)])
            .unwrap();
        let a = partial_trace(&mixed, &[Site::A]).unwrap();
        assert!(max_diff(a.matrix(), &(CMatrix::identity(3, 3) / c(3.0, 0.0))) < 1e-15);

        assert!(partial_trace(&mixed, &[Site::Mediator(3)]).is_err());
        assert!(partial_trace(&mixed, &[Site::A, Site::A]).is_err());
    }

    #[test]
    fn partial_trace_of_bell_extension() {
        // (|0_A 0_M 0_B> + |1_A 0_M 1_B>)/√2
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![c(0.0, 0.0); 8];
        amps[0] = c(s, 0.0);
        amps[5] = c(s, 0.0);
        let full =
            DensityMatrix::pure(&amps, vec![(Site::A, 2), (Site::Mediator(0), 2), (Site::B, 2)]).unwrap();
        let ab = partial_trace(&full, &[Site::A, Site::B]).unwrap();
        assert!(max_diff(ab.matrix(), bell().matrix()) < 1e-15);
        for keep in [Site::A, Site::B] {
            let m = partial_trace(&ab, &[keep]).unwrap();
            assert!(max_diff(m.matrix(), &(CMatrix::identity(2, 2) * c(0.5, 0.0))) < 1e-15);
        }
    }

    #[test]
    fn partial_transpose_properties() {
        let pt = partial_transpose(&bell(), Site::B).unwrap();
        let e = herm_eig(pt.matrix()).unwrap();
        assert!((e.values[0] + 0.5).abs() < 1e-14);

        let twice = partial_transpose_operator(&pt, Site::B).unwrap();
        assert!(max_diff(twice.matrix(), bell().matrix()) == 0.0);

        // separable mixture of |00><00| and |++><++|
        let zero = DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 0.0)], vec![(Site::A, 2)]).unwrap();
        let plus = DensityMatrix::pure(&[c(1.0, 0.0), c(1.0, 0.0)], vec![(Site::A, 2)]).unwrap();
        let mix = |x: &DensityMatrix| {
            DenseOperator::new(x.matrix().kronecker(x.matrix()), qubit_sites()).unwrap().into_matrix()
        };
        let sep = DensityMatrix::new(
            DenseOperator::new((mix(&zero) + mix(&plus)) * c(0.5, 0.0), qubit_sites()).unwrap(),
        )
        .unwrap();
        let e = herm_eig(partial_transpose(&sep, Site::A).unwrap().matrix()).unwrap();
        assert!(e.values[0] >= -1e-10);

        let tri = DensityMatrix::maximally_mixed(vec![(Site::A, 2), (Site::Mediator(0), 2), (Site::B, 2)])
            .unwrap();
        assert!(matches!(partial_transpose(&tri, Site::A), Err(Error::LayoutMismatch(_))));
        assert!(partial_transpose(&bell(), Site::Mediator(0)).is_err());
    }

    #[test]
    fn evolution_basics() {
        let sites = vec![(Site::Mediator(0), 2)];
        let zero = DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 0.0)], sites.clone()).unwrap();
        let z = DenseOperator::new(pauli_matrix(PauliLabel::Z), sites.clone()).unwrap();
        for t in [0.0, 0.3, 2.0] {
            let r = evolve(&zero, &z, t).unwrap();
            assert!(max_diff(r.matrix(), zero.matrix()) < 1e-15);
        }
        let x = DenseOperator::new(pauli_matrix(PauliLabel::X), sites).unwrap();
        let mixedish = DensityMatrix::new(
            DenseOperator::new(
                CMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]),
                vec![(Site::Mediator(0), 2)],
            )
            .unwrap(),
        )
        .unwrap();
        let prop = Propagator::new(&x).unwrap();
        let p0 = mixedish.purity();
        for k in 0..10 {
            let r = prop.evolve(&mixedish, 0.37 * k as f64).unwrap();
            assert!((r.purity() - p0).abs() < 1e-13);
            assert!((r.matrix().trace().re - 1.0).abs() < 1e-13);
        }
        let skew = DenseOperator::new(pauli_matrix(PauliLabel::Y) * c(0.0, 1.0), vec![(Site::Mediator(0), 2)])
            .unwrap();
        assert!(evolve(&zero, &skew, 1.0).is_err());
    }

    #[test]
    fn state_validation() {
        let sites = vec![(Site::A, 2)];
        let neg = DenseOperator::new(
            CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.5, 0.0), c(-0.5, 0.0)])),
            sites.clone(),
        )
        .unwrap();
        assert!(matches!(DensityMatrix::new(neg), Err(Error::InvalidState(_))));
        let half = DenseOperator::new(CMatrix::identity(2, 2) * c(0.25, 0.0), sites.clone()).unwrap();
        assert!(DensityMatrix::new(half).is_err());
        assert!(DensityMatrix::pure(&[c(0.0, 0.0), c(0.0, 0.0)], sites).is_err());
    }

    #[test]
    fn entropies() {
        assert!(entropy(bell().matrix()).unwrap().abs() < 1e-12);
        let mm = DensityMatrix::maximally_mixed(qubit_sites()).unwrap();
        assert!((entropy(mm.matrix()).unwrap() - 2.0).abs() < 1e-12);
    }
}
