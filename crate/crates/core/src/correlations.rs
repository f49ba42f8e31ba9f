//! Bipartite correlation measures and the initial-correlation budget.
//!
//! Entropies and logarithms of measures are in bits. The `g` functions of
//! gd-continuity use the natural logarithm, so `g = log` inverts to `exp`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dense::{
    entropy, herm_eig, partial_trace, partial_trace_operator, DenseOperator, DensityMatrix,
};
use crate::error::{Error, Result};
use crate::layout::{CMatrix, Site, C64};
use crate::optim::{self, SearchOptions};
use crate::states::random_vector;

/// Largest d_A·d_B accepted by the relative-entropy optimizer.
pub const REE_MAX_DIM: usize = 16;

const PRODUCT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    LogNegativity,
    RelativeEntropyOfEntanglement,
    Negativity,
}

impl FromStr for MeasureKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log_negativity" => Ok(Self::LogNegativity),
            "relative_entropy_of_entanglement" | "ree" => Ok(Self::RelativeEntropyOfEntanglement),
            "negativity" => Ok(Self::Negativity),
            other => Err(Error::InvalidArgument(format!("unknown measure `{other}`"))),
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::LogNegativity => "log_negativity",
            Self::RelativeEntropyOfEntanglement => "relative_entropy_of_entanglement",
            Self::Negativity => "negativity",
        })
    }
}

/// Invertible increasing function from the gd-continuity bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GFunction {
    Identity,
    /// Natural log; inverse is `exp`.
    Log,
    /// `scale · x^exponent`, extended to negative arguments as an odd function.
    Power { scale: f64, exponent: f64 },
}

impl GFunction {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GFunction::Power { scale, exponent }
                if !(scale > 0.0 && exponent > 0.0 && scale.is_finite() && exponent.is_finite()) =>
            {
                Err(Error::InvalidArgument(format!(
                    "g = {scale}·x^{exponent} is not monotone increasing"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            GFunction::Identity => x,
            GFunction::Log => x.ln(),
            GFunction::Power { scale, exponent } => scale * x.signum() * x.abs().powf(exponent),
        }
    }

    pub fn inverse(&self, y: f64) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            GFunction::Identity => y,
            GFunction::Log => y.exp(),
            GFunction::Power { scale, exponent } => y.signum() * (y.abs() / scale).powf(1.0 / exponent),
        })
    }

    pub fn name(&self) -> String {
        match *self {
            GFunction::Identity => "identity".into(),
            GFunction::Log => "log".into(),
            GFunction::Power { scale, exponent } => format!("power({scale},{exponent})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReeOptions {
    /// Independent searches; the first three start from structured seeds.
    pub restarts: usize,
    /// Product pure states in the separable mixture; `None` picks a default.
    pub components: Option<usize>,
    pub max_evals: usize,
    pub seed: u64,
}

impl Default for ReeOptions {
    fn default() -> Self {
        Self { restarts: 4, components: None, max_evals: 20_000, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMeasure {
    pub kind: MeasureKind,
    pub g: GFunction,
    pub ree: ReeOptions,
}

impl Default for CorrelationMeasure {
    fn default() -> Self {
        Self { kind: MeasureKind::LogNegativity, g: GFunction::Identity, ree: ReeOptions::default() }
    }
}

impl CorrelationMeasure {
    pub fn new(kind: MeasureKind, g: GFunction) -> Result<Self> {
        g.validate()?;
        Ok(Self { kind, g, ree: ReeOptions::default() })
    }

    /// Q_{A:B} of a two-site state.
    pub fn value(&self, rho: &DensityMatrix) -> Result<f64> {
        let (d0, d1) = bipartite_dims(rho.operator())?;
        self.value_raw(rho.matrix(), d0, d1)
    }

    fn value_raw(&self, m: &CMatrix, d0: usize, d1: usize) -> Result<f64> {
        match self.kind {
            MeasureKind::LogNegativity => Ok(pt_trace_norm(m, d0, d1)?.log2().max(0.0)),
            MeasureKind::Negativity => Ok(((pt_trace_norm(m, d0, d1)? - 1.0) / 2.0).max(0.0)),
            MeasureKind::RelativeEntropyOfEntanglement => Ok(ree_raw(m, d0, d1, &self.ree)?.value),
        }
    }

    /// Largest value the measure takes on any d0 × d1 state.
    pub fn maximum(&self, d0: usize, d1: usize) -> f64 {
        let d = d0.min(d1) as f64;
        match self.kind {
            MeasureKind::LogNegativity | MeasureKind::RelativeEntropyOfEntanglement => d.log2(),
            MeasureKind::Negativity => (d - 1.0) / 2.0,
        }
    }
}

fn bipartite_dims(op: &DenseOperator) -> Result<(usize, usize)> {
    match op.sites() {
        [(_, d0), (_, d1)] => Ok((*d0, *d1)),
        s => Err(Error::LayoutMismatch(format!(
            "bipartite measure needs a two-site state, got {} sites",
            s.len()
        ))),
    }
}

fn partial_transpose_second(m: &CMatrix, d0: usize, d1: usize) -> CMatrix {
    CMatrix::from_fn(d0 * d1, d0 * d1, |r, c| {
        let (a, b) = (r / d1, r % d1);
        let (a2, b2) = (c / d1, c % d1);
        m[(a * d1 + b2, a2 * d1 + b)]
    })
}

fn pt_trace_norm(m: &CMatrix, d0: usize, d1: usize) -> Result<f64> {
    let pt = partial_transpose_second(m, d0, d1);
    Ok(herm_eig(&pt)?.values.iter().map(|l| l.abs()).sum())
}

/// log₂ ‖ρ^{T_B}‖₁.
pub fn log_negativity(rho: &DensityMatrix) -> Result<f64> {
    CorrelationMeasure::default().value(rho)
}

/// (‖ρ^{T_B}‖₁ − 1)/2.
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    CorrelationMeasure { kind: MeasureKind::Negativity, ..Default::default() }.value(rho)
}

/// S(ρ_A) + S(ρ_B) − S(ρ_AB), in bits.
pub fn mutual_information(rho: &DensityMatrix) -> Result<f64> {
    let sites: Vec<Site> = match rho.sites() {
        [(s0, _), (s1, _)] => vec![*s0, *s1],
        s => {
            return Err(Error::LayoutMismatch(format!(
                "mutual information needs a two-site state, got {} sites",
                s.len()
            )))
        }
    };
    let a = partial_trace(rho, &sites[..1])?;
    let b = partial_trace(rho, &sites[1..])?;
    Ok((entropy(a.matrix())? + entropy(b.matrix())? - entropy(rho.matrix())?).max(0.0))
}

/// S(ρ‖σ) in bits; `+∞` when ρ has weight outside the support of σ.
pub fn relative_entropy(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    let neg_entropy = -entropy(rho)?;
    Ok(neg_entropy - cross_term(rho, sigma)?)
}

/// tr(ρ log₂ σ).
fn cross_term(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    let eig = herm_eig(sigma)?;
    let mut acc = 0.0;
    for (j, &mu) in eig.values.iter().enumerate() {
        let v = eig.vectors.column(j);
        let weight = (v.adjoint() * rho * v)[(0, 0)].re;
        if weight <= 1e-14 {
            continue;
        }
        if mu <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        acc += weight * mu.log2();
    }
    Ok(acc)
}

/// Convex mixture of product pure states; separable by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableState {
    pub weights: Vec<f64>,
    pub a: Vec<Vec<C64>>,
    pub b: Vec<Vec<C64>>,
    pub dims: (usize, usize),
}

impl SeparableState {
    pub fn matrix(&self) -> CMatrix {
        let (d0, d1) = self.dims;
        let mut m = CMatrix::zeros(d0 * d1, d0 * d1);
        for ((w, a), b) in self.weights.iter().zip(&self.a).zip(&self.b) {
            let v = DVector::from_column_slice(a).kronecker(&DVector::from_column_slice(b));
            m += (&v * v.adjoint()) * C64::new(*w, 0.0);
        }
        m
    }

    /// Weights form a probability vector and every factor is a unit vector.
    pub fn is_valid(&self) -> bool {
        let (d0, d1) = self.dims;
        let sum: f64 = self.weights.iter().sum();
        let unit = |v: &Vec<C64>, d: usize| {
            v.len() == d && (v.iter().map(|x| x.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12
        };
        (sum - 1.0).abs() < 1e-12
            && self.weights.iter().all(|&w| w >= 0.0)
            && self.weights.len() == self.a.len()
            && self.a.len() == self.b.len()
            && self.a.iter().all(|v| unit(v, d0))
            && self.b.iter().all(|v| unit(v, d1))
    }
}

#[derive(Clone, Debug)]
pub struct ReeResult {
    /// Upper bound on the relative entropy of entanglement, in bits.
    pub value: f64,
    pub certificate: SeparableState,
    pub converged: bool,
    pub evaluations: usize,
    pub restarts: usize,
}

/// Minimizes S(ρ‖σ) over separable mixtures σ. The result is an upper bound
/// on the true value; `certificate` reproduces it.
pub fn relative_entropy_of_entanglement(rho: &DensityMatrix, opts: &ReeOptions) -> Result<ReeResult> {
    let (d0, d1) = bipartite_dims(rho.operator())?;
    ree_raw(rho.matrix(), d0, d1, opts)
}

struct MixtureCodec {
    d0: usize,
    d1: usize,
    k: usize,
}

impl MixtureCodec {
    fn block(&self) -> usize {
        1 + 2 * self.d0 + 2 * self.d1
    }

    fn decode(&self, x: &[f64]) -> SeparableState {
        let blk = self.block();
        let logits: Vec<f64> = (0..self.k).map(|c| x[c * blk]).collect();
        let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = exps.iter().sum();
        let unit = |re: &[f64], im: &[f64]| -> Vec<C64> {
            let n = re.iter().chain(im).map(|v| v * v).sum::<f64>().sqrt();
            if n == 0.0 {
                let mut e = vec![C64::new(0.0, 0.0); re.len()];
                e[0] = C64::new(1.0, 0.0);
                return e;
            }
            re.iter().zip(im).map(|(r, i)| C64::new(r / n, i / n)).collect()
        };
        let mut a = Vec::with_capacity(self.k);
        let mut b = Vec::with_capacity(self.k);
        for c in 0..self.k {
            let base = c * blk + 1;
            let (d0, d1) = (self.d0, self.d1);
            a.push(unit(&x[base..base + d0], &x[base + d0..base + 2 * d0]));
            let bb = base + 2 * d0;
            b.push(unit(&x[bb..bb + d1], &x[bb + d1..bb + 2 * d1]));
        }
        SeparableState {
            weights: exps.iter().map(|e| e / total).collect(),
            a,
            b,
            dims: (self.d0, self.d1),
        }
    }

    /// Parameter vector for explicit components, padded with negligible ones.
    fn encode(&self, comps: &[(f64, Vec<C64>, Vec<C64>)], rng: &mut ChaCha8Rng) -> Vec<f64> {
        let blk = self.block();
        let mut x = vec![0.0; self.k * blk];
        for c in 0..self.k {
            let (w, a, b) = match comps.get(c) {
                Some((w, a, b)) => (*w, a.clone(), b.clone()),
                None => (0.0, random_vector(self.d0, rng), random_vector(self.d1, rng)),
            };
            let o = c * blk;
            x[o] = w.max(1e-30).ln();
            for (n, v) in a.iter().enumerate() {
                x[o + 1 + n] = v.re;
                x[o + 1 + self.d0 + n] = v.im;
            }
            let ob = o + 1 + 2 * self.d0;
            for (n, v) in b.iter().enumerate() {
                x[ob + n] = v.re;
                x[ob + self.d1 + n] = v.im;
            }
        }
        x
    }
}

fn column(m: &CMatrix, j: usize) -> Vec<C64> {
    m.column(j).iter().cloned().collect()
}

fn basis(d: usize, i: usize) -> Vec<C64> {
    let mut e = vec![C64::new(0.0, 0.0); d];
    e[i] = C64::new(1.0, 0.0);
    e
}

fn ree_raw(rho: &CMatrix, d0: usize, d1: usize, opts: &ReeOptions) -> Result<ReeResult> {
    if d0 * d1 > REE_MAX_DIM {
        return Err(Error::DimensionTooLarge(format!(
            "relative entropy of entanglement limited to d_A·d_B <= {REE_MAX_DIM}, got {}",
            d0 * d1
        )));
    }
    let n = d0 * d1;
    let k = opts.components.unwrap_or((n * n).min(2 * n).max(n)).max(n);
    let codec = MixtureCodec { d0, d1, k };
    let neg_entropy = -entropy(rho)?;
    let objective = |x: &[f64]| -> f64 {
        let sigma = codec.decode(x).matrix();
        match cross_term(rho, &sigma) {
            Ok(c) => neg_entropy - c,
            Err(_) => f64::INFINITY,
        }
    };

    let op = DenseOperator::new(rho.clone(), vec![(Site::A, d0), (Site::B, d1)])?;
    let rho_a = partial_trace_operator(&op, &[Site::A])?;
    let rho_b = partial_trace_operator(&op, &[Site::B])?;
    let ea = herm_eig(rho_a.matrix())?;
    let eb = herm_eig(rho_b.matrix())?;

    let search = SearchOptions {
        max_evals: opts.max_evals,
        initial_step: 0.2,
        min_step: 1e-10,
        block: codec.block(),
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut evaluations = 0;
    let mut converged = false;
    let restarts = opts.restarts.max(1);
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64));
        let comps: Vec<(f64, Vec<C64>, Vec<C64>)> = match r {
            // dephase ρ in the eigenbasis of ρ_A ⊗ ρ_B
            0 => (0..d0)
                .flat_map(|i| (0..d1).map(move |j| (i, j)))
                .map(|(i, j)| {
                    let (a, b) = (column(&ea.vectors, i), column(&eb.vectors, j));
                    let v = DVector::from_column_slice(&a).kronecker(&DVector::from_column_slice(&b));
                    ((v.adjoint() * rho * &v)[(0, 0)].re.max(0.0), a, b)
                })
                .collect(),
            // dephase ρ in the computational product basis
            1 => (0..d0)
                .flat_map(|i| (0..d1).map(move |j| (i, j)))
                .map(|(i, j)| (rho[(i * d1 + j, i * d1 + j)].re.max(0.0), basis(d0, i), basis(d1, j)))
                .collect(),
            // ρ_A ⊗ ρ_B
            2 => (0..d0)
                .flat_map(|i| (0..d1).map(move |j| (i, j)))
                .map(|(i, j)| {
                    (
                        (ea.values[i] * eb.values[j]).max(0.0),
                        column(&ea.vectors, i),
                        column(&eb.vectors, j),
                    )
                })
                .collect(),
            _ => (0..k)
                .map(|_| (1.0, random_vector(d0, &mut rng), random_vector(d1, &mut rng)))
                .collect(),
        };
        let x0 = codec.encode(&comps, &mut rng);
        let out = optim::minimize(objective, x0, &search, &mut rng);
        evaluations += out.evals;
        converged |= out.converged;
        if best.as_ref().is_none_or(|(v, _)| out.value < *v) {
            best = Some((out.value, out.x));
        }
    }
    let (_, x) = best.expect("at least one restart");
    let certificate = codec.decode(&x);
    // Report the value re-evaluated from the certificate itself.
    let value = relative_entropy(rho, &certificate.matrix())?.max(0.0);
    Ok(ReeResult { value, certificate, converged, evaluations, restarts })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundMode {
    /// Certify ρ₀ = ρ_A ⊗ ρ_M ⊗ ρ_B and return 0.
    ProductStateZero,
    Optimized,
}

/// States over which the A:M and M:B suprema run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdmissibleFamily {
    /// Product initial states only: both suprema vanish.
    Product,
    /// Only the marginals of the given ρ₀.
    InitialMarginals,
    /// Every state: the measure's maximum on each cut.
    Unrestricted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateDistance {
    Trace,
    HilbertSchmidt,
}

impl StateDistance {
    pub fn between(&self, x: &CMatrix, y: &CMatrix) -> Result<f64> {
        let diff = x - y;
        Ok(match self {
            StateDistance::Trace => 0.5 * herm_eig(&diff)?.values.iter().map(|l| l.abs()).sum::<f64>(),
            StateDistance::HilbertSchmidt => diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialBoundOptions {
    pub mode: BoundMode,
    pub family: AdmissibleFamily,
    pub distance: StateDistance,
    /// Applied to the A:B distance term.
    pub g: GFunction,
    pub restarts: usize,
    pub max_evals: usize,
    pub seed: u64,
}

impl Default for InitialBoundOptions {
    fn default() -> Self {
        Self {
            mode: BoundMode::ProductStateZero,
            family: AdmissibleFamily::Product,
            distance: StateDistance::Trace,
            g: GFunction::Identity,
            restarts: 4,
            max_evals: 20_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundDiagnostics {
    pub restarts: usize,
    pub evaluations: usize,
    /// Distance of the best product state found.
    pub best_residual: f64,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct InitialBound {
    pub mode: BoundMode,
    pub measure: MeasureKind,
    pub value: f64,
    pub sup_am: f64,
    pub sup_mb: f64,
    pub ab_term: f64,
    pub diagnostics: Option<BoundDiagnostics>,
    /// Best (σ_A, σ_B) for the A:B term.
    pub certificate: Option<(CMatrix, CMatrix)>,
}

impl InitialBound {
    /// Zero budget for a measure, without certification.
    pub fn zero(measure: MeasureKind) -> Self {
        Self {
            mode: BoundMode::ProductStateZero,
            measure,
            value: 0.0,
            sup_am: 0.0,
            sup_mb: 0.0,
            ab_term: 0.0,
            diagnostics: None,
            certificate: None,
        }
    }
}

fn full_layout_sites(rho: &DensityMatrix) -> Result<(Vec<Site>, usize, usize, usize)> {
    let sites = rho.sites();
    let ok = sites.len() >= 3
        && sites[0].0 == Site::A
        && sites[sites.len() - 1].0 == Site::B
        && sites[1..sites.len() - 1].iter().all(|(s, _)| matches!(s, Site::Mediator(_)));
    if !ok {
        return Err(Error::LayoutMismatch("initial bound needs a full A, M…, B state".into()));
    }
    let mediator: Vec<Site> = sites[1..sites.len() - 1].iter().map(|(s, _)| *s).collect();
    let dm: usize = sites[1..sites.len() - 1].iter().map(|(_, d)| d).product();
    Ok((mediator, sites[0].1, dm, sites[sites.len() - 1].1))
}

/// Deviation of ρ₀ from ρ_A ⊗ ρ_M ⊗ ρ_B.
pub fn product_deviation(rho0: &DensityMatrix) -> Result<f64> {
    let (mediator, ..) = full_layout_sites(rho0)?;
    let ra = partial_trace(rho0, &[Site::A])?;
    let rm = partial_trace(rho0, &mediator)?;
    let rb = partial_trace(rho0, &[Site::B])?;
    let prod = ra.matrix().kronecker(rm.matrix()).kronecker(rb.matrix());
    Ok((rho0.matrix() - prod).iter().fold(0.0, |m, z| m.max(z.norm())))
}

/// The budget 𝓑 = sup Q_{A:M} + sup Q_{M:B} + I_{A:B}(ρ₀).
pub fn initial_bound(
    rho0: &DensityMatrix,
    opts: &InitialBoundOptions,
    measure: &CorrelationMeasure,
) -> Result<InitialBound> {
    let (mediator, da, dm, db) = full_layout_sites(rho0)?;
    match opts.mode {
        BoundMode::ProductStateZero => {
            let dev = product_deviation(rho0)?;
            if dev > PRODUCT_TOL {
                return Err(Error::NotProduct(dev));
            }
            Ok(InitialBound::zero(measure.kind))
        }
        BoundMode::Optimized => {
            opts.g.validate()?;
            let (sup_am, sup_mb) = match opts.family {
                AdmissibleFamily::Product => (0.0, 0.0),
                AdmissibleFamily::Unrestricted => (measure.maximum(da, dm), measure.maximum(dm, db)),
                AdmissibleFamily::InitialMarginals => {
                    let mut am_sites = vec![Site::A];
                    am_sites.extend(&mediator);
                    let mut mb_sites = mediator.clone();
                    mb_sites.push(Site::B);
                    let am = partial_trace(rho0, &am_sites)?;
                    let mb = partial_trace(rho0, &mb_sites)?;
                    (measure.value_raw(am.matrix(), da, dm)?, measure.value_raw(mb.matrix(), dm, db)?)
                }
            };
            let ab = partial_trace(rho0, &[Site::A, Site::B])?;
            let (ab_term, diag, cert) = closest_product(ab.matrix(), da, db, opts)?;
            Ok(InitialBound {
                mode: BoundMode::Optimized,
                measure: measure.kind,
                value: sup_am + sup_mb + ab_term,
                sup_am,
                sup_mb,
                ab_term,
                diagnostics: Some(diag),
                certificate: Some(cert),
            })
        }
    }
}

fn density_from_params(x: &[f64], d: usize) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |i, j| C64::new(x[i * d + j], x[d * d + i * d + j]));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    if tr <= 0.0 {
        return CMatrix::identity(d, d) / C64::new(d as f64, 0.0);
    }
    m / C64::new(tr, 0.0)
}

fn sqrt_params(rho: &CMatrix) -> Result<Vec<f64>> {
    let d = rho.nrows();
    let s = herm_eig(rho)?.apply(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    let mut x = vec![0.0; 2 * d * d];
    for i in 0..d {
        for j in 0..d {
            x[i * d + j] = s[(i, j)].re;
            x[d * d + i * d + j] = s[(i, j)].im;
        }
    }
    Ok(x)
}

/// min over σ_A ⊗ σ_B of g(d(ρ_AB, σ_A ⊗ σ_B)).
fn closest_product(
    rho_ab: &CMatrix,
    da: usize,
    db: usize,
    opts: &InitialBoundOptions,
) -> Result<(f64, BoundDiagnostics, (CMatrix, CMatrix))> {
    let op = DenseOperator::new(rho_ab.clone(), vec![(Site::A, da), (Site::B, db)])?;
    let ra = partial_trace_operator(&op, &[Site::A])?.into_matrix();
    let rb = partial_trace_operator(&op, &[Site::B])?.into_matrix();
    let na = 2 * da * da;
    let nb = 2 * db * db;
    let distance = |x: &[f64]| -> f64 {
        let sa = density_from_params(&x[..na], da);
        let sb = density_from_params(&x[na..], db);
        opts.distance.between(rho_ab, &sa.kronecker(&sb)).unwrap_or(f64::INFINITY)
    };
    let search = SearchOptions {
        max_evals: opts.max_evals,
        initial_step: 0.2,
        min_step: 1e-10,
        block: 1,
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut evaluations = 0;
    let mut converged = false;
    let restarts = opts.restarts.max(1);
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64));
        let x0 = if r == 0 {
            let mut x = sqrt_params(&ra)?;
            x.extend(sqrt_params(&rb)?);
            x
        } else {
            let mut v: Vec<f64> = random_vector((na + nb) / 2, &mut rng)
                .into_iter()
                .flat_map(|z| [z.re, z.im])
                .collect();
            v.truncate(na + nb);
            v
        };
        let out = optim::minimize(distance, x0, &search, &mut rng);
        evaluations += out.evals;
        converged |= out.converged;
        if best.as_ref().is_none_or(|(v, _)| out.value < *v) {
            best = Some((out.value, out.x));
        }
    }
    let (_, x) = best.expect("at least one restart");
    let sa = density_from_params(&x[..na], da);
    let sb = density_from_params(&x[na..], db);
    let residual = opts.distance.between(rho_ab, &sa.kronecker(&sb))?;
    let diag = BoundDiagnostics { restarts, evaluations, best_residual: residual, converged };
    Ok((opts.g.apply(residual), diag, (sa, sb)))
}

/// ΔQ = Q(ρ_t) − 𝓑.
pub fn delta_q(rho_t: &DensityMatrix, bound: &InitialBound, measure: &CorrelationMeasure) -> Result<f64> {
    if bound.measure != measure.kind {
        return Err(Error::MeasureMismatch {
            bound: bound.measure.to_string(),
            measure: measure.kind.to_string(),
        });
    }
    Ok(measure.value(rho_t)? - bound.value)
}
