//! Initial states on the full A ⊗ M ⊗ B layout.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dense::DensityMatrix;
use crate::error::{Error, Result};
use crate::layout::{Site, SystemLayout, C64};

/// |+⟩_A ⊗ |0…0⟩_M ⊗ |+⟩_B, with |+⟩ the uniform superposition on a probe.
pub fn product_plus_zero_plus(layout: &SystemLayout) -> Result<DensityMatrix> {
    let plus = |d: usize| vec![C64::new(1.0 / (d as f64).sqrt(), 0.0); d];
    let zero = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let mut factors = vec![plus(layout.dim_a())];
    factors.extend(std::iter::repeat_n(zero, layout.mediator_qubits()));
    factors.push(plus(layout.dim_b()));
    product_pure(layout, &factors)
}

/// Tensor product of one pure vector per site, in layout order.
pub fn product_pure(layout: &SystemLayout, factors: &[Vec<C64>]) -> Result<DensityMatrix> {
    let sites = layout.sites();
    if factors.len() != sites.len() {
        return Err(Error::LayoutMismatch(format!(
            "{} factors for {} sites",
            factors.len(),
            sites.len()
        )));
    }
    let mut v = DVector::from_element(1, C64::new(1.0, 0.0));
    for (f, &(site, d)) in factors.iter().zip(&sites) {
        if f.len() != d {
            return Err(Error::LayoutMismatch(format!("site {site} needs {d} amplitudes")));
        }
        v = v.kronecker(&DVector::from_column_slice(f));
    }
    DensityMatrix::pure(v.as_slice(), sites)
}

/// Single-site vector by name: `0`, `1`, `+`, `-`, `+i`, `-i` (qubits) or a
/// basis index `|k>` given as a decimal digit string.
pub fn named_vector(name: &str, d: usize) -> Result<Vec<C64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let qubit = |v: [C64; 2]| -> Result<Vec<C64>> {
        if d != 2 {
            return Err(Error::InvalidArgument(format!("state `{name}` needs a qubit, site has dimension {d}")));
        }
        Ok(v.to_vec())
    };
    let (o, re, im) = (C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(0.0, s));
    match name {
        "+" => qubit([re, re]),
        "-" => qubit([re, -re]),
        "+i" => qubit([re, im]),
        "-i" => qubit([re, -im]),
        _ => match name.parse::<usize>() {
            Ok(k) if k < d => {
                let mut v = vec![o; d];
                v[k] = C64::new(1.0, 0.0);
                Ok(v)
            }
            _ => Err(Error::InvalidArgument(format!("unknown state `{name}` for dimension {d}"))),
        },
    }
}

/// Product of named single-site states, one per site in layout order.
pub fn product_named(layout: &SystemLayout, names: &[&str]) -> Result<DensityMatrix> {
    let sites = layout.sites();
    if names.len() != sites.len() {
        return Err(Error::LayoutMismatch(format!("{} names for {} sites", names.len(), sites.len())));
    }
    let factors = names
        .iter()
        .zip(&sites)
        .map(|(n, &(_, d))| named_vector(n, d))
        .collect::<Result<Vec<_>>>()?;
    product_pure(layout, &factors)
}

/// Pure state from explicit amplitudes over the full layout.
pub fn from_amplitudes(layout: &SystemLayout, amplitudes: &[C64]) -> Result<DensityMatrix> {
    if amplitudes.len() != layout.total_dim() {
        return Err(Error::LayoutMismatch(format!(
            "{} amplitudes for dimension {}",
            amplitudes.len(),
            layout.total_dim()
        )));
    }
    DensityMatrix::pure(amplitudes, layout.sites())
}

pub fn random_vector(dim: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect()
}

/// Haar-random pure state on each site, tensored together.
pub fn random_product_state(layout: &SystemLayout, seed: u64) -> Result<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors: Vec<_> = layout.sites().iter().map(|&(_, d)| random_vector(d, &mut rng)).collect();
    product_pure(layout, &factors)
}

/// Haar-random pure state on arbitrary sites.
pub fn random_pure_state(sites: Vec<(Site, usize)>, seed: u64) -> Result<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = sites.iter().map(|&(_, d)| d).product();
    DensityMatrix::pure(&random_vector(d, &mut rng), sites)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::partial_trace;

    #[test]
    fn plus_zero_plus_amplitudes() {
        let l = SystemLayout::new(2, 1, 2).unwrap();
        let rho = product_plus_zero_plus(&l).unwrap();
        // nonzero amplitudes at |a 0 b>, value 1/2 each
        for (i, j) in [(0, 0), (0, 1), (1, 4), (5, 5)] {
            assert!((rho.matrix()[(i, j)].re - 0.25).abs() < 1e-15);
        }
        assert!(rho.matrix()[(2, 2)].norm() < 1e-15);
        assert!((rho.purity() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_product_marginals_are_pure() {
        let l = SystemLayout::new(3, 2, 2).unwrap();
        let rho = random_product_state(&l, 9).unwrap();
        for s in [Site::A, Site::Mediator(1), Site::B] {
            let m = partial_trace(&rho, &[s]).unwrap();
            assert!((m.purity() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn named_products() {
        let l = SystemLayout::new(2, 1, 3).unwrap();
        assert!(product_named(&l, &["+", "0", "2"]).is_ok());
        assert!(product_named(&l, &["+", "0", "+"]).is_err());
        assert!(product_named(&l, &["+", "0"]).is_err());
        assert!(named_vector("3", 3).is_err());
        let a = product_named(&SystemLayout::new(2, 1, 2).unwrap(), &["+", "0", "+"]).unwrap();
        let b = product_plus_zero_plus(&SystemLayout::new(2, 1, 2).unwrap()).unwrap();
        assert!((a.matrix() - b.matrix()).norm() < 1e-15);
    }

    #[test]
    fn amplitude_count_checked() {
        let l = SystemLayout::new(2, 1, 2).unwrap();
        assert!(from_amplitudes(&l, &[C64::new(1.0, 0.0); 7]).is_err());
        assert!(from_amplitudes(&l, &[C64::new(1.0, 0.0); 8]).is_ok());
    }
}
