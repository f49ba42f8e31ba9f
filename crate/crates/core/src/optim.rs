//! Derivative-free local search used by the correlation optimizers.
//!
//! A (1+1) evolution strategy: one parent, one Gaussian mutant per step,
//! step size adapted by the one-fifth success rule. Mutations touch a
//! single randomly chosen parameter block at a time, which converges far
//! faster than full-dimensional moves when the objective is a sum over
//! loosely coupled components.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    pub max_evals: usize,
    pub initial_step: f64,
    /// Stop once the step size falls below this.
    pub min_step: f64,
    /// Parameters per mutation block; the parameter vector length must be a multiple.
    pub block: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { max_evals: 20_000, initial_step: 0.3, min_step: 1e-9, block: 1 }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

pub fn minimize(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: Vec<f64>,
    opts: &SearchOptions,
    rng: &mut ChaCha8Rng,
) -> SearchOutcome {
    let n = x0.len();
    let block = opts.block.max(1);
    debug_assert_eq!(n % block, 0);
    let blocks = (n / block).max(1);

    let mut x = x0;
    let mut fx = f(&x);
    let mut evals = 1;
    if n == 0 {
        return SearchOutcome { x, value: fx, evals, converged: true };
    }
    // One step size per block.
    let mut steps = vec![opts.initial_step; blocks];
    let grow = (1.0_f64 / 3.0).exp();
    let shrink = (-1.0_f64 / 12.0).exp();
    let mut trial = x.clone();

    while evals < opts.max_evals {
        if steps.iter().all(|&s| s < opts.min_step) {
            return SearchOutcome { x, value: fx, evals, converged: true };
        }
        let b = rng.random_range(0..blocks);
        if steps[b] < opts.min_step {
            continue;
        }
        trial.copy_from_slice(&x);
        for v in &mut trial[b * block..(b + 1) * block] {
            let z: f64 = rng.sample(StandardNormal);
            *v += steps[b] * z;
        }
        let ft = f(&trial);
        evals += 1;
        if ft < fx {
            std::mem::swap(&mut x, &mut trial);
            fx = ft;
            steps[b] *= grow;
        } else {
            steps[b] *= shrink;
        }
    }
    SearchOutcome { x, value: fx, evals, converged: false }
}
