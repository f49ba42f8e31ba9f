//! Quantitative witness of mediator non-classicality.
//!
//! Two probes A and B interact only through a mediator M, a chain of
//! qubits. This crate builds local Hamiltonians `H_AM`, `H_MB`, computes
//! their commutator exactly, evaluates the upper bound the commutator puts
//! on the gain of A:B quantum correlations, measures the actual gain by
//! dense unitary evolution, and dephases the mediator to drive the bound to
//! zero.

pub mod correlations;
pub mod decoherence;
pub mod dense;
pub mod error;
pub mod hamiltonians;
pub mod layout;
pub mod optim;
pub mod pauli;
pub mod properties;
pub mod states;
pub mod witness;

pub use dense::{DenseOperator, DensityMatrix};
pub use error::{Error, Result};
pub use layout::{Probe, Site, SystemLayout, CMatrix, C64};
pub use pauli::{OperatorString, OperatorSum, PauliLabel, ProbeWord};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
