//! Engine for the nearest-neighbor Ising model on finite boxes of `Z^d`.
//!
//! Two halves, one artifact:
//!
//! * **Exact side** — random-current combinatorics (sources, weights, backbones,
//!   cancellation), brute-force spin enumeration and a row-to-row transfer matrix,
//!   and verifiers for the switching lemma, the backbone expansion and its
//!   concatenation rule, the half-space reflection inequality, and the
//!   finite-volume two-point comparison bound.
//! * **Monte Carlo side** — Metropolis and Wolff-cluster sampling (external field
//!   through a ghost spin), translation-averaged two-point tables, susceptibility,
//!   magnetization-field functionals, exponential tilting, and power-law fits.
//!
//! Numeric kernels are generic over the scalar type through [`scalar::Scalar`];
//! the aliases below fix `f64` for ordinary use.

pub mod current;
pub mod error;
pub mod exact;
pub mod fit;
pub mod lattice;
pub mod mc;
pub mod observables;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default scalar for all shipped binaries and experiments.
pub type Real = f64;

/// Lattice graph with `f64` couplings.
pub type Graph = lattice::LatticeGraph<f64>;
/// Model parameters over `f64`.
pub type Params = mc::ModelParams<f64>;
/// Estimate record over `f64`.
pub type Estimate = stats::EstimateRecord<f64>;
