//! Desk-scale arithmetic and analysis on `Z_N`: uniformity norms, Bohr sets,
//! generalized arithmetic progressions, Bourgain systems, quadratic phase
//! machinery, constructive decompositions, and a suite runner that verifies
//! inequality certificates on concrete instances.
//!
//! All computations are exact enumerations or direct floating-point
//! evaluations with fixed summation order, so results are reproducible
//! across runs and platforms. Parallelism (the `parallel` feature, on by
//! default) uses the same pairwise reduction tree as the sequential path
//! and therefore produces bit-identical sums.

pub mod bohr;
pub mod bourgain;
pub mod decomp;
pub mod dichotomy;
pub mod frac;
pub mod gap;
pub mod linsys;
pub mod quad;
pub mod quadavg;
pub mod rng;
pub mod sum;
pub mod unorms;
pub mod verify;
pub mod zn;

pub use num_complex::Complex64;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(usize, usize),
    #[error("empty set not allowed: {0}")]
    EmptySet(String),
    #[error("evaluation budget exceeded: needed {needed}, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("no regular width found: {0}")]
    NoRegularWidth(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("search failed: {0}")]
    SearchFailed(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
