//! Exact combinatorics of non-crossing partitions, the free-cumulant
//! transform, scalar calculus attached to the semicircle law, and the
//! deterministic approximants M_[k] / F_k for alternating chains of
//! resolvents or matrix functions with deterministic observables.

pub mod bessel;
pub mod cumulant;
pub mod detapprox;
pub mod error;
pub mod ncp;
pub mod numeric;
pub mod quad;
pub mod semicircle;

pub use error::CoreError;

/// Complex scalar used throughout. Identical to `faer::c64`.
pub type C64 = num_complex::Complex64;
