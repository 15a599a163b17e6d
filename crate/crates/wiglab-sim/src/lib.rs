//! Random-matrix side of the laboratory: Wigner ensembles, seeded
//! sampling plans, spectral calculus on eigendecompositions, chain
//! observables along resolvents, Heisenberg evolution, and Monte Carlo
//! aggregation with deterministic reduction order.

pub mod chain;
pub mod ensemble;
pub mod error;
pub mod mc;
pub mod observable;
pub mod seed;

pub use error::SimError;
pub type C64 = num_complex::Complex64;

use std::sync::Once;

static BACKEND_INIT: Once = Once::new();

/// Pins the linear-algebra backend to sequential execution once per
/// process. Concurrency lives at the sample level, so nested thread
/// pools would only add contention.
pub fn ensure_sequential_backend() {
    BACKEND_INIT.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}
