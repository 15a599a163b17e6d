//! Experiment drivers behind the CLI subcommands. Each driver reads
//! its section of the configuration, runs seeded Monte Carlo over a
//! grid, and emits records plus fit summaries.

pub mod freeness;
pub mod locallaw;
pub mod ncp;
pub mod predict;
pub mod thermalise;
pub mod verify;

use faer::Mat;

use crate::CliError;
use wiglab_sim::chain::PairKernel;
use wiglab_sim::ensemble::{sample_wigner_seeded, EnsembleSpec};
use wiglab_sim::mc::{monte_carlo, McStats};
use wiglab_sim::seed::SeedPlan;

/// Monte Carlo statistics of t -> <A(t) B> over a shared time grid.
///
/// Both the thermalisation and the freeness drivers call this exact
/// function so that runs configured on the same grid, observables and
/// seed produce bit-identical values.
pub fn pair_grid_stats(
    spec: &EnsembleSpec,
    a: &Mat<f64>,
    b: &Mat<f64>,
    times: &[f64],
    samples: usize,
    workers: usize,
    plan: &SeedPlan,
    grid_idx: usize,
) -> Result<Vec<McStats>, CliError> {
    let stats = monte_carlo(samples, workers, |idx| {
        let sample = sample_wigner_seeded(spec, plan, grid_idx, idx)?;
        let kernel = PairKernel::new(&sample, a, b)?;
        Ok(kernel.heisenberg_grid(times))
    })?;
    Ok(stats)
}

/// Builds a compact JSON string for the params column.
pub(crate) fn params_string(value: serde_json::Value) -> String {
    serde_json::to_string(&value).unwrap_or_else(|_| "{}".into())
}

pub(crate) fn elapsed_ms(start: std::time::Instant) -> u128 {
    start.elapsed().as_millis()
}
