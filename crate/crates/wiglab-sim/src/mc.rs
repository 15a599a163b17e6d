//! Monte Carlo aggregation over independent samples. Work is
//! distributed by an atomic counter, results land in per-index slots,
//! and the reduction runs over the ordered slots with pairwise
//! summation, so statistics are identical for any worker count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use wiglab_core::numeric::{pairwise_sum_c64, pairwise_sum_f64};

use crate::error::SimError;
use crate::C64;

#[derive(Clone, Copy, Debug)]
pub struct McStats {
    pub mean: C64,
    /// Unbiased sample variance of the (complex) estimates.
    pub variance: f64,
    /// sqrt(variance / n): standard error of the mean.
    pub stderr: f64,
    pub n: usize,
}

/// Worker count from WIGLAB_WORKERS, defaulting to 1.
pub fn default_workers() -> usize {
    std::env::var("WIGLAB_WORKERS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&w| w >= 1)
        .unwrap_or(1)
}

/// Runs `estimator(sample_idx)` for every index, in parallel across
/// `workers` threads, and reduces each returned component separately.
/// The estimator must be a pure function of its index (seeded
/// generators included), which makes the output independent of
/// scheduling; errors are reported for the smallest failing index.
pub fn monte_carlo<F>(
    samples: usize,
    workers: usize,
    estimator: F,
) -> Result<Vec<McStats>, SimError>
where
    F: Fn(usize) -> Result<Vec<C64>, SimError> + Sync,
{
    if samples < 2 {
        return Err(SimError::validation(format!(
            "monte carlo needs at least 2 samples, got {samples}"
        )));
    }
    let workers = workers.max(1).min(samples);
    let slots: Mutex<Vec<Option<Result<Vec<C64>, SimError>>>> =
        Mutex::new((0..samples).map(|_| None).collect());
    let counter = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = counter.fetch_add(1, Ordering::Relaxed);
                if idx >= samples {
                    break;
                }
                let r = estimator(idx);
                slots.lock().unwrap()[idx] = Some(r);
            });
        }
    });
    let collected = slots.into_inner().unwrap();
    let mut rows: Vec<Vec<C64>> = Vec::with_capacity(samples);
    for (idx, slot) in collected.into_iter().enumerate() {
        match slot {
            None => {
                return Err(SimError::Backend(format!(
                    "sample {idx} was never executed"
                )))
            }
            Some(Err(e)) => return Err(e),
            Some(Ok(v)) => rows.push(v),
        }
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(SimError::validation(
            "estimator returned rows of varying length",
        ));
    }
    let mut out = Vec::with_capacity(width);
    for j in 0..width {
        let col: Vec<C64> = rows.iter().map(|r| r[j]).collect();
        let mean = pairwise_sum_c64(&col) / samples as f64;
        let devs: Vec<f64> = col.iter().map(|x| (x - mean).norm_sqr()).collect();
        let variance = pairwise_sum_f64(&devs) / (samples - 1) as f64;
        let stderr = (variance / samples as f64).sqrt();
        out.push(McStats {
            mean,
            variance,
            stderr,
            n: samples,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(stats: &[McStats]) -> Vec<(u64, u64, u64)> {
        stats
            .iter()
            .map(|s| {
                (
                    s.mean.re.to_bits(),
                    s.mean.im.to_bits(),
                    s.stderr.to_bits(),
                )
            })
            .collect()
    }

    #[test]
    fn constant_estimator_has_zero_variance() {
        let stats = monte_carlo(16, 2, |_| Ok(vec![C64::new(2.5, -1.0)])).unwrap();
        assert_eq!(stats.len(), 1);
        assert_eq!(stats[0].mean, C64::new(2.5, -1.0));
        assert_eq!(stats[0].variance, 0.0);
        assert_eq!(stats[0].stderr, 0.0);
        assert_eq!(stats[0].n, 16);
    }

    #[test]
    fn statistics_are_worker_count_independent() {
        let estimator = |idx: usize| {
            let x = (idx as f64 * 0.7).sin();
            let y = (idx as f64 * 1.3).cos();
            Ok(vec![C64::new(x, y), C64::new(x * y, 0.25 * x)])
        };
        let one = monte_carlo(33, 1, estimator).unwrap();
        let four = monte_carlo(33, 4, estimator).unwrap();
        let seven = monte_carlo(33, 7, estimator).unwrap();
        assert_eq!(bits(&one), bits(&four));
        assert_eq!(bits(&one), bits(&seven));
    }

    #[test]
    fn mean_and_stderr_match_direct_formulas() {
        let vals: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let stats = monte_carlo(10, 3, |i| Ok(vec![C64::new(vals[i], 0.0)])).unwrap();
        let mean = 4.5;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 9.0;
        assert!((stats[0].mean.re - mean).abs() < 1e-14);
        assert!((stats[0].variance - var).abs() < 1e-12);
        assert!((stats[0].stderr - (var / 10.0).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn errors_and_bad_shapes_are_rejected() {
        assert!(monte_carlo(1, 1, |_| Ok(vec![C64::new(0.0, 0.0)])).is_err());
        let r = monte_carlo(8, 2, |i| {
            if i == 5 {
                Err(SimError::validation("boom"))
            } else {
                Ok(vec![C64::new(1.0, 0.0)])
            }
        });
        assert!(r.is_err());
        let r = monte_carlo(4, 1, |i| Ok(vec![C64::new(1.0, 0.0); 1 + (i % 2)]));
        assert!(r.is_err());
    }
}
