//! Decay-rate estimation from noisy oscillatory data.

use wiglab_sim::C64;

/// Least-squares slope of ln y against ln x. Points with y <= 0 or
/// x <= 0 are dropped. Returns (slope, points used).
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<(f64, usize)> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    weighted_slope(&pts, None)
}

fn weighted_slope(pts: &[(f64, f64)], weights: Option<&[f64]>) -> Option<(f64, usize)> {
    if pts.len() < 2 {
        return None;
    }
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    let sw: f64 = (0..pts.len()).map(&w).sum();
    if sw <= 0.0 {
        return None;
    }
    let mx: f64 = pts.iter().enumerate().map(|(i, p)| w(i) * p.0).sum::<f64>() / sw;
    let my: f64 = pts.iter().enumerate().map(|(i, p)| w(i) * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts
        .iter()
        .enumerate()
        .map(|(i, p)| w(i) * (p.0 - mx) * (p.0 - mx))
        .sum();
    let sxy: f64 = pts
        .iter()
        .enumerate()
        .map(|(i, p)| w(i) * (p.0 - mx) * (p.1 - my))
        .sum();
    if sxx == 0.0 {
        return None;
    }
    Some((sxy / sxx, pts.len()))
}

#[derive(Clone, Debug)]
pub struct EnvelopeFit {
    pub exponent: f64,
    pub points_used: usize,
    /// Large-time offset subtracted before fitting.
    pub offset: C64,
}

/// Fits the decay exponent of the oscillation envelope of a sampled
/// curve t -> value(t).
///
/// The curve is allowed to settle on a nonzero constant at large
/// times; that offset is estimated as the coordinatewise median over
/// the top 20% of the time grid and subtracted first. Envelope points
/// are the local maxima of |value - offset|, kept only where they
/// clear 5x their standard error, and the exponent is the
/// error-weighted least-squares slope in log-log coordinates.
pub fn envelope_decay_fit(ts: &[f64], values: &[C64], stderrs: &[f64]) -> Option<EnvelopeFit> {
    let n = ts.len();
    if n < 8 || values.len() != n || stderrs.len() != n {
        return None;
    }
    let tail = (n / 5).max(2);
    let offset = C64::new(
        median(values[n - tail..].iter().map(|v| v.re)),
        median(values[n - tail..].iter().map(|v| v.im)),
    );
    let dev: Vec<f64> = values.iter().map(|v| (v - offset).norm()).collect();

    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for i in 1..n - 1 {
        let is_peak = dev[i] >= dev[i - 1] && dev[i] >= dev[i + 1];
        if !is_peak || ts[i] <= 0.0 {
            continue;
        }
        if dev[i] < 5.0 * stderrs[i] || dev[i] <= 0.0 {
            continue;
        }
        pts.push((ts[i].ln(), dev[i].ln()));
        // log-scale error: sigma_log = stderr / dev
        let sigma = (stderrs[i] / dev[i]).max(1e-6);
        weights.push(1.0 / (sigma * sigma));
    }
    let (exponent, points_used) = weighted_slope(&pts, Some(&weights))?;
    if points_used < 4 {
        return None;
    }
    Some(EnvelopeFit {
        exponent,
        points_used,
        offset,
    })
}

fn median(it: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = it.collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if v.is_empty() {
        return 0.0;
    }
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Mean magnitude over each labelled group of samples; used to average
/// an oscillating quantity over a short time window per separation.
pub fn group_mean_abs(group_of: &[usize], values: &[C64], n_groups: usize) -> Vec<f64> {
    let mut sums = vec![0.0f64; n_groups];
    let mut counts = vec![0usize; n_groups];
    for (g, v) in group_of.iter().zip(values) {
        sums[*g] += v.norm();
        counts[*g] += 1;
    }
    sums.iter()
        .zip(&counts)
        .map(|(s, c)| if *c == 0 { f64::NAN } else { s / *c as f64 })
        .collect()
}
