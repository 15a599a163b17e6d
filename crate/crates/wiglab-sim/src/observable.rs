//! Deterministic and random test observables, a plain-text matrix
//! reader, and polynomial application. All generators return real
//! symmetric matrices with operator norm of order one.

use faer::Mat;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::SimError;
use crate::C64;

/// Identity matrix.
pub fn identity(n: usize) -> Mat<f64> {
    Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
}

/// Diagonal matrix with entries +1, -1, +1, ... Traceless for even n.
pub fn alternating_sign(n: usize) -> Mat<f64> {
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            if i % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        } else {
            0.0
        }
    })
}

/// Diagonal matrix from explicit entries.
pub fn diagonal(values: &[f64]) -> Mat<f64> {
    let n = values.len();
    Mat::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 })
}

/// Dense symmetric matrix with independent N(0, 1/n) entries above the
/// diagonal; operator norm concentrates near 2.
pub fn gaussian_symmetric(n: usize, rng: &mut impl Rng) -> Mat<f64> {
    let scale = 1.0 / (n as f64).sqrt();
    let mut m = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let g: f64 = StandardNormal.sample(rng);
            m[(i, j)] = g * scale;
            m[(j, i)] = g * scale;
        }
    }
    m
}

/// Subtract the normalized trace times identity in place.
pub fn make_traceless(m: &mut Mat<f64>) {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let t = (0..n).map(|i| m[(i, i)]).sum::<f64>() / n as f64;
    for i in 0..n {
        m[(i, i)] -= t;
    }
}

/// Projection onto the first coordinate, made traceless:
/// e_1 e_1^T - (1/n) I.
pub fn rank_one_projection_traceless(n: usize) -> Mat<f64> {
    let mut m = Mat::<f64>::zeros(n, n);
    m[(0, 0)] = 1.0;
    make_traceless(&mut m);
    m
}

/// Dense traceless symmetric matrix from its own seeded generator.
pub fn random_traceless(n: usize, seed: u64) -> Mat<f64> {
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let mut m = gaussian_symmetric(n, &mut rng);
    make_traceless(&mut m);
    m
}

/// Polynomial of a symmetric matrix, coefficients in ascending degree,
/// evaluated by the matrix Horner scheme.
pub fn poly_apply(a: &Mat<f64>, coeffs: &[f64]) -> Result<Mat<f64>, SimError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(SimError::validation("polynomial argument must be square"));
    }
    if coeffs.is_empty() {
        return Err(SimError::validation("polynomial needs at least one coefficient"));
    }
    let d = coeffs.len() - 1;
    let mut x = Mat::from_fn(n, n, |i, j| if i == j { coeffs[d] } else { 0.0 });
    for j in (0..d).rev() {
        let mut next = a * &x;
        for i in 0..n {
            next[(i, i)] += coeffs[j];
        }
        x = next;
    }
    Ok(x)
}

/// Reads a square complex matrix from "dimension, then rows of re im
/// pairs" text. Blank lines and leading/trailing whitespace are
/// ignored.
pub fn parse_observable_text(text: &str) -> Result<Mat<C64>, SimError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let n: usize = lines
        .next()
        .ok_or_else(|| SimError::validation("observable text is empty"))?
        .parse()
        .map_err(|e| SimError::validation(format!("bad dimension header: {e}")))?;
    if n == 0 {
        return Err(SimError::validation("observable dimension must be positive"));
    }
    let mut m = Mat::<C64>::zeros(n, n);
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| SimError::validation(format!("observable row {} missing", i + 1)))?;
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|e| SimError::validation(format!("row {}: bad number {tok:?}: {e}", i + 1)))
            })
            .collect::<Result<_, _>>()?;
        if nums.len() != 2 * n {
            return Err(SimError::validation(format!(
                "row {} has {} numbers, expected {} re/im pairs",
                i + 1,
                nums.len(),
                n
            )));
        }
        for j in 0..n {
            m[(i, j)] = C64::new(nums[2 * j], nums[2 * j + 1]);
        }
        if !nums.iter().all(|x| x.is_finite()) {
            return Err(SimError::validation(format!("row {} contains non-finite entries", i + 1)));
        }
    }
    if lines.next().is_some() {
        return Err(SimError::validation("trailing content after the last observable row"));
    }
    Ok(m)
}

/// Uniformly random direction on the unit sphere.
pub fn random_unit_vector(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::SeedPlan;

    #[test]
    fn alternating_sign_is_traceless_for_even_n() {
        let a = alternating_sign(6);
        let tr: f64 = (0..6).map(|i| a[(i, i)]).sum();
        assert_eq!(tr, 0.0);
        assert_eq!(a[(0, 0)], 1.0);
        assert_eq!(a[(1, 1)], -1.0);
        assert_eq!(a[(0, 1)], 0.0);
    }

    #[test]
    fn gaussian_symmetric_is_symmetric_and_centers() {
        let mut rng = SeedPlan::new(11).rng(0, 0);
        let mut m = gaussian_symmetric(64, &mut rng);
        for i in 0..64 {
            for j in 0..64 {
                assert_eq!(m[(i, j)], m[(j, i)]);
            }
        }
        make_traceless(&mut m);
        let tr: f64 = (0..64).map(|i| m[(i, i)]).sum();
        assert!(tr.abs() < 1e-12);
    }

    #[test]
    fn unit_vector_has_unit_norm() {
        let mut rng = SeedPlan::new(3).rng(1, 2);
        let v = random_unit_vector(100, &mut rng);
        let norm: f64 = v.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_generator_is_traceless() {
        let p = rank_one_projection_traceless(5);
        let tr: f64 = (0..5).map(|i| p[(i, i)]).sum();
        assert!(tr.abs() < 1e-14);
        assert!((p[(0, 0)] - 0.8).abs() < 1e-14);
        assert!((p[(1, 1)] + 0.2).abs() < 1e-14);
    }

    #[test]
    fn poly_apply_matches_scalar_polynomial_on_diagonals() {
        let a = diagonal(&[1.0, -2.0, 0.5]);
        let p = poly_apply(&a, &[3.0, 0.0, 1.0]).unwrap();
        for (i, &x) in [1.0f64, -2.0, 0.5].iter().enumerate() {
            assert!((p[(i, i)] - (3.0 + x * x)).abs() < 1e-14);
        }
        assert!(poly_apply(&a, &[]).is_err());
    }

    #[test]
    fn observable_text_round_trip_and_errors() {
        let text = "2\n1.0 0.0  0.5 -0.25\n0.5 0.25  -1.0 0.0\n";
        let m = parse_observable_text(text).unwrap();
        assert_eq!(m[(0, 1)], C64::new(0.5, -0.25));
        assert_eq!(m[(1, 0)], C64::new(0.5, 0.25));
        assert_eq!(m[(1, 1)], C64::new(-1.0, 0.0));
        assert!(parse_observable_text("").is_err());
        assert!(parse_observable_text("2\n1 0 0 0\n").is_err());
        assert!(parse_observable_text("1\n1 0\nextra\n").is_err());
        assert!(parse_observable_text("1\n1 0 0 0\n").is_err());
    }
}
