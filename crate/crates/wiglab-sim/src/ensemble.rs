//! Wigner ensemble sampling with cached spectral decompositions.
//!
//! A sample holds the matrix, its ascending eigenvalues, and the
//! eigenvector basis. Real-symmetric ensembles stay in f64 end to end;
//! complex-hermitian ones use c64. Every decomposition is validated
//! against the original matrix before it is handed out.

use faer::{Mat, Side};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::SimError;
use crate::seed::SeedPlan;
use crate::C64;

/// Matvec residual allowed for the spectral decomposition, relative to
/// the spectral radius.
pub const SPECTRAL_RESIDUAL_TOL: f64 = 1e-8;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    /// Real symmetric matrices, orthogonal eigenbasis.
    Real,
    /// Complex hermitian matrices, unitary eigenbasis.
    Complex,
}

/// Law of the off-diagonal entries; all choices are centered with unit
/// variance (complex entries have unit E|χ|² and E χ² = 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OffDiagonal {
    Gaussian,
    Rademacher,
    Uniform,
}

#[derive(Clone, Copy, Debug)]
pub struct EnsembleSpec {
    n: usize,
    symmetry: Symmetry,
    offdiag: OffDiagonal,
    diag_variance: f64,
}

impl EnsembleSpec {
    /// Diagonal variance defaults to the convention that makes the
    /// invariant ensembles exact: 2 for real symmetry, 1 for complex.
    pub fn new(n: usize, symmetry: Symmetry, offdiag: OffDiagonal) -> Result<Self, SimError> {
        if n < 2 {
            return Err(SimError::validation(format!(
                "ensemble dimension must be at least 2, got {n}"
            )));
        }
        let diag_variance = match symmetry {
            Symmetry::Real => 2.0,
            Symmetry::Complex => 1.0,
        };
        Ok(EnsembleSpec {
            n,
            symmetry,
            offdiag,
            diag_variance,
        })
    }

    pub fn goe(n: usize) -> Result<Self, SimError> {
        Self::new(n, Symmetry::Real, OffDiagonal::Gaussian)
    }

    pub fn gue(n: usize) -> Result<Self, SimError> {
        Self::new(n, Symmetry::Complex, OffDiagonal::Gaussian)
    }

    pub fn with_diag_variance(mut self, variance: f64) -> Result<Self, SimError> {
        if !(variance.is_finite() && variance >= 0.0) {
            return Err(SimError::validation(format!(
                "diagonal variance must be finite and nonnegative, got {variance}"
            )));
        }
        self.diag_variance = variance;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn offdiag(&self) -> OffDiagonal {
        self.offdiag
    }

    pub fn diag_variance(&self) -> f64 {
        self.diag_variance
    }
}

/// Dense matrix in whichever scalar field the ensemble lives in.
#[derive(Clone, Debug)]
pub enum SpectralMat {
    Real(Mat<f64>),
    Complex(Mat<C64>),
}

impl SpectralMat {
    pub fn nrows(&self) -> usize {
        match self {
            SpectralMat::Real(m) => m.nrows(),
            SpectralMat::Complex(m) => m.nrows(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, SpectralMat::Complex(_))
    }

    pub fn to_complex(&self) -> Mat<C64> {
        match self {
            SpectralMat::Real(m) => Mat::from_fn(m.nrows(), m.ncols(), |i, j| C64::new(m[(i, j)], 0.0)),
            SpectralMat::Complex(m) => m.clone(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match self {
            SpectralMat::Real(m) => C64::new(m[(i, j)], 0.0),
            SpectralMat::Complex(m) => m[(i, j)],
        }
    }
}

/// One draw from a Wigner ensemble together with its spectral data.
pub struct WignerSample {
    spec: EnsembleSpec,
    lambda: Vec<f64>,
    u: SpectralMat,
    w: SpectralMat,
    seed_stream: Option<u64>,
}

impl WignerSample {
    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    /// Eigenvalues in ascending order.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Eigenvector basis: column p is the eigenvector of lambda[p].
    pub fn basis(&self) -> &SpectralMat {
        &self.u
    }

    pub fn matrix(&self) -> &SpectralMat {
        &self.w
    }

    pub fn seed_stream(&self) -> Option<u64> {
        self.seed_stream
    }

    /// Normalized resolvent trace (1/N) sum 1/(lambda_p - z).
    pub fn resolvent_trace(&self, z: C64) -> Result<C64, SimError> {
        if z.im == 0.0 {
            return Err(SimError::validation("resolvent requires Im z != 0"));
        }
        let mut acc = C64::new(0.0, 0.0);
        for &l in &self.lambda {
            acc += (C64::new(l, 0.0) - z).inv();
        }
        Ok(acc / self.n() as f64)
    }
}

fn unit_variance_draw(law: OffDiagonal, rng: &mut impl Rng) -> f64 {
    match law {
        OffDiagonal::Gaussian => StandardNormal.sample(rng),
        OffDiagonal::Rademacher => {
            if rng.gen::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
        OffDiagonal::Uniform => rng.gen_range(-SQRT_3..SQRT_3),
    }
}

fn build_real(spec: &EnsembleSpec, rng: &mut impl Rng) -> Mat<f64> {
    let n = spec.n;
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let diag_scale = spec.diag_variance.sqrt();
    let mut w = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        w[(i, i)] = diag_scale * unit_variance_draw(spec.offdiag, rng) * inv_sqrt_n;
        for j in (i + 1)..n {
            let x = unit_variance_draw(spec.offdiag, rng) * inv_sqrt_n;
            w[(i, j)] = x;
            w[(j, i)] = x;
        }
    }
    w
}

fn build_complex(spec: &EnsembleSpec, rng: &mut impl Rng) -> Mat<C64> {
    let n = spec.n;
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let diag_scale = spec.diag_variance.sqrt();
    let inv_sqrt_2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut w = Mat::<C64>::zeros(n, n);
    for i in 0..n {
        let d = diag_scale * unit_variance_draw(spec.offdiag, rng) * inv_sqrt_n;
        w[(i, i)] = C64::new(d, 0.0);
        for j in (i + 1)..n {
            let re = unit_variance_draw(spec.offdiag, rng) * inv_sqrt_2 * inv_sqrt_n;
            let im = unit_variance_draw(spec.offdiag, rng) * inv_sqrt_2 * inv_sqrt_n;
            w[(i, j)] = C64::new(re, im);
            w[(j, i)] = C64::new(re, -im);
        }
    }
    w
}

fn argsort_ascending(lambda: &[f64]) -> Option<Vec<usize>> {
    if lambda.windows(2).all(|w| w[0] <= w[1]) {
        return None;
    }
    let mut idx: Vec<usize> = (0..lambda.len()).collect();
    idx.sort_by(|&a, &b| lambda[a].total_cmp(&lambda[b]));
    Some(idx)
}

fn permute_columns_real(u: &Mat<f64>, idx: &[usize]) -> Mat<f64> {
    Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, idx[j])])
}

fn permute_columns_complex(u: &Mat<C64>, idx: &[usize]) -> Mat<C64> {
    Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, idx[j])])
}

/// ||U diag(lambda) U* v - W v|| for one probe vector, O(N^2).
fn matvec_residual_real(w: &Mat<f64>, u: &Mat<f64>, lambda: &[f64], v: &[f64]) -> f64 {
    let n = lambda.len();
    let mut wv = vec![0.0; n];
    let mut uv = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            wv[i] += w[(i, j)] * v[j];
            uv[j] += u[(i, j)] * v[i];
        }
    }
    let mut rec = vec![0.0; n];
    for j in 0..n {
        let s = lambda[j] * uv[j];
        for i in 0..n {
            rec[i] += u[(i, j)] * s;
        }
    }
    rec.iter()
        .zip(&wv)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn matvec_residual_complex(w: &Mat<C64>, u: &Mat<C64>, lambda: &[f64], v: &[C64]) -> f64 {
    let n = lambda.len();
    let zero = C64::new(0.0, 0.0);
    let mut wv = vec![zero; n];
    let mut uv = vec![zero; n];
    for j in 0..n {
        for i in 0..n {
            wv[i] += w[(i, j)] * v[j];
            uv[j] += u[(i, j)].conj() * v[i];
        }
    }
    let mut rec = vec![zero; n];
    for j in 0..n {
        let s = lambda[j] * uv[j];
        for i in 0..n {
            rec[i] += u[(i, j)] * s;
        }
    }
    rec.iter()
        .zip(&wv)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[cfg(debug_assertions)]
fn full_reconstruction_check(w: &SpectralMat, u: &SpectralMat, lambda: &[f64]) {
    let n = lambda.len();
    if n > 64 {
        return;
    }
    let mut err = 0.0f64;
    let mut scale = 0.0f64;
    let mut ortho = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let mut rec = C64::new(0.0, 0.0);
            let mut gram = C64::new(0.0, 0.0);
            for p in 0..n {
                rec += u.get(i, p) * lambda[p] * u.get(j, p).conj();
                gram += u.get(p, i).conj() * u.get(p, j);
            }
            let target = w.get(i, j);
            err += (rec - target).norm_sqr();
            scale += target.norm_sqr();
            let expect = if i == j { 1.0 } else { 0.0 };
            ortho += (gram - expect).norm_sqr();
        }
    }
    let err = err.sqrt();
    let scale = scale.sqrt();
    assert!(
        err <= 1e-10 * scale.max(1.0),
        "spectral reconstruction residual {err:.3e} exceeds 1e-10 * {scale:.3e}"
    );
    assert!(
        ortho.sqrt() <= 1e-10 * (n as f64).sqrt(),
        "basis orthonormality residual {:.3e}",
        ortho.sqrt()
    );
}

/// Draws one Wigner matrix and computes its validated spectral
/// decomposition. Entry fill order is fixed, so a given generator state
/// always produces the same sample.
pub fn sample_wigner(spec: &EnsembleSpec, rng: &mut impl Rng) -> Result<WignerSample, SimError> {
    crate::ensure_sequential_backend();
    let n = spec.n;
    match spec.symmetry {
        Symmetry::Real => {
            let w = build_real(spec, rng);
            let evd = w
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| SimError::Backend(format!("eigensolver failed at n={n}: {e:?}")))?;
            let s = evd.S().column_vector();
            let mut lambda: Vec<f64> = (0..n).map(|i| s[i]).collect();
            let mut u = evd.U().to_owned();
            if let Some(idx) = argsort_ascending(&lambda) {
                u = permute_columns_real(&u, &idx);
                lambda = idx.iter().map(|&p| lambda[p]).collect();
            }
            let v = crate::observable::random_unit_vector(n, rng);
            let resid = matvec_residual_real(&w, &u, &lambda, &v);
            let scale = lambda.iter().fold(0.0f64, |a, &x| a.max(x.abs())) + 1.0;
            if resid > SPECTRAL_RESIDUAL_TOL * scale {
                return Err(SimError::Backend(format!(
                    "spectral residual {resid:.3e} exceeds {SPECTRAL_RESIDUAL_TOL:.1e} * {scale:.3e} at n={n}"
                )));
            }
            let w = SpectralMat::Real(w);
            let u = SpectralMat::Real(u);
            #[cfg(debug_assertions)]
            full_reconstruction_check(&w, &u, &lambda);
            Ok(WignerSample {
                spec: *spec,
                lambda,
                u,
                w,
                seed_stream: None,
            })
        }
        Symmetry::Complex => {
            let w = build_complex(spec, rng);
            let evd = w
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| SimError::Backend(format!("eigensolver failed at n={n}: {e:?}")))?;
            let s = evd.S().column_vector();
            let mut lambda: Vec<f64> = (0..n)
                .map(|i| {
                    let v = s[i];
                    debug_assert!(v.im.abs() <= 1e-10 * (1.0 + v.re.abs()));
                    v.re
                })
                .collect();
            let mut u = evd.U().to_owned();
            if let Some(idx) = argsort_ascending(&lambda) {
                u = permute_columns_complex(&u, &idx);
                lambda = idx.iter().map(|&p| lambda[p]).collect();
            }
            let vr = crate::observable::random_unit_vector(n, rng);
            let vi = crate::observable::random_unit_vector(n, rng);
            let v: Vec<C64> = vr
                .iter()
                .zip(&vi)
                .map(|(&a, &b)| C64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2)
                .collect();
            let resid = matvec_residual_complex(&w, &u, &lambda, &v);
            let scale = lambda.iter().fold(0.0f64, |a, &x| a.max(x.abs())) + 1.0;
            if resid > SPECTRAL_RESIDUAL_TOL * scale {
                return Err(SimError::Backend(format!(
                    "spectral residual {resid:.3e} exceeds {SPECTRAL_RESIDUAL_TOL:.1e} * {scale:.3e} at n={n}"
                )));
            }
            let w = SpectralMat::Complex(w);
            let u = SpectralMat::Complex(u);
            #[cfg(debug_assertions)]
            full_reconstruction_check(&w, &u, &lambda);
            Ok(WignerSample {
                spec: *spec,
                lambda,
                u,
                w,
                seed_stream: None,
            })
        }
    }
}

/// Samples with the generator for the given (grid, sample) cell and
/// stamps the stream id on the result.
pub fn sample_wigner_seeded(
    spec: &EnsembleSpec,
    plan: &SeedPlan,
    grid_idx: usize,
    sample_idx: usize,
) -> Result<WignerSample, SimError> {
    let mut rng = plan.rng(grid_idx, sample_idx);
    let mut sample = sample_wigner(spec, &mut rng)?;
    sample.seed_stream = Some(((grid_idx as u64) << 32) | sample_idx as u64);
    Ok(sample)
}
