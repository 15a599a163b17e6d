//! Spectral calculus on a decomposed sample: matrix functions,
//! resolvents, Heisenberg evolution, and alternating chains
//! f_1(W) A_1 f_2(W) A_2 ... evaluated in the eigenbasis.
//!
//! Observables are rotated once per sample; each chain evaluation is
//! then a sequence of diagonal scalings and dense products. The pair
//! and triple kernels keep real-symmetric samples in f64 end to end,
//! which is the hot path for Monte Carlo grids.

use faer::Mat;

use crate::ensemble::{SpectralMat, WignerSample};
use crate::error::SimError;
use crate::C64;

/// Functions of the spectrum are evaluated on [-3, 3]; eigenvalues
/// outside (vanishingly rare at lab sizes) use the endpoint value.
pub const SUPPORT_BOUND: f64 = 3.0;

fn clamp_to_support(l: f64) -> (f64, bool) {
    if l > SUPPORT_BOUND {
        (SUPPORT_BOUND, true)
    } else if l < -SUPPORT_BOUND {
        (-SUPPORT_BOUND, true)
    } else {
        (l, false)
    }
}

/// Evaluates f on the sample spectrum with constant extension outside
/// the support window; extension events are logged to stderr.
pub fn spectral_values(sample: &WignerSample, f: &dyn Fn(f64) -> C64) -> Vec<C64> {
    let mut clamped = 0usize;
    let vals = sample
        .lambda()
        .iter()
        .map(|&l| {
            let (x, hit) = clamp_to_support(l);
            if hit {
                clamped += 1;
            }
            f(x)
        })
        .collect();
    if clamped > 0 {
        eprintln!(
            "wiglab-sim: {clamped} eigenvalue(s) outside [-{SUPPORT_BOUND}, {SUPPORT_BOUND}] evaluated by constant extension"
        );
    }
    vals
}

fn to_c64(m: &Mat<f64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| C64::new(m[(i, j)], 0.0))
}

fn check_square(sample: &WignerSample, rows: usize, cols: usize) -> Result<(), SimError> {
    let n = sample.n();
    if rows != n || cols != n {
        return Err(SimError::validation(format!(
            "observable is {rows}x{cols} but the sample dimension is {n}"
        )));
    }
    Ok(())
}

/// Rotates a real observable into the eigenbasis: U^T A U for a real
/// basis (stays f64), U* A U for a complex one.
pub fn rotate_real(sample: &WignerSample, a: &Mat<f64>) -> Result<SpectralMat, SimError> {
    check_square(sample, a.nrows(), a.ncols())?;
    match sample.basis() {
        SpectralMat::Real(u) => {
            let au = a * u;
            Ok(SpectralMat::Real(u.as_ref().transpose() * au.as_ref()))
        }
        SpectralMat::Complex(u) => {
            let au = &to_c64(a) * u;
            Ok(SpectralMat::Complex(u.as_ref().adjoint() * au.as_ref()))
        }
    }
}

/// Rotates a complex observable into the eigenbasis: U* A U.
pub fn rotate_complex(sample: &WignerSample, a: &Mat<C64>) -> Result<Mat<C64>, SimError> {
    check_square(sample, a.nrows(), a.ncols())?;
    match sample.basis() {
        SpectralMat::Real(u) => {
            let uc = to_c64(u);
            let au = a * &uc;
            Ok(uc.as_ref().adjoint() * au.as_ref())
        }
        SpectralMat::Complex(u) => {
            let au = a * u;
            Ok(u.as_ref().adjoint() * au.as_ref())
        }
    }
}

/// Transforms a vector into the eigenbasis: U* v.
pub fn to_eigenbasis(sample: &WignerSample, v: &[C64]) -> Result<Vec<C64>, SimError> {
    let n = sample.n();
    if v.len() != n {
        return Err(SimError::validation(format!(
            "vector length {} does not match sample dimension {n}",
            v.len()
        )));
    }
    let zero = C64::new(0.0, 0.0);
    let mut out = vec![zero; n];
    match sample.basis() {
        SpectralMat::Real(u) => {
            for p in 0..n {
                let mut acc = zero;
                for i in 0..n {
                    acc += u[(i, p)] * v[i];
                }
                out[p] = acc;
            }
        }
        SpectralMat::Complex(u) => {
            for p in 0..n {
                let mut acc = zero;
                for i in 0..n {
                    acc += u[(i, p)].conj() * v[i];
                }
                out[p] = acc;
            }
        }
    }
    Ok(out)
}

/// U f(Lambda) U* as a complex matrix.
pub fn matrix_function(sample: &WignerSample, f: &dyn Fn(f64) -> C64) -> Mat<C64> {
    let fv = spectral_values(sample, f);
    let n = sample.n();
    match sample.basis() {
        SpectralMat::Real(u) => {
            let mut xr = Mat::<f64>::zeros(n, n);
            let mut xi = Mat::<f64>::zeros(n, n);
            for p in 0..n {
                for i in 0..n {
                    xr[(i, p)] = u[(i, p)] * fv[p].re;
                    xi[(i, p)] = u[(i, p)] * fv[p].im;
                }
            }
            let rr = xr.as_ref() * u.as_ref().transpose();
            let ri = xi.as_ref() * u.as_ref().transpose();
            Mat::from_fn(n, n, |i, j| C64::new(rr[(i, j)], ri[(i, j)]))
        }
        SpectralMat::Complex(u) => {
            let mut x = Mat::<C64>::zeros(n, n);
            for p in 0..n {
                for i in 0..n {
                    x[(i, p)] = u[(i, p)] * fv[p];
                }
            }
            x.as_ref() * u.as_ref().adjoint()
        }
    }
}

/// U f(Lambda) U^T for a real-symmetric sample and real f, kept in f64.
pub fn matrix_function_real(
    sample: &WignerSample,
    f: &dyn Fn(f64) -> f64,
) -> Result<Mat<f64>, SimError> {
    let n = sample.n();
    match sample.basis() {
        SpectralMat::Real(u) => {
            let fv = spectral_values(sample, &|x| C64::new(f(x), 0.0));
            let mut x = Mat::<f64>::zeros(n, n);
            for p in 0..n {
                for i in 0..n {
                    x[(i, p)] = u[(i, p)] * fv[p].re;
                }
            }
            Ok(x.as_ref() * u.as_ref().transpose())
        }
        SpectralMat::Complex(_) => Err(SimError::validation(
            "real matrix function requires a real-symmetric sample",
        )),
    }
}

/// Resolvent (W - z)^{-1} as a dense matrix.
pub fn resolvent(sample: &WignerSample, z: C64) -> Result<Mat<C64>, SimError> {
    if z.im == 0.0 {
        return Err(SimError::validation("resolvent requires Im z != 0"));
    }
    Ok(matrix_function(sample, &|x| (C64::new(x, 0.0) - z).inv()))
}

/// Heisenberg evolution e^{itW} A e^{-itW}.
pub fn heisenberg(sample: &WignerSample, a: &Mat<C64>, t: f64) -> Result<Mat<C64>, SimError> {
    check_square(sample, a.nrows(), a.ncols())?;
    let e = matrix_function(sample, &|x| C64::new(0.0, t * x).exp());
    let ae = a * e.as_ref().adjoint();
    Ok(&e * &ae)
}

/// Evolution applied directly to a rotated observable: entry (p, q)
/// picks up the phase e^{it(lambda_p - lambda_q)}.
pub fn evolve_rotated(rotated: &SpectralMat, lambda: &[f64], t: f64) -> Mat<C64> {
    let n = lambda.len();
    let phases: Vec<C64> = lambda.iter().map(|&l| C64::new(0.0, t * l).exp()).collect();
    Mat::from_fn(n, n, |p, q| rotated.get(p, q) * phases[p] * phases[q].conj())
}

/// Normalized trace of a two-matrix product without forming it:
/// (1/N) sum_{p,q} X[p,q] Y[q,p].
pub fn pair_product_trace(x: &Mat<C64>, y: &Mat<C64>) -> C64 {
    let n = x.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for q in 0..n {
        for p in 0..n {
            acc += x[(p, q)] * y[(q, p)];
        }
    }
    acc / n as f64
}

/// Alternating chain evaluator over one sample. Holds the observables
/// rotated into the eigenbasis (complex storage; the specialized
/// kernels below keep the real fast path).
pub struct ChainEval<'a> {
    sample: &'a WignerSample,
    mats: Vec<Mat<C64>>,
}

impl<'a> ChainEval<'a> {
    pub fn from_real(sample: &'a WignerSample, obs: &[Mat<f64>]) -> Result<Self, SimError> {
        let mats = obs
            .iter()
            .map(|a| {
                rotate_real(sample, a).map(|m| match m {
                    SpectralMat::Real(r) => to_c64(&r),
                    SpectralMat::Complex(c) => c,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ChainEval { sample, mats })
    }

    pub fn from_complex(sample: &'a WignerSample, obs: &[Mat<C64>]) -> Result<Self, SimError> {
        let mats = obs
            .iter()
            .map(|a| rotate_complex(sample, a))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ChainEval { sample, mats })
    }

    pub fn num_observables(&self) -> usize {
        self.mats.len()
    }

    pub fn sample(&self) -> &WignerSample {
        self.sample
    }

    fn check_resolvents(zs: &[C64]) -> Result<(), SimError> {
        if zs.iter().any(|z| z.im == 0.0) {
            return Err(SimError::validation("resolvent requires Im z != 0"));
        }
        Ok(())
    }

    /// <f_1(W) A_1 f_2(W) A_2 ... f_k(W) A_k>; one function per
    /// observable, identity observables allowed.
    pub fn averaged_f(&self, fs: &[&dyn Fn(f64) -> C64]) -> Result<C64, SimError> {
        let k = self.mats.len();
        if fs.len() != k || k == 0 {
            return Err(SimError::validation(format!(
                "averaged chain needs one function per observable: {} functions, {k} observables",
                fs.len()
            )));
        }
        let n = self.sample.n();
        let vals: Vec<Vec<C64>> = fs.iter().map(|f| spectral_values(self.sample, *f)).collect();
        // scale rows of the first rotated observable by f_1
        let mut head = Mat::from_fn(n, n, |p, q| vals[0][p] * self.mats[0][(p, q)]);
        if k == 1 {
            let mut acc = C64::new(0.0, 0.0);
            for p in 0..n {
                acc += head[(p, p)];
            }
            return Ok(acc / n as f64);
        }
        // fold all but the last observable into `head`
        for j in 1..(k - 1) {
            let scaled = Mat::from_fn(n, n, |p, q| head[(p, q)] * vals[j][q]);
            head = scaled.as_ref() * self.mats[j].as_ref();
        }
        // trace(head * f_k A_k) without forming the product
        let tail = &self.mats[k - 1];
        let mut acc = C64::new(0.0, 0.0);
        for q in 0..n {
            for p in 0..n {
                acc += head[(p, q)] * vals[k - 1][q] * tail[(q, p)];
            }
        }
        Ok(acc / n as f64)
    }

    /// Resolvent chain <G(z_1) A_1 ... G(z_k) A_k>; shares the code
    /// path of `averaged_f` exactly.
    pub fn averaged_resolvent(&self, zs: &[C64]) -> Result<C64, SimError> {
        Self::check_resolvents(zs)?;
        let closures: Vec<Box<dyn Fn(f64) -> C64>> = zs
            .iter()
            .map(|&z| {
                let f: Box<dyn Fn(f64) -> C64> = Box::new(move |x| (C64::new(x, 0.0) - z).inv());
                f
            })
            .collect();
        let refs: Vec<&dyn Fn(f64) -> C64> = closures.iter().map(|b| b.as_ref()).collect();
        self.averaged_f(&refs)
    }

    /// <x, f_1(W) A_1 ... A_{k-1} f_k(W) y>; one more function than
    /// observables (no trailing observable).
    pub fn isotropic_f(
        &self,
        fs: &[&dyn Fn(f64) -> C64],
        x: &[C64],
        y: &[C64],
    ) -> Result<C64, SimError> {
        let k = fs.len();
        if k != self.mats.len() + 1 {
            return Err(SimError::validation(format!(
                "isotropic chain needs one more function than observables: {k} functions, {} observables",
                self.mats.len()
            )));
        }
        let n = self.sample.n();
        let xt = to_eigenbasis(self.sample, x)?;
        let yt = to_eigenbasis(self.sample, y)?;
        let vals: Vec<Vec<C64>> = fs.iter().map(|f| spectral_values(self.sample, *f)).collect();
        let mut w: Vec<C64> = (0..n).map(|q| vals[k - 1][q] * yt[q]).collect();
        for j in (0..self.mats.len()).rev() {
            let m = &self.mats[j];
            let zero = C64::new(0.0, 0.0);
            let mut next = vec![zero; n];
            for q in 0..n {
                let wq = w[q];
                for p in 0..n {
                    next[p] += m[(p, q)] * wq;
                }
            }
            for p in 0..n {
                next[p] *= vals[j][p];
            }
            w = next;
        }
        Ok(xt.iter().zip(&w).map(|(a, b)| a.conj() * b).sum())
    }

    /// <x, G(z_1) A_1 ... A_{k-1} G(z_k) y>; same code path as
    /// `isotropic_f`.
    pub fn isotropic_resolvent(&self, zs: &[C64], x: &[C64], y: &[C64]) -> Result<C64, SimError> {
        Self::check_resolvents(zs)?;
        let closures: Vec<Box<dyn Fn(f64) -> C64>> = zs
            .iter()
            .map(|&z| {
                let f: Box<dyn Fn(f64) -> C64> = Box::new(move |x| (C64::new(x, 0.0) - z).inv());
                f
            })
            .collect();
        let refs: Vec<&dyn Fn(f64) -> C64> = closures.iter().map(|b| b.as_ref()).collect();
        self.isotropic_f(&refs, x, y)
    }
}

/// Kernel for two-slot chains: C[p,q] = Atilde[p,q] Btilde[q,p], so
/// <f(W) A g(W) B> = (1/N) f^T C g on spectral values.
pub struct PairKernel {
    c: SpectralMat,
    lambda: Vec<f64>,
}

impl PairKernel {
    pub fn new(sample: &WignerSample, a: &Mat<f64>, b: &Mat<f64>) -> Result<Self, SimError> {
        let at = rotate_real(sample, a)?;
        let bt = rotate_real(sample, b)?;
        let n = sample.n();
        let c = match (at, bt) {
            (SpectralMat::Real(x), SpectralMat::Real(y)) => {
                SpectralMat::Real(Mat::from_fn(n, n, |p, q| x[(p, q)] * y[(q, p)]))
            }
            (SpectralMat::Complex(x), SpectralMat::Complex(y)) => {
                SpectralMat::Complex(Mat::from_fn(n, n, |p, q| x[(p, q)] * y[(q, p)]))
            }
            _ => unreachable!("both rotations share the sample basis"),
        };
        Ok(PairKernel {
            c,
            lambda: sample.lambda().to_vec(),
        })
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    fn values(&self, f: &dyn Fn(f64) -> C64) -> Vec<C64> {
        self.lambda
            .iter()
            .map(|&l| f(clamp_to_support(l).0))
            .collect()
    }

    /// (1/N) sum_{p,q} f1[p] C[p,q] f2[q] on precomputed values.
    pub fn eval(&self, f1: &[C64], f2: &[C64]) -> C64 {
        let n = self.lambda.len();
        assert!(f1.len() == n && f2.len() == n, "value slices must have length N");
        let mut acc = C64::new(0.0, 0.0);
        match &self.c {
            SpectralMat::Real(c) => {
                for q in 0..n {
                    let mut col = C64::new(0.0, 0.0);
                    for p in 0..n {
                        col += f1[p] * c[(p, q)];
                    }
                    acc += col * f2[q];
                }
            }
            SpectralMat::Complex(c) => {
                for q in 0..n {
                    let mut col = C64::new(0.0, 0.0);
                    for p in 0..n {
                        col += f1[p] * c[(p, q)];
                    }
                    acc += col * f2[q];
                }
            }
        }
        acc / n as f64
    }

    pub fn eval_f(&self, f1: &dyn Fn(f64) -> C64, f2: &dyn Fn(f64) -> C64) -> C64 {
        self.eval(&self.values(f1), &self.values(f2))
    }

    /// <G(z1) A G(z2) B> through the same value path as `eval_f`.
    pub fn eval_resolvents(&self, z1: C64, z2: C64) -> Result<C64, SimError> {
        if z1.im == 0.0 || z2.im == 0.0 {
            return Err(SimError::validation("resolvent requires Im z != 0"));
        }
        Ok(self.eval_f(
            &move |x| (C64::new(x, 0.0) - z1).inv(),
            &move |x| (C64::new(x, 0.0) - z2).inv(),
        ))
    }

    /// <A(t) B> for every t in one shot: (1/N) sum_{p,q}
    /// e^{it(lambda_p - lambda_q)} C[p,q], batched as dense products.
    pub fn heisenberg_grid(&self, times: &[f64]) -> Vec<C64> {
        let n = self.lambda.len();
        let nt = times.len();
        if nt == 0 {
            return Vec::new();
        }
        let inv_n = 1.0 / n as f64;
        match &self.c {
            SpectralMat::Real(c) => {
                let cos = Mat::from_fn(n, nt, |p, t| (times[t] * self.lambda[p]).cos());
                let sin = Mat::from_fn(n, nt, |p, t| (times[t] * self.lambda[p]).sin());
                let ec = c * &cos;
                let es = c * &sin;
                (0..nt)
                    .map(|t| {
                        let mut re = 0.0;
                        let mut im = 0.0;
                        for p in 0..n {
                            re += cos[(p, t)] * ec[(p, t)] + sin[(p, t)] * es[(p, t)];
                            im += sin[(p, t)] * ec[(p, t)] - cos[(p, t)] * es[(p, t)];
                        }
                        C64::new(re * inv_n, im * inv_n)
                    })
                    .collect()
            }
            SpectralMat::Complex(c) => {
                let v = Mat::from_fn(n, nt, |q, t| C64::new(0.0, -times[t] * self.lambda[q]).exp());
                let e = c * &v;
                (0..nt)
                    .map(|t| {
                        let mut acc = C64::new(0.0, 0.0);
                        for p in 0..n {
                            acc += v[(p, t)].conj() * e[(p, t)];
                        }
                        acc * inv_n
                    })
                    .collect()
            }
        }
    }
}

/// Kernel for three-slot chains <f(W) A g(W) B h(W) C>; each
/// evaluation costs one dense product in the middle slot.
pub struct TripleKernel {
    a: SpectralMat,
    b: SpectralMat,
    c: SpectralMat,
    lambda: Vec<f64>,
}

impl TripleKernel {
    pub fn new(
        sample: &WignerSample,
        a: &Mat<f64>,
        b: &Mat<f64>,
        c: &Mat<f64>,
    ) -> Result<Self, SimError> {
        Ok(TripleKernel {
            a: rotate_real(sample, a)?,
            b: rotate_real(sample, b)?,
            c: rotate_real(sample, c)?,
            lambda: sample.lambda().to_vec(),
        })
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    fn values(&self, f: &dyn Fn(f64) -> C64) -> Vec<C64> {
        self.lambda
            .iter()
            .map(|&l| f(clamp_to_support(l).0))
            .collect()
    }

    /// (1/N) sum_{p,q,r} f1[p] A[p,q] f2[q] B[q,r] f3[r] C[r,p].
    pub fn eval(&self, f1: &[C64], f2: &[C64], f3: &[C64]) -> C64 {
        let n = self.lambda.len();
        assert!(
            f1.len() == n && f2.len() == n && f3.len() == n,
            "value slices must have length N"
        );
        let mut acc = C64::new(0.0, 0.0);
        match (&self.a, &self.b, &self.c) {
            (SpectralMat::Real(a), SpectralMat::Real(b), SpectralMat::Real(c)) => {
                let sr = Mat::from_fn(n, n, |p, q| a[(p, q)] * f2[q].re);
                let si = Mat::from_fn(n, n, |p, q| a[(p, q)] * f2[q].im);
                let dr = &sr * b;
                let di = &si * b;
                for r in 0..n {
                    let mut col = C64::new(0.0, 0.0);
                    for p in 0..n {
                        col += f1[p] * C64::new(dr[(p, r)], di[(p, r)]) * c[(r, p)];
                    }
                    acc += col * f3[r];
                }
            }
            (SpectralMat::Complex(a), SpectralMat::Complex(b), SpectralMat::Complex(c)) => {
                let s = Mat::from_fn(n, n, |p, q| a[(p, q)] * f2[q]);
                let d = &s * b;
                for r in 0..n {
                    let mut col = C64::new(0.0, 0.0);
                    for p in 0..n {
                        col += f1[p] * d[(p, r)] * c[(r, p)];
                    }
                    acc += col * f3[r];
                }
            }
            _ => unreachable!("all rotations share the sample basis"),
        }
        acc / n as f64
    }

    pub fn eval_f(
        &self,
        f1: &dyn Fn(f64) -> C64,
        f2: &dyn Fn(f64) -> C64,
        f3: &dyn Fn(f64) -> C64,
    ) -> C64 {
        self.eval(&self.values(f1), &self.values(f2), &self.values(f3))
    }

    /// <A(t) B(s) C> via the phase factorization e^{itx}, e^{i(s-t)x},
    /// e^{-isx} across the three slots.
    pub fn heisenberg_pair(&self, t: f64, s: f64) -> C64 {
        self.eval_f(
            &move |x| C64::new(0.0, t * x).exp(),
            &move |x| C64::new(0.0, (s - t) * x).exp(),
            &move |x| C64::new(0.0, -s * x).exp(),
        )
    }
}
