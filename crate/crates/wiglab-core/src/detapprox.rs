//! Deterministic approximants for alternating chains of spectral
//! functions of a single Wigner-type matrix and fixed observables:
//! the resolvent-chain matrix M_[k] by three independent routes
//! (partition sum, non-crossing graph sum, interval recursion), its
//! traced form, general function chains F_k, phase chains for
//! Heisenberg evolution, and the eta-scaling diagnostics for traceless
//! observables.

use crate::bessel::phi;
use crate::cumulant::{free_cumulant_table, SetFunction};
use crate::error::CoreError;
use crate::ncp::{
    components_partition, enumerate_ncg, enumerate_ncp, kreweras, GroundSet, NonCrossingPartition,
};
use crate::numeric::{KahanSum, KahanSumC};
use crate::quad::{sc_average, QuadratureSpec};
use crate::semicircle::{m_table, q_factor, SpectralTuple};
use crate::C64;
use faer::Mat;
use std::cell::RefCell;
use std::collections::HashMap;

/// Partition-route predictions enumerate NCP([k]); capped here.
pub const PARTITION_ROUTE_CAP: usize = 8;
/// The graph route enumerates all non-crossing graphs on [k], which
/// grows much faster; capped lower.
pub const GRAPH_ROUTE_CAP: usize = 6;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// An ordered list of equal-dimension square observables A_1, A_2, ...
/// Normalized traces of in-order block products are cached, since chain
/// predictions re-use them across partitions and parameter grids.
pub struct ObservableChain {
    mats: Vec<Mat<C64>>,
    n: usize,
    trace_cache: RefCell<HashMap<u32, C64>>,
}

impl ObservableChain {
    pub fn new(mats: Vec<Mat<C64>>) -> Result<Self, CoreError> {
        if mats.is_empty() {
            return Err(CoreError::validation("observable chain must be nonempty"));
        }
        let n = mats[0].nrows();
        if n == 0 {
            return Err(CoreError::validation("observables must be nonempty matrices"));
        }
        for m in &mats {
            if m.nrows() != n || m.ncols() != n {
                return Err(CoreError::validation(format!(
                    "observables must all be {n} x {n}"
                )));
            }
        }
        Ok(ObservableChain {
            mats,
            n,
            trace_cache: RefCell::new(HashMap::new()),
        })
    }

    pub fn from_real(mats: &[Mat<f64>]) -> Result<Self, CoreError> {
        let complex = mats
            .iter()
            .map(|m| Mat::from_fn(m.nrows(), m.ncols(), |i, j| C64::new(m[(i, j)], 0.0)))
            .collect();
        Self::new(complex)
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mat(&self, idx: usize) -> &Mat<C64> {
        &self.mats[idx]
    }

    /// Normalized trace of the in-order product of the observables with
    /// the given 1-based indices.
    pub fn block_trace(&self, block: &[u32]) -> Result<C64, CoreError> {
        self.check_block(block)?;
        let mask = block.iter().fold(0u32, |m, &e| m | 1 << (e - 1));
        if let Some(&v) = self.trace_cache.borrow().get(&mask) {
            return Ok(v);
        }
        let v = match block.len() {
            1 => ntrace(self.mat((block[0] - 1) as usize)),
            2 => ntrace_prod(
                self.mat((block[0] - 1) as usize),
                self.mat((block[1] - 1) as usize),
            ),
            _ => {
                let head = self.product(&block[..block.len() - 1]);
                ntrace_prod(&head, self.mat((block[block.len() - 1] - 1) as usize))
            }
        };
        self.trace_cache.borrow_mut().insert(mask, v);
        Ok(v)
    }

    /// In-order product of the observables with the given 1-based
    /// indices; identity for the empty list.
    fn product(&self, block: &[u32]) -> Mat<C64> {
        let mut acc = ident_scaled(self.n, ONE);
        for &e in block {
            acc = &acc * self.mat((e - 1) as usize);
        }
        acc
    }

    fn check_block(&self, block: &[u32]) -> Result<(), CoreError> {
        if block.is_empty()
            || block.windows(2).any(|w| w[0] >= w[1])
            || block.iter().any(|&e| e == 0 || e as usize > self.len())
        {
            return Err(CoreError::validation(format!(
                "block must be an ascending subset of 1..={}",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Contribution of one non-crossing partition to a chain prediction.
#[derive(Clone, Debug)]
pub struct TermBreakdown {
    pub partition: NonCrossingPartition,
    pub kreweras: NonCrossingPartition,
    /// Product of the cumulant weights over the blocks of `partition`.
    pub weight: C64,
    /// Product of the traced observable factors over the blocks of the
    /// Kreweras complement (for matrix predictions: over the blocks not
    /// containing the open slot k).
    pub observable_factor: C64,
    pub contribution: C64,
}

#[derive(Clone, Debug)]
pub struct ScalarPrediction {
    pub value: C64,
    pub terms: Vec<TermBreakdown>,
}

#[derive(Clone, Debug)]
pub struct MatrixPrediction {
    pub matrix: Mat<C64>,
    /// Normalized trace of `matrix`.
    pub averaged: C64,
    pub terms: Vec<TermBreakdown>,
}

/// Product of the traced observable factors over all blocks of a
/// partition of [k]: prod over B of <prod_{j in B} A_j>.
pub fn pi_trace(pi: &NonCrossingPartition, chain: &ObservableChain) -> Result<C64, CoreError> {
    if pi.ground().elems() != GroundSet::first_n(chain.len()).elems() {
        return Err(CoreError::validation(
            "partition ground set must be 1..=k with one observable per element",
        ));
    }
    let mut v = ONE;
    for b in pi.blocks() {
        v *= chain.block_trace(b)?;
    }
    Ok(v)
}

/// Partial trace of (A_1, ..., A_{k-1}) against a partition of [k]:
/// the in-order product over the block containing k (sans k itself),
/// scaled by the normalized traces of all other blocks.
pub fn partial_trace(
    pi: &NonCrossingPartition,
    chain: &ObservableChain,
) -> Result<Mat<C64>, CoreError> {
    let k = chain.len() + 1;
    if pi.ground().elems() != GroundSet::first_n(k).elems() {
        return Err(CoreError::validation(
            "partition must live on 1..=k with k-1 observables",
        ));
    }
    let (scalar, open) = partial_trace_parts(pi, chain)?;
    Ok(mat_scale(&chain.product(&open), scalar))
}

/// (product of traces over blocks without k, block containing k with k
/// removed).
fn partial_trace_parts(
    pi: &NonCrossingPartition,
    chain: &ObservableChain,
) -> Result<(C64, Vec<u32>), CoreError> {
    let k = (chain.len() + 1) as u32;
    let mut scalar = ONE;
    let mut open = Vec::new();
    for b in pi.blocks() {
        if b.contains(&k) {
            open = b.iter().copied().filter(|&e| e != k).collect();
        } else {
            scalar *= chain.block_trace(b)?;
        }
    }
    Ok((scalar, open))
}

/// Cumulant weights kappa[S] shared by every partition-route
/// prediction: the free cumulants of the divided-difference table.
fn resolvent_weights(t: &SpectralTuple) -> Result<SetFunction, CoreError> {
    free_cumulant_table(&m_table(t)?)
}

fn check_partition_args(k: usize, obs: usize, chain: &ObservableChain) -> Result<(), CoreError> {
    if k > PARTITION_ROUTE_CAP {
        return Err(CoreError::SizeLimit {
            what: "partition-route prediction",
            cap: PARTITION_ROUTE_CAP,
            got: k,
        });
    }
    if chain.len() != obs {
        return Err(CoreError::validation(format!(
            "chain length {} does not match the {obs} observable slots",
            chain.len()
        )));
    }
    Ok(())
}

/// Scalar partition sum sum over pi of (prod_B kappa[B]) *
/// (prod over K(pi) blocks of traced observables); the chain provides
/// one observable per slot 1..=k.
fn traced_sum(weights: &SetFunction, chain: &ObservableChain) -> Result<ScalarPrediction, CoreError> {
    let k = weights.k();
    check_partition_args(k, k, chain)?;
    let mut total = KahanSumC::default();
    let mut terms = Vec::new();
    for pi in enumerate_ncp(&GroundSet::first_n(k))? {
        let kw = kreweras(&pi);
        let mut weight = ONE;
        for b in pi.blocks() {
            weight *= weights.get(b)?;
        }
        let obs = pi_trace(&kw, chain)?;
        let contribution = weight * obs;
        total.add(contribution);
        terms.push(TermBreakdown {
            partition: pi,
            kreweras: kw,
            weight,
            observable_factor: obs,
            contribution,
        });
    }
    Ok(ScalarPrediction {
        value: total.value(),
        terms,
    })
}

/// Matrix partition sum: like `traced_sum` but slot k stays open, so
/// the K(pi) block containing k contributes a matrix product.
fn matrix_sum(weights: &SetFunction, chain: &ObservableChain) -> Result<MatrixPrediction, CoreError> {
    let k = weights.k();
    check_partition_args(k, k - 1, chain)?;
    let n = chain.dim();
    let mut acc = Mat::<C64>::zeros(n, n);
    let mut terms = Vec::new();
    for pi in enumerate_ncp(&GroundSet::first_n(k))? {
        let kw = kreweras(&pi);
        let mut weight = ONE;
        for b in pi.blocks() {
            weight *= weights.get(b)?;
        }
        let (obs, open) = partial_trace_parts(&kw, chain)?;
        let contribution = weight * obs;
        if open.is_empty() {
            add_scaled_identity(&mut acc, contribution);
        } else {
            mat_add_assign(&mut acc, &chain.product(&open), contribution);
        }
        terms.push(TermBreakdown {
            partition: pi,
            kreweras: kw,
            weight,
            observable_factor: obs,
            contribution,
        });
    }
    let averaged = ntrace(&acc);
    Ok(MatrixPrediction {
        matrix: acc,
        averaged,
        terms,
    })
}

/// M_[k](z_1..z_k; A_1..A_{k-1}) as a sum over non-crossing partitions
/// with free-cumulant weights and Kreweras-complement partial traces.
pub fn m_matrix_partition(
    t: &SpectralTuple,
    chain: &ObservableChain,
) -> Result<MatrixPrediction, CoreError> {
    if t.k() < 2 {
        return Err(CoreError::validation("matrix form needs k >= 2"));
    }
    matrix_sum(&resolvent_weights(t)?, chain)
}

/// <M_[k](z_1..z_k; A_1..A_{k-1}) A_k> with all k observables supplied;
/// every slot of the Kreweras complement is traced.
pub fn m_trace_partition(
    t: &SpectralTuple,
    chain: &ObservableChain,
) -> Result<ScalarPrediction, CoreError> {
    traced_sum(&resolvent_weights(t)?, chain)
}

/// M_[k] as the flat sum over non-crossing graphs,
/// (prod m_i) sum over E of q_E pTr_{K(pi(E))}(A_1..A_{k-1}); the
/// second independent route.
pub fn m_matrix_graph(
    t: &SpectralTuple,
    chain: &ObservableChain,
) -> Result<Mat<C64>, CoreError> {
    let k = t.k();
    if k < 2 {
        return Err(CoreError::validation("matrix form needs k >= 2"));
    }
    if k > GRAPH_ROUTE_CAP {
        return Err(CoreError::SizeLimit {
            what: "graph-route prediction",
            cap: GRAPH_ROUTE_CAP,
            got: k,
        });
    }
    if chain.len() != k - 1 {
        return Err(CoreError::validation(format!(
            "chain length {} does not match the {} observable slots",
            chain.len(),
            k - 1
        )));
    }
    let z = t.z();
    let mut q = vec![vec![ZERO; k]; k];
    for i in 0..k {
        for j in 0..k {
            q[i][j] = q_factor(z[i], z[j])?;
        }
    }
    let mut m_all = ONE;
    for &m in t.m() {
        m_all *= m;
    }
    let n = chain.dim();
    let mut acc = Mat::<C64>::zeros(n, n);
    for g in enumerate_ncg(&GroundSet::first_n(k))? {
        let mut q_e = ONE;
        for &(a, b) in g.edges() {
            q_e *= q[(a - 1) as usize][(b - 1) as usize];
        }
        let kw = kreweras(&components_partition(&g));
        let (obs, open) = partial_trace_parts(&kw, chain)?;
        let c = m_all * q_e * obs;
        if open.is_empty() {
            add_scaled_identity(&mut acc, c);
        } else {
            mat_add_assign(&mut acc, &chain.product(&open), c);
        }
    }
    Ok(acc)
}

/// M_[k] via the interval recursion
/// M_[a,b] = m_a (A_a M_[a+1,b] + q_ab <A_a M_[a+1,b]>
///           + sum_j <M_[a,j]> (M_[j,b] + q_ab <M_[j,b]>)),
/// memoized over sub-intervals; the third independent route. The
/// mirrored expansion at the last slot is evaluated as a self-check.
pub fn m_matrix_recursive(
    t: &SpectralTuple,
    chain: &ObservableChain,
) -> Result<Mat<C64>, CoreError> {
    let k = t.k();
    if k < 2 {
        return Err(CoreError::validation("matrix form needs k >= 2"));
    }
    if chain.len() != k - 1 {
        return Err(CoreError::validation(format!(
            "chain length {} does not match the {} observable slots",
            chain.len(),
            k - 1
        )));
    }
    let n = chain.dim();
    let z = t.z();
    let m = t.m();
    // mm[a][b] = M over z_a..z_b with observables A_a..A_{b-1}
    // (0-based positions, inclusive); tr[a][b] its normalized trace.
    let mut mm: Vec<Vec<Option<Mat<C64>>>> = (0..k).map(|_| vec![None; k]).collect();
    let mut tr = vec![vec![ZERO; k]; k];
    for i in 0..k {
        mm[i][i] = Some(ident_scaled(n, m[i]));
        tr[i][i] = m[i];
    }
    for len in 2..=k {
        for a in 0..=k - len {
            let b = a + len - 1;
            let q = q_factor(z[a], z[b])?;
            let lead = chain.mat(a) * mm[a + 1][b].as_ref().unwrap();
            let mut acc = lead;
            let t0 = ntrace(&acc);
            add_scaled_identity(&mut acc, q * t0);
            for j in a + 1..b {
                let w = tr[a][j];
                mat_add_assign(&mut acc, mm[j][b].as_ref().unwrap(), w);
                add_scaled_identity(&mut acc, w * q * tr[j][b]);
            }
            let v = mat_scale(&acc, m[a]);
            tr[a][b] = ntrace(&v);
            mm[a][b] = Some(v);
        }
    }
    let out = mm[0][k - 1].take().unwrap();
    // The mirrored expansion at the last slot (interior traces taken
    // over the right interval, matrices over the left) must reproduce
    // the result.
    if cfg!(debug_assertions) {
        let q = q_factor(z[0], z[k - 1])?;
        let lead = mm[0][k - 2].as_ref().unwrap() * chain.mat(k - 2);
        let mut alt = lead;
        let t0 = ntrace(&alt);
        add_scaled_identity(&mut alt, q * t0);
        for j in 1..k - 1 {
            let w = tr[j][k - 1];
            mat_add_assign(&mut alt, mm[0][j].as_ref().unwrap(), w);
            add_scaled_identity(&mut alt, w * q * tr[0][j]);
        }
        let alt = mat_scale(&alt, m[k - 1]);
        let scale = fro_norm(&out).max(1.0);
        debug_assert!(
            fro_diff(&out, &alt) <= 1e-8 * scale,
            "the two interval expansions disagree"
        );
    }
    Ok(out)
}

/// Residual of the trace recursion
/// <M_[k]> = <M_[1,k) A_{k-1} - A_1 M_(1,k]> / (z_1 - z_k),
/// which needs z_1 != z_k. The chain carries A_1..A_{k-1}.
pub fn check_trace_recursion(
    t: &SpectralTuple,
    chain: &ObservableChain,
) -> Result<f64, CoreError> {
    let k = t.k();
    if k < 2 {
        return Err(CoreError::validation("trace recursion needs k >= 2"));
    }
    let dz = t.z()[0] - t.z()[k - 1];
    if dz.norm() < 1e-6 {
        return Err(CoreError::domain(
            "trace recursion is singular at z_1 = z_k",
        ));
    }
    let full = m_matrix_recursive(t, chain)?;
    let lhs = ntrace(&full);
    let rhs = if k == 2 {
        // Both flanks are scalar multiples of the identity.
        (t.m()[0] - t.m()[1]) * ntrace(chain.mat(0)) / dz
    } else {
        let head = m_matrix_recursive(&t.subtuple(&(0..k - 1).collect::<Vec<_>>())?, &head_chain(chain, k - 2)?)?;
        let tail = m_matrix_recursive(&t.subtuple(&(1..k).collect::<Vec<_>>())?, &tail_chain(chain, 1)?)?;
        (ntrace_prod(&head, chain.mat(k - 2)) - ntrace_prod(chain.mat(0), &tail)) / dz
    };
    Ok((lhs - rhs).norm())
}

fn head_chain(chain: &ObservableChain, len: usize) -> Result<ObservableChain, CoreError> {
    ObservableChain::new(chain.mats[..len].to_vec())
}

fn tail_chain(chain: &ObservableChain, start: usize) -> Result<ObservableChain, CoreError> {
    ObservableChain::new(chain.mats[start..].to_vec())
}

/// Prediction for the traced chain <f_1(W) A_1 f_2(W) A_2 ... f_k(W) A_k>:
/// partition sum with free cumulants of the semicircle moment table
/// Phi[S] = <prod_{i in S} f_i>_sc computed by quadrature.
pub fn f_prediction(
    fs: &[&dyn Fn(f64) -> C64],
    chain: &ObservableChain,
    spec: &QuadratureSpec,
) -> Result<ScalarPrediction, CoreError> {
    let k = fs.len();
    if k == 0 {
        return Err(CoreError::validation("need at least one function"));
    }
    check_partition_args(k, k, chain)?;
    let mut phi_table = SetFunction::zeros(k)?;
    for mask in 1u32..(1 << k) {
        let v = sc_average(
            |x| {
                let mut p = ONE;
                for (i, f) in fs.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        p *= f(x);
                    }
                }
                p
            },
            spec,
        )?;
        phi_table.set_mask(mask, v);
    }
    traced_sum(&free_cumulant_table(&phi_table)?, chain)
}

/// Prediction for phase chains <e^{i t_1 W} A_1 ... e^{i t_k W} A_k>:
/// the moment table is Phi[S] = phi(sum_{i in S} t_i) with
/// phi(s) = J_1(2s)/s, so no quadrature is involved.
pub fn exp_prediction(
    times: &[f64],
    chain: &ObservableChain,
) -> Result<ScalarPrediction, CoreError> {
    let k = times.len();
    if k == 0 {
        return Err(CoreError::validation("need at least one time"));
    }
    check_partition_args(k, k, chain)?;
    let mut phi_table = SetFunction::zeros(k)?;
    for mask in 1u32..(1 << k) {
        let mut s = KahanSum::default();
        for (i, &ti) in times.iter().enumerate() {
            if mask & (1 << i) != 0 {
                s.add(ti);
            }
        }
        phi_table.set_mask(mask, C64::new(phi(s.value()), 0.0));
    }
    traced_sum(&free_cumulant_table(&phi_table)?, chain)
}

/// Eta-scaling diagnostics of <M_[k] A_k> for (partially) traceless
/// observables. With a of the k observables traceless, the trace is
/// expected to stay comparable to rho * eta_star^(ceil(a/2)+1-k) while
/// the matrix norm may grow like rho * eta_star^(1-k); the reported
/// ratios divide by those envelopes (observables assumed of unit
/// order).
#[derive(Clone, Debug)]
pub struct BoundCheck {
    pub traceless_count: usize,
    pub trace_value: C64,
    pub trace_envelope: f64,
    pub trace_ratio: f64,
    pub matrix_norm: f64,
    pub norm_envelope: f64,
    pub norm_ratio: f64,
}

pub fn m_bound_check(
    t: &SpectralTuple,
    chain: &ObservableChain,
    last: &Mat<C64>,
    traceless_tol: f64,
) -> Result<BoundCheck, CoreError> {
    let k = t.k();
    if chain.len() != k - 1 || last.nrows() != chain.dim() || last.ncols() != chain.dim() {
        return Err(CoreError::validation(
            "need k-1 chained observables plus a closing one of the same dimension",
        ));
    }
    let m = m_matrix_recursive(t, chain)?;
    let trace_value = ntrace_prod(&m, last);
    let mut traceless_count = 0;
    for a in chain.mats.iter().chain(std::iter::once(last)) {
        if ntrace(a).norm() <= traceless_tol {
            traceless_count += 1;
        }
    }
    let gain = (traceless_count + 1) / 2; // ceil(a/2)
    let eta = t.eta_star();
    let trace_envelope = t.rho() * eta.powi(gain as i32 + 1 - k as i32);
    let norm_envelope = t.rho() * eta.powi(1 - k as i32);
    let matrix_norm = fro_norm(&m);
    Ok(BoundCheck {
        traceless_count,
        trace_value,
        trace_envelope,
        trace_ratio: trace_value.norm() / trace_envelope,
        matrix_norm,
        norm_envelope,
        norm_ratio: matrix_norm / norm_envelope,
    })
}

fn ident_scaled(n: usize, c: C64) -> Mat<C64> {
    Mat::from_fn(n, n, |i, j| if i == j { c } else { ZERO })
}

fn mat_scale(a: &Mat<C64>, c: C64) -> Mat<C64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * c)
}

/// acc += c * b
fn mat_add_assign(acc: &mut Mat<C64>, b: &Mat<C64>, c: C64) {
    for j in 0..acc.ncols() {
        for i in 0..acc.nrows() {
            acc[(i, j)] += c * b[(i, j)];
        }
    }
}

fn add_scaled_identity(acc: &mut Mat<C64>, c: C64) {
    for i in 0..acc.nrows() {
        acc[(i, i)] += c;
    }
}

/// Normalized trace <A> = tr A / n.
pub fn ntrace(a: &Mat<C64>) -> C64 {
    let mut s = KahanSumC::default();
    for i in 0..a.nrows() {
        s.add(a[(i, i)]);
    }
    s.value() / a.nrows() as f64
}

/// Normalized trace of a product, <AB>, without forming AB.
pub fn ntrace_prod(a: &Mat<C64>, b: &Mat<C64>) -> C64 {
    let mut s = KahanSumC::default();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            s.add(a[(i, j)] * b[(j, i)]);
        }
    }
    s.value() / a.nrows() as f64
}

fn fro_norm(a: &Mat<C64>) -> f64 {
    let mut s = KahanSum::default();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s.add(a[(i, j)].norm_sqr());
        }
    }
    s.value().sqrt()
}

fn fro_diff(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
    let mut s = KahanSum::default();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s.add((a[(i, j)] - b[(i, j)]).norm_sqr());
        }
    }
    s.value().sqrt()
}
