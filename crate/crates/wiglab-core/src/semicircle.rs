//! Scalar calculus of the semicircle law: density, Stieltjes transform,
//! pair factors q_ab, divided differences m[z_1..z_k] by three
//! independent routes (recursion, quadrature, non-crossing graph sums),
//! connected-graph cumulants, and the edge-count generating polynomials
//! tied to the coincident-point derivative formula.

use crate::cumulant::SetFunction;
use crate::error::CoreError;
use crate::ncp::{enumerate_connected_ncg, enumerate_ncg, GroundSet, NCG_ENUMERATION_CAP};
use crate::numeric::KahanSumC;
use crate::quad::{sc_average, QuadratureSpec, DEFAULT_NODES};
use crate::C64;
use std::f64::consts::PI;

/// Pairwise gaps below this send the recursive route to quadrature;
/// the two-sided difference quotient loses digits past this point.
pub const PROXIMITY_THRESHOLD: f64 = 1e-4;
/// Default-node quadrature is only trusted down to this imaginary part.
pub const QUAD_ETA_FLOOR: f64 = 1e-3;
/// Exactly coincident points are handled by the derivative formula up
/// to this multiplicity, by quadrature beyond.
const COINCIDENT_CAP: usize = 5;
/// Spectral parameters are restricted to this strip around the bulk.
pub const RE_BOUND: f64 = 3.0;

/// Semicircle density sqrt(4 - x^2) / (2 pi) on [-2, 2].
pub fn rho_sc(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * PI)
    }
}

/// Stieltjes transform of the semicircle law: the root of
/// m^2 + z m + 1 = 0 with Im m * Im z > 0.
pub fn stieltjes_m(z: C64) -> Result<C64, CoreError> {
    if z.im == 0.0 {
        return Err(CoreError::domain("Stieltjes transform needs Im z != 0"));
    }
    let s = (z * z - 4.0).sqrt();
    let (c1, c2) = ((-z + s) * 0.5, (-z - s) * 0.5);
    let mut m = if c1.im * z.im >= c2.im * z.im { c1 } else { c2 };
    // One Newton step squeezes the residual to the last bit.
    let denom = 2.0 * m + z;
    if denom.norm() > 1e-8 {
        m -= (m * m + z * m + 1.0) / denom;
    }
    debug_assert!(
        (m * m + z * m + 1.0).norm() <= 1e-13 * (1.0 + z.norm() * z.norm()),
        "Stieltjes residual too large at z={z}"
    );
    if m.im * z.im <= 0.0 {
        return Err(CoreError::domain(format!(
            "no admissible Stieltjes branch at z={z}"
        )));
    }
    Ok(m)
}

fn q_from_m(ma: C64, mb: C64) -> Result<C64, CoreError> {
    let d = 1.0 - ma * mb;
    if d.norm() < 1e-14 {
        return Err(CoreError::Singularity(format!(
            "1 - m_a m_b vanished (m_a={ma}, m_b={mb})"
        )));
    }
    Ok(ma * mb / d)
}

/// Pair factor q_ab = m_a m_b / (1 - m_a m_b); symmetric in (z_a, z_b).
pub fn q_factor(za: C64, zb: C64) -> Result<C64, CoreError> {
    q_from_m(stieltjes_m(za)?, stieltjes_m(zb)?)
}

/// An ordered list of spectral parameters with cached Stieltjes values
/// and the derived scales eta_star (smallest |Im z|) and rho (largest
/// |Im m| / pi).
#[derive(Clone, Debug)]
pub struct SpectralTuple {
    z: Vec<C64>,
    m: Vec<C64>,
    eta_star: f64,
    rho: f64,
}

impl SpectralTuple {
    pub fn new(z: Vec<C64>) -> Result<Self, CoreError> {
        if z.is_empty() {
            return Err(CoreError::validation("empty spectral tuple"));
        }
        for &zi in &z {
            if zi.re.abs() > RE_BOUND {
                return Err(CoreError::validation(format!(
                    "|Re z| <= {RE_BOUND} required, got {zi}"
                )));
            }
            if zi.im.abs() < 1e-12 {
                return Err(CoreError::validation(format!(
                    "spectral parameter too close to the real axis: {zi}"
                )));
            }
        }
        let m: Vec<C64> = z
            .iter()
            .map(|&zi| stieltjes_m(zi))
            .collect::<Result<_, _>>()?;
        let eta_star = z.iter().map(|zi| zi.im.abs()).fold(f64::INFINITY, f64::min);
        let rho = m.iter().map(|mi| mi.im.abs()).fold(0.0, f64::max) / PI;
        Ok(SpectralTuple {
            z,
            m,
            eta_star,
            rho,
        })
    }

    pub fn k(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &[C64] {
        &self.z
    }

    pub fn m(&self) -> &[C64] {
        &self.m
    }

    pub fn eta_star(&self) -> f64 {
        self.eta_star
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Sub-tuple at the given (distinct, ascending) positions, reusing
    /// the cached Stieltjes values.
    pub fn subtuple(&self, idx: &[usize]) -> Result<SpectralTuple, CoreError> {
        if idx.is_empty() || idx.iter().any(|&i| i >= self.k()) {
            return Err(CoreError::validation("bad sub-tuple indices"));
        }
        let z: Vec<C64> = idx.iter().map(|&i| self.z[i]).collect();
        let m: Vec<C64> = idx.iter().map(|&i| self.m[i]).collect();
        let eta_star = z.iter().map(|zi| zi.im.abs()).fold(f64::INFINITY, f64::min);
        let rho = m.iter().map(|mi| mi.im.abs()).fold(0.0, f64::max) / PI;
        Ok(SpectralTuple {
            z,
            m,
            eta_star,
            rho,
        })
    }
}

/// |m[z_1..z_k]| <= eta_star^(1-k) max |Im m| holds for every tuple with
/// k >= 2; checked on each route's output (with roundoff slack).
fn check_dd_bound(t: &SpectralTuple, v: C64) {
    let k = t.k();
    if k < 2 {
        return;
    }
    let max_im = t.m.iter().map(|m| m.im.abs()).fold(0.0, f64::max);
    let bound = t.eta_star.powi(1 - k as i32) * max_im;
    assert!(
        v.norm() <= bound * (1.0 + 1e-6) + 1e-8,
        "divided-difference bound violated: |{v}| > {bound}"
    );
}

fn sorted_pairs(t: &SpectralTuple) -> Vec<(C64, C64)> {
    let mut zm: Vec<(C64, C64)> = t.z.iter().copied().zip(t.m.iter().copied()).collect();
    zm.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    zm
}

/// Smallest distance between distinct parameter values, infinity if all
/// are equal.
fn min_distinct_gap(zs: &[(C64, C64)]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..zs.len() {
        for j in i + 1..zs.len() {
            let d = (zs[i].0 - zs[j].0).norm();
            if d > 0.0 {
                gap = gap.min(d);
            }
        }
    }
    gap
}

fn longest_run(zs: &[(C64, C64)]) -> usize {
    let mut best = 1;
    let mut run = 1;
    for w in zs.windows(2) {
        if w[0].0 == w[1].0 {
            run += 1;
            best = best.max(run);
        } else {
            run = 1;
        }
    }
    best
}

/// m[z,...,z] (n copies) = m^(n-1)-th derivative / (n-1)! = m^n a_n(q),
/// with a_n the edge-count generating polynomial of the non-crossing
/// graphs on [n] and q = q(z, z).
fn coincident_value(m: C64, n: usize) -> Result<C64, CoreError> {
    let q = q_from_m(m, m)?;
    let (a, _) = ncg_generating_polynomials(n)?;
    Ok(m.powu(n as u32) * eval_poly(&a, q))
}

fn eval_poly(coeffs: &[i64], w: C64) -> C64 {
    let mut v = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        v = v * w + c as f64;
    }
    v
}

/// Divided difference m[z_1..z_k] by the two-sided recursion
/// (m[tail] - m[head]) / (z_last - z_first) over the sorted tuple, with
/// the derivative formula on exactly coincident runs. Near-coincident
/// (but unequal) parameters fall back to quadrature.
pub fn divided_difference_recursive(t: &SpectralTuple) -> Result<C64, CoreError> {
    let n = t.k();
    if n == 1 {
        return Ok(t.m[0]);
    }
    let zs = sorted_pairs(t);
    let gap = min_distinct_gap(&zs);
    if gap < PROXIMITY_THRESHOLD || longest_run(&zs) > COINCIDENT_CAP {
        let v = divided_difference_quadrature(t, &QuadratureSpec::default())?;
        return Ok(v);
    }
    // table[i][j] = m[z_i..z_j] over the sorted list.
    let mut table = vec![vec![C64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        table[i][i] = zs[i].1;
    }
    for len in 2..=n {
        for i in 0..=n - len {
            let j = i + len - 1;
            table[i][j] = if zs[i].0 == zs[j].0 {
                coincident_value(zs[i].1, len)?
            } else {
                (table[i + 1][j] - table[i][j - 1]) / (zs[j].0 - zs[i].0)
            };
        }
    }
    let v = table[0][n - 1];
    check_dd_bound(t, v);
    Ok(v)
}

/// Divided difference as the semicircle average of prod 1/(x - z_i);
/// the independent oracle for the other two routes. Default node counts
/// are only accepted for eta_star >= 1e-3.
pub fn divided_difference_quadrature(
    t: &SpectralTuple,
    spec: &QuadratureSpec,
) -> Result<C64, CoreError> {
    if t.eta_star < QUAD_ETA_FLOOR && spec.nodes <= DEFAULT_NODES {
        return Err(CoreError::Accuracy(format!(
            "eta_star = {:.2e} needs more than the default node count",
            t.eta_star
        )));
    }
    let zs = sorted_pairs(t);
    let v = sc_average(
        |x| {
            let mut p = C64::new(1.0, 0.0);
            for &(z, _) in &zs {
                p /= C64::new(x, 0.0) - z;
            }
            p
        },
        spec,
    )?;
    check_dd_bound(t, v);
    Ok(v)
}

/// Divided difference as the non-crossing graph sum
/// (prod m_i) * sum over E in NCG([k]) of prod over edges of q_ab.
pub fn divided_difference_graph(t: &SpectralTuple) -> Result<C64, CoreError> {
    let k = t.k();
    if k > NCG_ENUMERATION_CAP {
        return Err(CoreError::SizeLimit {
            what: "graph-route divided difference",
            cap: NCG_ENUMERATION_CAP,
            got: k,
        });
    }
    let zs = sorted_pairs(t);
    let q = pair_factors(&zs)?;
    let mut acc = KahanSumC::default();
    for graph in enumerate_ncg(&GroundSet::first_n(k))? {
        let mut term = C64::new(1.0, 0.0);
        for &(a, b) in graph.edges() {
            term *= q[(a - 1) as usize][(b - 1) as usize];
        }
        acc.add(term);
    }
    let mut v = acc.value();
    for &(_, m) in &zs {
        v *= m;
    }
    check_dd_bound(t, v);
    Ok(v)
}

fn pair_factors(zs: &[(C64, C64)]) -> Result<Vec<Vec<C64>>, CoreError> {
    let k = zs.len();
    let mut q = vec![vec![C64::new(0.0, 0.0); k]; k];
    for i in 0..k {
        for j in 0..k {
            q[i][j] = q_from_m(zs[i].1, zs[j].1)?;
        }
    }
    Ok(q)
}

/// Free cumulant of the divided-difference function on the positions in
/// `subset`, via the connected-graph sum
/// m_circ[S] = (prod m_s) * sum over connected E of prod q_ab.
pub fn m_circ(t: &SpectralTuple, subset: &[usize]) -> Result<C64, CoreError> {
    if subset.is_empty() {
        return Err(CoreError::validation("empty subset"));
    }
    if subset.windows(2).any(|w| w[0] >= w[1]) || subset.iter().any(|&i| i >= t.k()) {
        return Err(CoreError::validation("subset must be ascending tuple positions"));
    }
    let s = subset.len();
    if s > NCG_ENUMERATION_CAP {
        return Err(CoreError::SizeLimit {
            what: "connected-graph cumulant",
            cap: NCG_ENUMERATION_CAP,
            got: s,
        });
    }
    let ms: Vec<C64> = subset.iter().map(|&i| t.m[i]).collect();
    let mut q = vec![vec![C64::new(0.0, 0.0); s]; s];
    for i in 0..s {
        for j in 0..s {
            q[i][j] = q_from_m(ms[i], ms[j])?;
        }
    }
    let mut acc = KahanSumC::default();
    for graph in enumerate_connected_ncg(&GroundSet::first_n(s))? {
        let mut term = C64::new(1.0, 0.0);
        for &(a, b) in graph.edges() {
            term *= q[(a - 1) as usize][(b - 1) as usize];
        }
        acc.add(term);
    }
    let mut v = acc.value();
    for &m in &ms {
        v *= m;
    }
    Ok(v)
}

/// Divided differences of every nonempty sub-tuple, as a set function
/// on [k]. Entry S holds m[z_i : i in S].
pub fn m_table(t: &SpectralTuple) -> Result<SetFunction, CoreError> {
    let k = t.k();
    let mut out = SetFunction::zeros(k)?;
    for mask in 1u32..(1 << k) {
        let idx: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let sub = t.subtuple(&idx)?;
        out.set_mask(mask, divided_difference_recursive(&sub)?);
    }
    Ok(out)
}

/// Connected-graph cumulants of every nonempty sub-tuple.
pub fn m_circ_table(t: &SpectralTuple) -> Result<SetFunction, CoreError> {
    let k = t.k();
    let mut out = SetFunction::zeros(k)?;
    for mask in 1u32..(1 << k) {
        let idx: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        out.set_mask(mask, m_circ(t, &idx)?);
    }
    Ok(out)
}

/// Edge-count generating polynomials (ascending coefficients) of the
/// non-crossing graphs a_n and of the dissection graphs b_n (edges only
/// between cyclically non-adjacent vertices).
pub fn ncg_generating_polynomials(n: usize) -> Result<(Vec<i64>, Vec<i64>), CoreError> {
    if n == 0 || n > NCG_ENUMERATION_CAP {
        return Err(CoreError::SizeLimit {
            what: "generating polynomial order",
            cap: NCG_ENUMERATION_CAP,
            got: n,
        });
    }
    let graphs = enumerate_ncg(&GroundSet::first_n(n))?;
    let max_edges = graphs.iter().map(|g| g.num_edges()).max().unwrap_or(0);
    let mut a = vec![0i64; max_edges + 1];
    let mut b = vec![0i64; max_edges + 1];
    for g in &graphs {
        a[g.num_edges()] += 1;
        let dissection = g.edges().iter().all(|&(x, y)| {
            let d = y - x;
            d != 1 && d != n as u32 - 1
        });
        if dissection {
            b[g.num_edges()] += 1;
        }
    }
    while b.len() > 1 && *b.last().unwrap() == 0 {
        b.pop();
    }
    Ok((a, b))
}

/// Residual |m[z,...,z] (n-fold, by quadrature) - m^n a_n(q(z,z))| of
/// the coincident-point derivative identity.
pub fn verify_derivative_identity(z: C64, n: usize) -> Result<f64, CoreError> {
    let t = SpectralTuple::new(vec![z; n])?;
    let quad_value = divided_difference_quadrature(&t, &QuadratureSpec::default())?;
    let closed = coincident_value(t.m()[0], n)?;
    Ok((quad_value - closed).norm())
}
