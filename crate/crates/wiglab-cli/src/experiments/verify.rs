//! Deterministic identity battery: every cross-route and combinatorial
//! invariant of the prediction machinery, each checked against an
//! independent construction. No Monte Carlo is involved; exit status 0
//! means every identity held within its pinned tolerance.

use std::collections::HashMap;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::config::Config;
use crate::CliError;
use wiglab_core::bessel::{bessel_j1, phi};
use wiglab_core::cumulant::{free_cumulant_table, moments_from_cumulants, SetFunction};
use wiglab_core::detapprox::{
    check_trace_recursion, m_matrix_graph, m_matrix_partition, m_matrix_recursive,
    ObservableChain,
};
use wiglab_core::ncp::{
    catalan_u64, enumerate_connected_ncg, enumerate_ncp, kreweras, mobius_to_top, refinement_leq,
    GroundSet, NonCrossingPartition,
};
use wiglab_core::quad::{sc_average, QuadratureSpec};
use wiglab_core::semicircle::{
    divided_difference_graph, divided_difference_quadrature, divided_difference_recursive,
    m_table, q_factor, verify_derivative_identity, SpectralTuple,
};
use wiglab_core::C64;

pub const TOL_ROUND_TRIP: f64 = 1e-12;
pub const TOL_DIVIDED_DIFF: f64 = 1e-8;
pub const TOL_M_ROUTES: f64 = 1e-10;
pub const TOL_TRACE_RECURSION: f64 = 1e-9;
pub const TOL_CUMULANT_GRAPH: f64 = 1e-8;
pub const TOL_COINCIDENT: f64 = 1e-8;
pub const TOL_PHASE_AVG: f64 = 1e-8;

/// One identity family of the battery: worst residual seen against its
/// pinned tolerance.
pub struct IdentityResult {
    pub name: &'static str,
    pub worst: f64,
    pub tol: f64,
    pub detail: String,
}

impl IdentityResult {
    pub fn pass(&self) -> bool {
        self.worst <= self.tol
    }
}

pub fn cmd_verify(cfg: &Config, k_max: Option<usize>, perturb_q: Option<f64>) -> Result<i32, CliError> {
    let kmax = k_max.unwrap_or(usize::MAX);
    if kmax == 0 {
        return Err(CliError::Config("--k-max must be >= 1".into()));
    }
    let eps = perturb_q.unwrap_or(0.0);
    let seed = cfg.run.seed;

    let results = vec![
        catalan_counts(kmax)?,
        kreweras_involution(kmax)?,
        moebius_closed_form(kmax)?,
        moment_cumulant_round_trip(kmax, seed)?,
        divided_difference_routes(kmax, seed)?,
        m_formula_routes(kmax, seed)?,
        cumulant_graph_equivalence(kmax, seed, eps)?,
        coincident_derivative(kmax)?,
        phase_average(kmax)?,
    ];

    let mut all_pass = true;
    for r in &results {
        let status = if r.pass() { "PASS" } else { "FAIL" };
        all_pass &= r.pass();
        println!(
            "{status} {:<28} worst residual {:>12.3e} (tol {:.0e}) {}",
            r.name, r.worst, r.tol, r.detail
        );
    }
    if all_pass {
        println!("verify: all {} identities passed", results.len());
        Ok(0)
    } else {
        let failing: Vec<&str> = results.iter().filter(|r| !r.pass()).map(|r| r.name).collect();
        eprintln!("verify: failing identities: {}", failing.join(", "));
        Ok(1)
    }
}

pub fn catalan_counts(kmax: usize) -> Result<IdentityResult, CliError> {
    let top = kmax.min(10);
    let mut worst = 0.0f64;
    for k in 1..=top {
        let count = enumerate_ncp(&GroundSet::first_n(k))?.len() as u64;
        worst = worst.max((count as f64 - catalan_u64(k) as f64).abs());
    }
    Ok(IdentityResult {
        name: "catalan-counts",
        worst,
        tol: 0.0,
        detail: format!("k <= {top}"),
    })
}

fn rotate_backward(pi: &NonCrossingPartition, n: u32) -> Result<NonCrossingPartition, CliError> {
    let blocks: Vec<Vec<u32>> = pi
        .blocks()
        .iter()
        .map(|b| b.iter().map(|&e| if e == 1 { n } else { e - 1 }).collect())
        .collect();
    Ok(NonCrossingPartition::from_blocks(blocks)?)
}

pub fn kreweras_involution(kmax: usize) -> Result<IdentityResult, CliError> {
    let top = kmax.min(8);
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for n in 1..=top {
        for pi in enumerate_ncp(&GroundSet::first_n(n))? {
            let kw = kreweras(&pi);
            let size_residual =
                (pi.num_blocks() + kw.num_blocks()) as f64 - (n as f64 + 1.0);
            worst = worst.max(size_residual.abs());
            let twice = kreweras(&kw);
            let rotated = rotate_backward(&pi, n as u32)?;
            if twice.to_text() != rotated.to_text() {
                worst = worst.max(1.0);
            }
            checked += 1;
        }
    }
    Ok(IdentityResult {
        name: "kreweras-involution",
        worst,
        tol: 0.0,
        detail: format!("{checked} partitions, |S| <= {top}"),
    })
}

/// Recursive Moebius values mu(pi, top) from the defining recursion
/// sum over sigma >= pi of mu(sigma, top) = [pi = top].
fn recursive_moebius(all: &[NonCrossingPartition]) -> HashMap<String, i64> {
    // order partitions by decreasing block count so every sigma > pi
    // is resolved before pi
    let mut order: Vec<usize> = (0..all.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(all[i].num_blocks()));
    // coarser partitions (fewer blocks) first
    order.reverse();
    let mut mu: HashMap<String, i64> = HashMap::new();
    for &i in &order {
        let pi = &all[i];
        let mut acc = if pi.num_blocks() == 1 { 1i64 } else { 0 };
        for sigma in all {
            if sigma.num_blocks() <= pi.num_blocks() && sigma.to_text() != pi.to_text() {
                if refinement_leq(pi, sigma).unwrap_or(false) {
                    acc -= mu[&sigma.to_text()];
                }
            }
        }
        mu.insert(pi.to_text(), acc);
    }
    mu
}

pub fn moebius_closed_form(kmax: usize) -> Result<IdentityResult, CliError> {
    let top = kmax.min(7);
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for n in 1..=top {
        let all = enumerate_ncp(&GroundSet::first_n(n))?;
        let mu = recursive_moebius(&all);
        for pi in &all {
            let closed = mobius_to_top(pi);
            let rec = mu[&pi.to_text()];
            worst = worst.max((closed - rec).abs() as f64);
            checked += 1;
        }
    }
    // the two worked values
    if kmax >= 4 {
        let a = NonCrossingPartition::from_blocks(vec![vec![1, 2], vec![3], vec![4]])?;
        let b = NonCrossingPartition::from_blocks(vec![vec![1, 3], vec![2], vec![4]])?;
        worst = worst.max((mobius_to_top(&a) - 2).abs() as f64);
        worst = worst.max((mobius_to_top(&b) - 1).abs() as f64);
    }
    Ok(IdentityResult {
        name: "moebius-closed-form",
        worst,
        tol: 0.0,
        detail: format!("{checked} partitions, |S| <= {top}"),
    })
}

fn rand_c64(rng: &mut ChaCha12Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn moment_cumulant_round_trip(kmax: usize, seed: u64) -> Result<IdentityResult, CliError> {
    let top = kmax.min(7);
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x524f554e44);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = rng.gen_range(1..=top);
        let mut f = SetFunction::zeros(k)?;
        for mask in 1u32..(1 << k) {
            f.set_mask(mask, rand_c64(&mut rng));
        }
        let fc = free_cumulant_table(&f)?;
        let back = moments_from_cumulants(&fc)?;
        for mask in 1u32..(1 << k) {
            let orig = f.get_mask(mask);
            let rel = (back.get_mask(mask) - orig).norm() / orig.norm().max(1e-3);
            worst = worst.max(rel);
        }
    }
    Ok(IdentityResult {
        name: "moment-cumulant-round-trip",
        worst,
        tol: TOL_ROUND_TRIP,
        detail: format!("100 random tables, k <= {top}"),
    })
}

fn random_tuple(rng: &mut ChaCha12Rng, k: usize) -> Result<SpectralTuple, CliError> {
    let z: Vec<C64> = (0..k)
        .map(|_| {
            let re = rng.gen_range(-2.0..2.0);
            let eta = rng.gen_range(0.05..2.0);
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            C64::new(re, sign * eta)
        })
        .collect();
    Ok(SpectralTuple::new(z)?)
}

pub fn divided_difference_routes(kmax: usize, seed: u64) -> Result<IdentityResult, CliError> {
    let top = kmax.min(6);
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x4444524f55544553);
    let quad = QuadratureSpec::default();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let k = rng.gen_range(1..=top);
        let t = random_tuple(&mut rng, k)?;
        let a = divided_difference_recursive(&t)?;
        let b = divided_difference_quadrature(&t, &quad)?;
        let c = divided_difference_graph(&t)?;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(1e-12);
        worst = worst.max((a - b).norm() / scale);
        worst = worst.max((a - c).norm() / scale);
        worst = worst.max((b - c).norm() / scale);
    }
    Ok(IdentityResult {
        name: "divided-difference-routes",
        worst,
        tol: TOL_DIVIDED_DIFF,
        detail: format!("200 tuples, k <= {top}, eta in [0.05, 2]"),
    })
}

fn random_hermitian(rng: &mut ChaCha12Rng, n: usize) -> Mat<C64> {
    let raw = Mat::from_fn(n, n, |_, _| rand_c64(rng));
    Mat::from_fn(n, n, |i, j| 0.5 * (raw[(i, j)] + raw[(j, i)].conj()))
}

fn fro_diff(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
    let mut acc = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += (a[(i, j)] - b[(i, j)]).norm_sqr();
        }
    }
    acc.sqrt()
}

fn fro_norm(a: &Mat<C64>) -> f64 {
    let mut acc = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

pub fn m_formula_routes(kmax: usize, seed: u64) -> Result<IdentityResult, CliError> {
    if kmax < 2 {
        return Ok(IdentityResult {
            name: "m-formula-routes",
            worst: 0.0,
            tol: TOL_M_ROUTES,
            detail: "skipped (needs k >= 2)".into(),
        });
    }
    let top = kmax.min(6);
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x4d524f55544553);
    let mut worst = 0.0f64;
    let mut worst_recursion = 0.0f64;
    for _ in 0..100 {
        let k = rng.gen_range(2..=top);
        let n_dim = rng.gen_range(2..=16);
        // keep z_1 and z_k separated so the trace recursion stays
        // well-conditioned
        let t = loop {
            let cand = random_tuple(&mut rng, k)?;
            if (cand.z()[0] - cand.z()[k - 1]).norm() >= 0.1 {
                break cand;
            }
        };
        let chain = ObservableChain::new(
            (0..k - 1).map(|_| random_hermitian(&mut rng, n_dim)).collect(),
        )?;
        let part = m_matrix_partition(&t, &chain)?.matrix;
        let graph = m_matrix_graph(&t, &chain)?;
        let rec = m_matrix_recursive(&t, &chain)?;
        let scale = fro_norm(&part).max(1e-12);
        worst = worst.max(fro_diff(&part, &graph) / scale);
        worst = worst.max(fro_diff(&part, &rec) / scale);
        worst_recursion = worst_recursion.max(check_trace_recursion(&t, &chain)?);
    }
    let pass_rec = worst_recursion <= TOL_TRACE_RECURSION;
    Ok(IdentityResult {
        name: "m-formula-routes",
        worst: if pass_rec { worst } else { worst.max(1.0) },
        tol: TOL_M_ROUTES,
        detail: format!(
            "100 instances, k <= {top}, N <= 16; trace recursion worst {worst_recursion:.3e} (tol {TOL_TRACE_RECURSION:.0e})"
        ),
    })
}

/// Connected-graph construction of the free cumulants of the divided
/// differences, with an optional fault injection multiplying every
/// pair factor by (1 + eps).
fn graph_route_cumulant(t: &SpectralTuple, subset: &[usize], eps: f64) -> Result<C64, CliError> {
    let s = subset.len();
    let mut q = vec![vec![C64::new(0.0, 0.0); s]; s];
    for i in 0..s {
        for j in 0..s {
            if i != j {
                q[i][j] = q_factor(t.z()[subset[i]], t.z()[subset[j]])? * (1.0 + eps);
            }
        }
    }
    let mut sum = C64::new(0.0, 0.0);
    for graph in enumerate_connected_ncg(&GroundSet::first_n(s))? {
        let mut term = C64::new(1.0, 0.0);
        for &(a, b) in graph.edges() {
            term *= q[(a - 1) as usize][(b - 1) as usize];
        }
        sum += term;
    }
    let mut v = sum;
    for &i in subset {
        v *= t.m()[i];
    }
    Ok(v)
}

pub fn cumulant_graph_equivalence(kmax: usize, seed: u64, eps: f64) -> Result<IdentityResult, CliError> {
    let top = kmax.min(6);
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x455155495631);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let k = rng.gen_range(1..=top);
        let t = random_tuple(&mut rng, k)?;
        let fc = free_cumulant_table(&m_table(&t)?)?;
        for mask in 1u32..(1 << k) {
            let subset: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
            let graph = graph_route_cumulant(&t, &subset, eps)?;
            let want = fc.get_mask(mask);
            worst = worst.max((graph - want).norm() / want.norm().max(1e-12));
        }
    }
    let detail = if eps != 0.0 {
        format!("50 tuples, k <= {top}, pair factors perturbed by {eps:+e}")
    } else {
        format!("50 tuples, k <= {top}")
    };
    Ok(IdentityResult {
        name: "cumulant-graph-equivalence",
        worst,
        tol: TOL_CUMULANT_GRAPH,
        detail,
    })
}

pub fn coincident_derivative(kmax: usize) -> Result<IdentityResult, CliError> {
    if kmax < 2 {
        return Ok(IdentityResult {
            name: "coincident-derivative",
            worst: 0.0,
            tol: TOL_COINCIDENT,
            detail: "skipped (needs k >= 2)".into(),
        });
    }
    let top = kmax.min(5);
    let mut worst = 0.0f64;
    for n in 2..=top {
        for &z in &[C64::new(0.3, 0.7), C64::new(-1.2, 0.4), C64::new(0.0, 1.5)] {
            worst = worst.max(verify_derivative_identity(z, n)?);
        }
    }
    Ok(IdentityResult {
        name: "coincident-derivative",
        worst,
        tol: TOL_COINCIDENT,
        detail: format!("coincident tuples up to order {top}"),
    })
}

pub fn phase_average(_kmax: usize) -> Result<IdentityResult, CliError> {
    let quad = QuadratureSpec::default();
    let mut worst = 0.0f64;
    let mut s = 0.0;
    while s <= 50.0 {
        let via_quad = sc_average(|x| C64::new(0.0, s * x).exp(), &quad)
            .map_err(CliError::Core)?;
        worst = worst.max((via_quad - C64::new(phi(s), 0.0)).norm());
        s += 0.5;
    }
    // large-argument envelope: |J1(x) + cos(x + pi/4) sqrt(2/(pi x))|
    // stays O(x^{-3/2})
    let mut asym_ok = true;
    for &x in &[20.0, 50.0, 100.0] {
        let lead = -(x + std::f64::consts::FRAC_PI_4).cos()
            * (2.0 / (std::f64::consts::PI * x)).sqrt();
        let dev = (bessel_j1(x) - lead).abs();
        if dev > 5.0 * x.powf(-1.5) {
            asym_ok = false;
        }
    }
    Ok(IdentityResult {
        name: "phase-average-bessel",
        worst: if asym_ok { worst } else { worst.max(1.0) },
        tol: TOL_PHASE_AVG,
        detail: "s in [0, 50] step 0.5; asymptotic envelope at x = 20, 50, 100".into(),
    })
}
