//! Route equivalence and structural laws for the chain approximants
//! M_[k] and the function-chain predictions, with random spectral
//! tuples and random complex observables.

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use wiglab_core::detapprox::{
    check_trace_recursion, exp_prediction, f_prediction, m_matrix_graph, m_matrix_partition,
    m_matrix_recursive, m_trace_partition, ntrace, ntrace_prod, ObservableChain,
};
use wiglab_core::quad::QuadratureSpec;
use wiglab_core::semicircle::SpectralTuple;

fn random_tuple(rng: &mut ChaCha12Rng, k: usize) -> SpectralTuple {
    let z: Vec<C64> = (0..k)
        .map(|_| {
            let re = rng.gen_range(-2.0..2.0);
            let eta = rng.gen_range(0.1..1.5);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            C64::new(re, sign * eta)
        })
        .collect();
    SpectralTuple::new(z).unwrap()
}

fn random_mat(rng: &mut ChaCha12Rng, n: usize) -> Mat<C64> {
    Mat::from_fn(n, n, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

fn random_traceless(rng: &mut ChaCha12Rng, n: usize) -> Mat<C64> {
    let mut m = random_mat(rng, n);
    let t = ntrace(&m);
    for i in 0..n {
        m[(i, i)] -= t;
    }
    m
}

fn fro_diff(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += (a[(i, j)] - b[(i, j)]).norm_sqr();
        }
    }
    s.sqrt()
}

fn fro(a: &Mat<C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

#[test]
fn matrix_routes_agree() {
    let n = 8;
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for k in 2..=6 {
        for _ in 0..4 {
            let t = random_tuple(&mut rng, k);
            let chain =
                ObservableChain::new((1..k).map(|_| random_mat(&mut rng, n)).collect()).unwrap();
            let part = m_matrix_partition(&t, &chain).unwrap().matrix;
            let graph = m_matrix_graph(&t, &chain).unwrap();
            let rec = m_matrix_recursive(&t, &chain).unwrap();
            let scale = fro(&part).max(1.0);
            assert!(
                fro_diff(&part, &graph) < 1e-10 * scale,
                "k={k} partition vs graph"
            );
            assert!(
                fro_diff(&part, &rec) < 1e-10 * scale,
                "k={k} partition vs recursion"
            );
        }
    }
}

#[test]
fn traced_form_closes_the_matrix_form() {
    let n = 8;
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    for k in 2..=6 {
        let t = random_tuple(&mut rng, k);
        let mats: Vec<Mat<C64>> = (0..k).map(|_| random_mat(&mut rng, n)).collect();
        let matrix_chain = ObservableChain::new(mats[..k - 1].to_vec()).unwrap();
        let full_chain = ObservableChain::new(mats.clone()).unwrap();
        let m = m_matrix_recursive(&t, &matrix_chain).unwrap();
        let traced = m_trace_partition(&t, &full_chain).unwrap();
        let closed = ntrace_prod(&m, &mats[k - 1]);
        assert!(
            (closed - traced.value).norm() < 1e-10 * traced.value.norm().max(1.0),
            "k={k}"
        );
    }
}

#[test]
fn trace_recursion_residuals_vanish() {
    let n = 8;
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    for k in 2..=6 {
        for _ in 0..4 {
            let t = random_tuple(&mut rng, k);
            if (t.z()[0] - t.z()[k - 1]).norm() < 1e-3 {
                continue;
            }
            let chain =
                ObservableChain::new((1..k).map(|_| random_mat(&mut rng, n)).collect()).unwrap();
            let r = check_trace_recursion(&t, &chain).unwrap();
            assert!(r < 1e-9, "k={k}: residual {r:e}");
        }
    }
}

#[test]
fn resolvent_function_chain_matches_m_route() {
    let n = 6;
    let mut rng = ChaCha12Rng::seed_from_u64(10);
    for k in 1..=4usize {
        let t = random_tuple(&mut rng, k);
        let chain =
            ObservableChain::new((0..k).map(|_| random_mat(&mut rng, n)).collect()).unwrap();
        let fs: Vec<Box<dyn Fn(f64) -> C64>> = t
            .z()
            .iter()
            .map(|&z| {
                Box::new(move |x: f64| (C64::new(x, 0.0) - z).inv()) as Box<dyn Fn(f64) -> C64>
            })
            .collect();
        let refs: Vec<&dyn Fn(f64) -> C64> = fs.iter().map(|b| b.as_ref()).collect();
        let via_f = f_prediction(&refs, &chain, &QuadratureSpec::default()).unwrap();
        let via_m = m_trace_partition(&t, &chain).unwrap();
        assert!(
            (via_f.value - via_m.value).norm() < 1e-8 * via_m.value.norm().max(1.0),
            "k={k}"
        );
    }
}

#[test]
fn phase_chain_matches_quadrature_functions() {
    let n = 6;
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    for k in 1..=4usize {
        let times: Vec<f64> = (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let chain =
            ObservableChain::new((0..k).map(|_| random_mat(&mut rng, n)).collect()).unwrap();
        let fs: Vec<Box<dyn Fn(f64) -> C64>> = times
            .iter()
            .map(|&ti| {
                Box::new(move |x: f64| C64::new(0.0, ti * x).exp()) as Box<dyn Fn(f64) -> C64>
            })
            .collect();
        let refs: Vec<&dyn Fn(f64) -> C64> = fs.iter().map(|b| b.as_ref()).collect();
        let via_f = f_prediction(&refs, &chain, &QuadratureSpec::default()).unwrap();
        let via_phi = exp_prediction(&times, &chain).unwrap();
        assert!(
            (via_f.value - via_phi.value).norm() < 1e-8,
            "k={k} times={times:?}"
        );
    }
}

#[test]
fn traceless_observables_select_few_blocks() {
    // With all k observables traceless, a term survives only if its
    // Kreweras complement has no singleton block, i.e. has at most
    // floor(k/2) = k - ceil(k/2) blocks.
    let n = 8;
    let mut rng = ChaCha12Rng::seed_from_u64(12);
    for k in 2..=5usize {
        let t = random_tuple(&mut rng, k);
        let chain =
            ObservableChain::new((0..k).map(|_| random_traceless(&mut rng, n)).collect())
                .unwrap();
        let pred = m_trace_partition(&t, &chain).unwrap();
        let cutoff = k - k.div_ceil(2);
        for term in &pred.terms {
            let has_singleton = term.kreweras.blocks().iter().any(|b| b.len() == 1);
            if term.kreweras.num_blocks() > cutoff {
                assert!(
                    has_singleton,
                    "k={k}: {} exceeds the block cutoff without a singleton",
                    term.kreweras.to_text()
                );
            }
            if has_singleton {
                assert!(
                    term.observable_factor.norm() < 1e-13,
                    "k={k}: singleton block did not kill the term"
                );
            }
        }
    }
}

#[test]
fn five_term_structure_for_triple_phase_chains() {
    // For k = 3 the fourteen non-crossing partitions collapse to five
    // distinct observable trace patterns: <ABC>, <AB><C>, <AC><B>,
    // <BC><A>, <A><B><C>.
    let n = 8;
    let mut rng = ChaCha12Rng::seed_from_u64(13);
    let chain =
        ObservableChain::new((0..3).map(|_| random_mat(&mut rng, n)).collect()).unwrap();
    let pred = exp_prediction(&[1.0, 0.7, -1.7], &chain).unwrap();
    assert_eq!(pred.terms.len(), 5);
    let mut patterns: Vec<String> = pred
        .terms
        .iter()
        .map(|t| t.kreweras.to_text())
        .collect();
    patterns.sort();
    assert_eq!(
        patterns,
        vec!["1 2 3", "1 2|3", "1 3|2", "1|2 3", "1|2|3"]
    );
}
