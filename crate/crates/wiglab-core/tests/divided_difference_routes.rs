//! The three independent evaluations of the divided differences
//! m[z_1..z_k] (interval recursion, semicircle quadrature, non-crossing
//! graph sums) must agree on random tuples, and the connected-graph
//! cumulants must match the Mobius transform of the full table.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use wiglab_core::cumulant::free_cumulant_table;
use wiglab_core::quad::QuadratureSpec;
use wiglab_core::semicircle::{
    divided_difference_graph, divided_difference_quadrature, divided_difference_recursive,
    m_circ_table, m_table, SpectralTuple,
};

fn random_tuple(rng: &mut ChaCha12Rng, k: usize) -> SpectralTuple {
    let z: Vec<C64> = (0..k)
        .map(|_| {
            let re = rng.gen_range(-2.5..2.5);
            let eta = rng.gen_range(0.05..2.0);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            C64::new(re, sign * eta)
        })
        .collect();
    SpectralTuple::new(z).unwrap()
}

#[test]
fn three_routes_agree_on_random_tuples() {
    let mut rng = ChaCha12Rng::seed_from_u64(41);
    let spec = QuadratureSpec::default();
    for k in 1..=6 {
        for _ in 0..12 {
            let t = random_tuple(&mut rng, k);
            let rec = divided_difference_recursive(&t).unwrap();
            let gra = divided_difference_graph(&t).unwrap();
            let qua = divided_difference_quadrature(&t, &spec).unwrap();
            let scale = rec.norm().max(1.0);
            assert!(
                (rec - gra).norm() < 1e-10 * scale,
                "k={k} recursion vs graphs: {rec:e} vs {gra:e}"
            );
            assert!(
                (rec - qua).norm() < 1e-8 * scale,
                "k={k} recursion vs quadrature: {rec:e} vs {qua:e}"
            );
        }
    }
}

#[test]
fn conjugating_the_tuple_conjugates_the_value() {
    let mut rng = ChaCha12Rng::seed_from_u64(42);
    for k in 1..=6 {
        for _ in 0..6 {
            let t = random_tuple(&mut rng, k);
            let conj = SpectralTuple::new(t.z().iter().map(|z| z.conj()).collect()).unwrap();
            let v = divided_difference_recursive(&t).unwrap();
            let w = divided_difference_recursive(&conj).unwrap();
            assert!((w - v.conj()).norm() < 1e-12 * v.norm().max(1.0));
        }
    }
}

#[test]
fn permutation_invariance() {
    let mut rng = ChaCha12Rng::seed_from_u64(43);
    let t = random_tuple(&mut rng, 5);
    let v = divided_difference_recursive(&t).unwrap();
    let mut idx = [0usize, 1, 2, 3, 4];
    // A few deterministic shuffles.
    for _ in 0..8 {
        for i in (1..idx.len()).rev() {
            idx.swap(i, rng.gen_range(0..=i));
        }
        let permuted =
            SpectralTuple::new(idx.iter().map(|&i| t.z()[i]).collect()).unwrap();
        let w = divided_difference_recursive(&permuted).unwrap();
        assert_eq!(v, w, "sorted evaluation must be bitwise permutation-stable");
    }
}

#[test]
fn connected_table_matches_mobius_inversion() {
    let mut rng = ChaCha12Rng::seed_from_u64(44);
    for k in 1..=6 {
        let t = random_tuple(&mut rng, k);
        let direct = m_circ_table(&t).unwrap();
        let inverted = free_cumulant_table(&m_table(&t).unwrap()).unwrap();
        for mask in 1..(1u32 << k) {
            let d = (direct.get_mask(mask) - inverted.get_mask(mask)).norm();
            assert!(d < 1e-10, "k={k} mask={mask:b}: {d:e}");
        }
    }
}

#[test]
fn repeated_points_against_quadrature() {
    // Tuples with repetitions exercise the coincident-run derivative
    // formula inside the recursion; quadrature is the oracle.
    let spec = QuadratureSpec::default();
    let cases: Vec<Vec<C64>> = vec![
        vec![C64::new(0.0, 1.0); 2],
        vec![C64::new(0.5, 0.8); 3],
        vec![
            C64::new(0.5, 0.8),
            C64::new(0.5, 0.8),
            C64::new(-1.0, 1.5),
        ],
        vec![
            C64::new(-0.2, 0.6),
            C64::new(-0.2, 0.6),
            C64::new(0.9, -0.7),
            C64::new(0.9, -0.7),
        ],
        vec![C64::new(0.1, 0.9); 5],
    ];
    for z in cases {
        let t = SpectralTuple::new(z.clone()).unwrap();
        let rec = divided_difference_recursive(&t).unwrap();
        let qua = divided_difference_quadrature(&t, &spec).unwrap();
        assert!(
            (rec - qua).norm() < 1e-8 * rec.norm().max(1.0),
            "z={z:?}: {rec:e} vs {qua:e}"
        );
    }
}

#[test]
fn scale_bound_holds_on_random_tuples() {
    // |m[z_1..z_k]| <= eta_star^(1-k) max_i |Im m(z_i)| for k >= 2;
    // evaluated here explicitly (the library also asserts it
    // internally on every route).
    let mut rng = ChaCha12Rng::seed_from_u64(45);
    for k in 2..=6 {
        for _ in 0..20 {
            let t = random_tuple(&mut rng, k);
            let v = divided_difference_recursive(&t).unwrap();
            let max_im = t
                .m()
                .iter()
                .map(|m| m.im.abs())
                .fold(0.0f64, f64::max);
            let bound = t.eta_star().powi(1 - k as i32) * max_im;
            assert!(v.norm() <= bound * (1.0 + 1e-9) + 1e-12);
        }
    }
}
