//! Free-cumulant transform checked against an independent oracle: the
//! moment-cumulant relation solved directly as a recursion, without the
//! Mobius function.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use wiglab_core::cumulant::{free_cumulant_table, moments_from_cumulants, SetFunction};
use wiglab_core::ncp::{enumerate_ncp, GroundSet};

fn random_table(k: usize, seed: u64) -> SetFunction {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    SetFunction::from_fn(k, |_| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
    .unwrap()
}

/// kappa[S] = f[S] - sum over pi in NCP(S), pi != {S}, of
/// prod_{B in pi} kappa[B], solved by increasing subset size.
fn cumulants_by_recursion(f: &SetFunction) -> SetFunction {
    let k = f.k();
    let mut kc = SetFunction::zeros(k).unwrap();
    let mut masks: Vec<u32> = (1..(1u32 << k)).collect();
    masks.sort_by_key(|m| m.count_ones());
    for mask in masks {
        let subset = SetFunction::subset_of(mask);
        let ground = GroundSet::new(subset.clone()).unwrap();
        let mut v = f.get_mask(mask);
        for pi in enumerate_ncp(&ground).unwrap() {
            if pi.num_blocks() == 1 {
                continue;
            }
            let mut prod = C64::new(1.0, 0.0);
            for b in pi.blocks() {
                prod *= kc.get(b).unwrap();
            }
            v -= prod;
        }
        kc.set_mask(mask, v);
    }
    kc
}

#[test]
fn mobius_transform_matches_recursion() {
    for k in 1..=7 {
        let f = random_table(k, 1000 + k as u64);
        let fast = free_cumulant_table(&f).unwrap();
        let slow = cumulants_by_recursion(&f);
        for mask in 1..(1u32 << k) {
            let d = (fast.get_mask(mask) - slow.get_mask(mask)).norm();
            assert!(d < 1e-12, "k={k} mask={mask:b}: {d:e}");
        }
    }
}

#[test]
fn transform_round_trips() {
    for k in 1..=7 {
        let f = random_table(k, 2000 + k as u64);
        let back = moments_from_cumulants(&free_cumulant_table(&f).unwrap()).unwrap();
        for mask in 1..(1u32 << k) {
            assert!((back.get_mask(mask) - f.get_mask(mask)).norm() < 1e-12);
        }
        let kc = random_table(k, 3000 + k as u64);
        let fwd = free_cumulant_table(&moments_from_cumulants(&kc).unwrap()).unwrap();
        for mask in 1..(1u32 << k) {
            assert!((fwd.get_mask(mask) - kc.get_mask(mask)).norm() < 1e-12);
        }
    }
}

#[test]
fn multiplicative_tables_have_no_mixed_cumulants() {
    // f[S] = prod_{i in S} c_i factorizes over every partition, so all
    // cumulants above singletons vanish.
    let k = 5;
    let mut rng = ChaCha12Rng::seed_from_u64(77);
    let c: Vec<C64> = (0..k)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let f = SetFunction::from_fn(k, |s| {
        s.iter().map(|&e| c[(e - 1) as usize]).product()
    })
    .unwrap();
    let kc = free_cumulant_table(&f).unwrap();
    for mask in 1..(1u32 << k) {
        let v = kc.get_mask(mask);
        if mask.count_ones() == 1 {
            let i = mask.trailing_zeros() as usize;
            assert!((v - c[i]).norm() < 1e-14);
        } else {
            assert!(v.norm() < 1e-13, "mask={mask:b}: {v:e}");
        }
    }
}
