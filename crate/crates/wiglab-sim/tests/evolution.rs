//! Heisenberg evolution against its leading-order description: the
//! isotropic matrix element relaxes to <x,y><A> with the t^{-3}
//! correction carrying the traceless part.

use num_complex::Complex64 as C64;
use wiglab_core::bessel::theta;
use wiglab_sim::chain::ChainEval;
use wiglab_sim::ensemble::{sample_wigner, EnsembleSpec};
use wiglab_sim::observable::{gaussian_symmetric, make_traceless};
use wiglab_sim::seed::SeedPlan;

#[test]
fn isotropic_evolution_matches_the_leading_description() {
    let n = 2048;
    let t = 5.0;
    let spec = EnsembleSpec::goe(n).unwrap();
    let mut rng = SeedPlan::new(31).rng(0, 0);
    let sample = sample_wigner(&spec, &mut rng).unwrap();

    // observable with order-one trace plus a traceless part
    let mut a = gaussian_symmetric(n, &mut rng);
    make_traceless(&mut a);
    for i in 0..n {
        a[(i, i)] += 0.6;
    }
    let tr_a = (0..n).map(|i| a[(i, i)]).sum::<f64>() / n as f64;

    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let mut x = vec![zero; n];
    let mut y = vec![zero; n];
    x[0] = one;
    y[1] = one;

    let chain = ChainEval::from_real(&sample, std::slice::from_ref(&a)).unwrap();
    let forward: &dyn Fn(f64) -> C64 = &move |v| C64::new(0.0, t * v).exp();
    let backward: &dyn Fn(f64) -> C64 = &move |v| C64::new(0.0, -t * v).exp();
    let got = chain.isotropic_f(&[forward, backward], &x, &y).unwrap();

    // <x,y> <A> + theta(t)^2 <x, (A - <A>) y> / t^3 with <x,y> = 0 here
    let xy = zero;
    let th = theta(t);
    let a_traceless_xy = C64::new(a[(0, 1)], 0.0) - tr_a * xy;
    let predicted = xy * tr_a + a_traceless_xy * (th * th / (t * t * t));
    let dev = (got - predicted).norm();
    let tol = 10.0 * t * t / (n as f64).sqrt();
    assert!(
        dev <= tol,
        "isotropic evolution deviation {dev:.3e} exceeds {tol:.3e}"
    );
}
