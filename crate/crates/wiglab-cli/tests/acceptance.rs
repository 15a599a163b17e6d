//! Acceptance battery: one test per release criterion, each printing a
//! single PASS/FAIL line with the measured quantity and its pinned
//! tolerance. Exact identities are checked through the same public
//! routines the `verify` subcommand runs; the statistical criteria
//! rerun the full-size experiments with fixed seeds.
//!
//! The suite is heavy (half an hour on one core); the budget per
//! criterion is noted on each test.

use faer::Mat;
use wiglab_cli::config::Config;
use wiglab_cli::experiments::locallaw::cmd_locallaw;
use wiglab_cli::experiments::thermalise::cmd_thermalise;
use wiglab_cli::experiments::verify;
use wiglab_core::detapprox::{exp_prediction, ObservableChain};
use wiglab_core::semicircle::stieltjes_m;
use wiglab_core::C64;
use wiglab_sim::chain::{ChainEval, PairKernel, TripleKernel};
use wiglab_sim::ensemble::{sample_wigner_seeded, EnsembleSpec};
use wiglab_sim::mc::{default_workers, monte_carlo};
use wiglab_sim::observable::{alternating_sign, identity, random_traceless};
use wiglab_sim::seed::SeedPlan;

// Tolerances, pinned. Identity suites reuse the verify battery's
// built-in tolerances; these constants guard the statistical gates.
const TOL_ROUND_TRIP: f64 = 1e-12;
const TOL_DIVIDED_DIFF: f64 = 1e-8;
const TOL_M_ROUTES: f64 = 1e-10;
const STD_REL_WINDOW: f64 = 0.20;
const LOCALLAW_EXPONENT: f64 = -1.0;
const LOCALLAW_EXPONENT_TOL: f64 = 0.2;
const ENVELOPE_EXPONENT: f64 = -3.0;
const ENVELOPE_EXPONENT_TOL: f64 = 0.3;
const POINTWISE_CONST: f64 = 10.0;
const TRACELESS_GAIN_MIN: f64 = 5.0;
const TOL_WARD: f64 = 1e-10;
const TOL_FLAT_CHAIN: f64 = 1e-10;
const TOL_PHASE: f64 = 1e-8;

fn report(tag: &str, ok: bool, detail: &str) {
    println!("acceptance {tag}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{tag}: {detail}");
}

fn identity_gate(tag: &str, r: verify::IdentityResult) {
    let ok = r.pass();
    report(
        tag,
        ok,
        &format!("{}: worst residual {:.3e} (tol {:.0e}) {}", r.name, r.worst, r.tol, r.detail),
    );
}

fn out_dir(tag: &str) -> String {
    let dir = std::env::temp_dir().join(format!("wiglab-acceptance-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.to_string_lossy().into_owned()
}

fn param_f64(params_json: &str, key: &str) -> f64 {
    let v: serde_json::Value = serde_json::from_str(params_json).unwrap();
    v[key].as_f64().unwrap()
}

/// Criterion 1: partition counts, Kreweras identities, and the Moebius
/// closed form against its recursion, including both worked values.
/// Budget: 30 s.
#[test]
fn acceptance_01_noncrossing_combinatorics() {
    identity_gate("01a-catalan", verify::catalan_counts(10).unwrap());
    identity_gate("01b-kreweras", verify::kreweras_involution(8).unwrap());
    identity_gate("01c-moebius", verify::moebius_closed_form(7).unwrap());
}

/// Criterion 2: moment <-> free-cumulant round trip on 100 random
/// complex tables, sets up to 7 elements. Budget: 10 s.
#[test]
fn acceptance_02_moment_cumulant_round_trip() {
    let r = verify::moment_cumulant_round_trip(7, 42).unwrap();
    assert_eq!(r.tol, TOL_ROUND_TRIP);
    identity_gate("02-round-trip", r);
}

/// Criterion 3: recursive, quadrature, and graph divided differences on
/// 200 random tuples, k <= 6, eta in [0.05, 2]. Budget: 1 min.
#[test]
fn acceptance_03_divided_difference_routes() {
    let r = verify::divided_difference_routes(6, 42).unwrap();
    assert_eq!(r.tol, TOL_DIVIDED_DIFF);
    identity_gate("03-divided-differences", r);
}

/// Criterion 4: partition, graph, and recursive constructions of the
/// deterministic chain approximation plus the trace recursion, on 100
/// random instances, k <= 6, dimension <= 16. Budget: 1 min.
#[test]
fn acceptance_04_deterministic_approximation_routes() {
    let r = verify::m_formula_routes(6, 42).unwrap();
    assert_eq!(r.tol, TOL_M_ROUTES);
    identity_gate("04-m-routes", r);
}

/// Criterion 5: GUE at N = 512, z = i, 2000 samples; sample standard
/// deviations of <G - m> and <e1, (G - m) e2> within 20% of the exact
/// second-moment closed forms. Budget: minutes.
#[test]
fn acceptance_05_single_resolvent_fluctuation() {
    wiglab_sim::ensure_sequential_backend();
    let n = 512usize;
    let eta = 1.0;
    let z = C64::new(0.0, eta);
    let m = stieltjes_m(z).unwrap();
    let spec = EnsembleSpec::gue(n).unwrap();
    let plan = SeedPlan::new(51_2025);
    let stats = monte_carlo(2000, default_workers(), |idx| {
        let s = sample_wigner_seeded(&spec, &plan, 0, idx)?;
        let avg = s.resolvent_trace(z)?;
        let basis = s.basis();
        let lam = s.lambda();
        let mut g12 = C64::new(0.0, 0.0);
        for p in 0..n {
            g12 += basis.get(0, p) * basis.get(1, p).conj() / (C64::new(lam[p], 0.0) - z);
        }
        Ok(vec![avg - m, g12])
    })
    .unwrap();

    // exact: E|<G-m>|^2 = [(Im m / eta) / (N |1-m^2|)]^2 and, via the
    // Ward identity, E|G_12|^2 = (Im m / eta - |m|^2) / N
    let one_minus_m2 = (C64::new(1.0, 0.0) - m * m).norm();
    let exact_avg = m.im / eta / one_minus_m2 / n as f64;
    let exact_iso = ((m.im / eta - m.norm_sqr()) / n as f64).sqrt();
    // the small-eta display form of the same quantity, reported for
    // comparison but not gated: sqrt(Im m |m| / (N eta))
    let display_iso = (m.im * m.norm() / (n as f64 * eta)).sqrt();

    let std_avg = stats[0].variance.sqrt();
    let std_iso = stats[1].variance.sqrt();
    let dev_avg = (std_avg / exact_avg - 1.0).abs();
    let dev_iso = (std_iso / exact_iso - 1.0).abs();
    let detail = format!(
        "std<G-m> {std_avg:.4e} vs {exact_avg:.4e} (rel {dev_avg:.3}); \
         std<e1,Ge2> {std_iso:.4e} vs {exact_iso:.4e} (rel {dev_iso:.3}); \
         small-eta display form {display_iso:.4e} (ratio {:.3})",
        std_iso / display_iso
    );
    report(
        "05-fluctuation-scale",
        dev_avg <= STD_REL_WINDOW && dev_iso <= STD_REL_WINDOW,
        &detail,
    );
}

/// Criterion 6: fitted N-exponent of the mean two-resolvent deviation
/// over N in {256, 512, 1024, 2048} at eta = 0.5 equals -1 +- 0.2.
/// Budget: 30 min.
#[test]
fn acceptance_06_two_resolvent_error_scaling() {
    wiglab_sim::ensure_sequential_backend();
    let toml = format!(
        r#"
[run]
seed = 42
out = "{}"

[locallaw]
k = 2
n_list = [256, 512, 1024, 2048]
eta_list = [0.5]
samples = 50
obs = "diag-pm1"
"#,
        out_dir("locallaw")
    );
    let cfg = Config::from_str(&toml).unwrap();
    let out = cmd_locallaw(&cfg).unwrap();
    let fit = out
        .records
        .iter()
        .find(|r| r.experiment_id == "locallaw-fit-n")
        .expect("N-exponent fit record");
    let slope = fit.mean.re;
    report(
        "06-locallaw-scaling",
        (slope - LOCALLAW_EXPONENT).abs() <= LOCALLAW_EXPONENT_TOL,
        &format!(
            "N-exponent {slope:.3} over {} sizes (target {LOCALLAW_EXPONENT} +- {LOCALLAW_EXPONENT_TOL})",
            fit.n_samples
        ),
    );
}

/// Criterion 7: thermalisation at N = 2048 with traceless A = B on the
/// grid t in [2, 30] step 0.25, 500 samples per point: envelope decay
/// exponent -3 +- 0.3 and pointwise deviation below 10 t^2 / N.
/// Budget: 1 h.
#[test]
fn acceptance_07_thermalisation_decay() {
    wiglab_sim::ensure_sequential_backend();
    let toml = format!(
        r#"
[run]
seed = 42
out = "{}"

[thermalise]
n = 2048
t_min = 2.0
t_max = 30.0
t_step = 0.25
samples = 500
obs_a = "diag-pm1"
obs_b = "diag-pm1"
"#,
        out_dir("thermalise")
    );
    let cfg = Config::from_str(&toml).unwrap();
    let out = cmd_thermalise(&cfg).unwrap();

    let n = 2048.0;
    let mut worst_ratio = 0.0f64;
    let mut worst_t = 0.0f64;
    for rec in out.records.iter().filter(|r| r.experiment_id == "thermalise-avg") {
        let t = param_f64(&rec.params_json, "t");
        let ratio = rec.abs_dev() * n / (POINTWISE_CONST * t * t);
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_t = t;
        }
    }
    let fit = out
        .records
        .iter()
        .find(|r| r.experiment_id == "thermalise-fit-envelope")
        .expect("envelope fit record");
    let slope = fit.mean.re;
    let ok_slope = (slope - ENVELOPE_EXPONENT).abs() <= ENVELOPE_EXPONENT_TOL;
    let ok_pointwise = worst_ratio <= 1.0;
    report(
        "07-thermalisation",
        ok_slope && ok_pointwise,
        &format!(
            "envelope exponent {slope:.3} from {} peaks (target {ENVELOPE_EXPONENT} +- {ENVELOPE_EXPONENT_TOL}); \
             worst |dev| = {worst_ratio:.3} x {POINTWISE_CONST} t^2/N at t = {worst_t}",
            fit.n_samples
        ),
    );
}

/// Criterion 8: five-term three-observable prediction at N = 2048,
/// (t, s) = (10, 5), within 10 t^3 / N of simulation, and the traceless
/// configuration decays at least 5x faster than the generic one.
/// Budget: 30 min.
#[test]
fn acceptance_08_three_observable_structure() {
    wiglab_sim::ensure_sequential_backend();
    let n = 2048usize;
    let (t, s) = (10.0, 5.0);
    let times = [t, s - t, -s];
    let a0 = alternating_sign(n);
    let shift = |m0: &Mat<f64>| Mat::from_fn(n, n, |i, j| m0[(i, j)] + if i == j { 0.5 } else { 0.0 });
    let (a1, b1, c1) = (shift(&a0), shift(&a0), shift(&a0));

    let chain_tr = ObservableChain::from_real(&[a0.clone(), a0.clone(), a0.clone()]).unwrap();
    let chain_gen = ObservableChain::from_real(&[a1.clone(), b1.clone(), c1.clone()]).unwrap();
    let pred_tr = exp_prediction(&times, &chain_tr).unwrap().value;
    let pred_gen = exp_prediction(&times, &chain_gen).unwrap().value;

    let spec = EnsembleSpec::goe(n).unwrap();
    let plan = SeedPlan::new(81_2025);
    let stats = monte_carlo(60, default_workers(), |idx| {
        let w = sample_wigner_seeded(&spec, &plan, 0, idx)?;
        let k_tr = TripleKernel::new(&w, &a0, &a0, &a0)?;
        let k_gen = TripleKernel::new(&w, &a1, &b1, &c1)?;
        Ok(vec![k_tr.heisenberg_pair(t, s), k_gen.heisenberg_pair(t, s)])
    })
    .unwrap();

    let bound = POINTWISE_CONST * t.powi(3) / n as f64;
    let dev_tr = (stats[0].mean - pred_tr).norm();
    let dev_gen = (stats[1].mean - pred_gen).norm();
    let gain = stats[1].mean.norm() / stats[0].mean.norm();
    report(
        "08-five-term",
        dev_tr <= bound && dev_gen <= bound && gain >= TRACELESS_GAIN_MIN,
        &format!(
            "traceless dev {dev_tr:.3e}, generic dev {dev_gen:.3e} (bound {bound:.3e}); \
             generic/traceless magnitude ratio {gain:.1} (min {TRACELESS_GAIN_MIN})"
        ),
    );
}

/// Criterion 9: hard per-sample invariants. The Ward identity
/// <G G*> = <Im G> / Im z to 1e-10 on every sample, both symmetry
/// classes, and flat (f = 1) chains reproducing plain observable
/// traces. Budget: seconds.
#[test]
fn acceptance_09_hard_invariants() {
    wiglab_sim::ensure_sequential_backend();
    let n = 256usize;
    let z = C64::new(0.3, 0.7);
    let eye = identity(n);
    let mut worst_ward = 0.0f64;
    for (which, spec) in [EnsembleSpec::goe(n).unwrap(), EnsembleSpec::gue(n).unwrap()]
        .into_iter()
        .enumerate()
    {
        let plan = SeedPlan::new(91_2025 + which as u64);
        for idx in 0..8 {
            let w = sample_wigner_seeded(&spec, &plan, 0, idx).unwrap();
            let lhs = PairKernel::new(&w, &eye, &eye)
                .unwrap()
                .eval_resolvents(z, z.conj())
                .unwrap();
            let rhs = C64::new(w.resolvent_trace(z).unwrap().im / z.im, 0.0);
            worst_ward = worst_ward.max((lhs - rhs).norm());
        }
    }

    let spec = EnsembleSpec::goe(64).unwrap();
    let plan = SeedPlan::new(93_2025);
    let w = sample_wigner_seeded(&spec, &plan, 0, 0).unwrap();
    let obs = [
        random_traceless(64, 1),
        random_traceless(64, 2),
        random_traceless(64, 3),
    ];
    let eval = ChainEval::from_real(&w, &obs).unwrap();
    let one = |_x: f64| C64::new(1.0, 0.0);
    let flat = eval.averaged_f(&[&one, &one, &one]).unwrap();
    let prod = &(&obs[0] * &obs[1]) * &obs[2];
    let mut tr = 0.0;
    for i in 0..64 {
        tr += prod[(i, i)];
    }
    let dev_flat = (flat - C64::new(tr / 64.0, 0.0)).norm();

    report(
        "09-hard-invariants",
        worst_ward <= TOL_WARD && dev_flat <= TOL_FLAT_CHAIN,
        &format!(
            "worst Ward residual {worst_ward:.3e} (tol {TOL_WARD:.0e}); \
             flat-chain residual {dev_flat:.3e} (tol {TOL_FLAT_CHAIN:.0e})"
        ),
    );
}

/// Criterion 10: the J1-based phase average matches semicircle
/// quadrature of e^{isx} to 1e-8 on s in [0, 50], and the large-x
/// asymptotic residual bound holds at x in {20, 50, 100}.
/// Budget: 5 s.
#[test]
fn acceptance_10_bessel_phase_average() {
    let r = verify::phase_average(10).unwrap();
    assert_eq!(r.tol, TOL_PHASE);
    identity_gate("10-phase-average", r);
}
