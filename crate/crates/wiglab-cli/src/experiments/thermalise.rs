//! Heisenberg-evolution decay: simulated <A(t) B> over a time grid
//! against the deterministic prediction, with an envelope fit of the
//! decay exponent and the pointwise deviation scaled by t^2/N.

use serde_json::json;

use crate::config::{resolve_observable, Config};
use crate::experiments::{elapsed_ms, pair_grid_stats, params_string};
use crate::fit::envelope_decay_fit;
use crate::records::{ExperimentRecord, RunOutput};
use crate::CliError;
use wiglab_core::detapprox::{exp_prediction, ObservableChain};
use wiglab_sim::chain::TripleKernel;
use wiglab_sim::ensemble::sample_wigner_seeded;
use wiglab_sim::mc::monte_carlo;
use wiglab_sim::seed::SeedPlan;
use wiglab_sim::C64;

pub fn cmd_thermalise(cfg: &Config) -> Result<RunOutput, CliError> {
    let th = &cfg.thermalise;
    if th.samples < 2 {
        return Err(CliError::Config("thermalise.samples must be >= 2".into()));
    }
    let ts = th.time_grid()?;
    let n = th.n;
    let spec = cfg.ensemble.build(n)?;
    let a = resolve_observable(&th.obs_a, n)?;
    let b = resolve_observable(&th.obs_b, n)?;
    let chain = ObservableChain::from_real(&[a.clone(), b.clone()])?;
    let plan = SeedPlan::new(cfg.run.seed);
    let workers = cfg.workers();

    let mut out = RunOutput::default();
    let start = std::time::Instant::now();
    let stats = pair_grid_stats(&spec, &a, &b, &ts, th.samples, workers, &plan, 0)?;
    let wall = elapsed_ms(start);

    let mut preds = Vec::with_capacity(ts.len());
    let mut worst_scaled_dev = 0.0f64;
    for (i, &t) in ts.iter().enumerate() {
        let pred = exp_prediction(&[t, -t], &chain)?.value;
        preds.push(pred);
        let dev = (stats[i].mean - pred).norm();
        if t != 0.0 {
            worst_scaled_dev = worst_scaled_dev.max(dev * n as f64 / (t * t));
        }
        out.push(ExperimentRecord {
            experiment_id: "thermalise-avg".into(),
            n,
            k: 2,
            params_json: params_string(json!({
                "t": t, "obs_a": th.obs_a, "obs_b": th.obs_b,
            })),
            seed: cfg.run.seed,
            n_samples: th.samples,
            pred,
            mean: stats[i].mean,
            stderr: stats[i].stderr,
            wall_ms: wall,
        });
    }

    let means: Vec<C64> = stats.iter().map(|s| s.mean).collect();
    let errs: Vec<f64> = stats.iter().map(|s| s.stderr).collect();
    match envelope_decay_fit(&ts, &means, &errs) {
        Some(fit) => {
            out.note(format!(
                "fit: envelope decay exponent {:.4} over {} peaks (offset {:.3e}{:+.3e}i)",
                fit.exponent, fit.points_used, fit.offset.re, fit.offset.im
            ));
            out.push(super::locallaw::fit_record(
                "thermalise-fit-envelope",
                n,
                2,
                cfg.run.seed,
                fit.exponent,
                fit.points_used,
                json!({"offset_re": fit.offset.re, "offset_im": fit.offset.im}),
            ));
        }
        None => out.note("fit: envelope decay fit not available (insufficient usable peaks)"),
    }
    out.note(format!(
        "pointwise: max |mean - prediction| * N / t^2 = {worst_scaled_dev:.4} over the grid"
    ));

    if let (Some(t), Some(s)) = (th.triple_t, th.triple_s) {
        run_triple(cfg, &mut out, t, s)?;
    }

    out.write_all(&cfg.run.out, "thermalise", &cfg.effective_toml(), &cfg.run.format)?;
    Ok(out)
}

/// Three-observable evaluation <A(t) B(s) C> at a single (t, s).
fn run_triple(cfg: &Config, out: &mut RunOutput, t: f64, s: f64) -> Result<(), CliError> {
    let th = &cfg.thermalise;
    let n = th.n;
    let spec = cfg.ensemble.build(n)?;
    let a = resolve_observable(&th.obs_a, n)?;
    let b = resolve_observable(&th.obs_b, n)?;
    let c_desc = th.obs_c.clone().unwrap_or_else(|| th.obs_a.clone());
    let c = resolve_observable(&c_desc, n)?;
    let chain = ObservableChain::from_real(&[a.clone(), b.clone(), c.clone()])?;
    let pred = exp_prediction(&[t, s - t, -s], &chain)?.value;
    let plan = SeedPlan::new(cfg.run.seed);

    let start = std::time::Instant::now();
    let stats = monte_carlo(th.samples, cfg.workers(), |idx| {
        let sample = sample_wigner_seeded(&spec, &plan, 1, idx)?;
        let kernel = TripleKernel::new(&sample, &a, &b, &c)?;
        Ok(vec![kernel.heisenberg_pair(t, s)])
    })?;
    let wall = elapsed_ms(start);

    let dev = (stats[0].mean - pred).norm();
    out.note(format!(
        "triple: (t,s)=({t},{s}) |mean - prediction| = {dev:.3e}, t^3/N = {:.3e}",
        t.powi(3) / n as f64
    ));
    out.push(ExperimentRecord {
        experiment_id: "thermalise-triple".into(),
        n,
        k: 3,
        params_json: params_string(json!({
            "t": t, "s": s, "obs_a": th.obs_a, "obs_b": th.obs_b, "obs_c": c_desc,
        })),
        seed: cfg.run.seed,
        n_samples: th.samples,
        pred,
        mean: stats[0].mean,
        stderr: stats[0].stderr,
        wall_ms: wall,
    });
    Ok(())
}
