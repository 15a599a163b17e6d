//! Direct access to the deterministic predictions: scalar value plus
//! the per-partition term breakdown, serialized as JSON.

use faer::Mat;
use serde_json::json;

use crate::config::{parse_complex_list, parse_function, parse_real_list, resolve_observable};
use crate::CliError;
use wiglab_core::detapprox::{
    exp_prediction, f_prediction, m_trace_partition, ObservableChain, ScalarPrediction,
    TermBreakdown,
};
use wiglab_core::quad::QuadratureSpec;
use wiglab_core::semicircle::SpectralTuple;
use wiglab_sim::C64;

fn build_chain(obs: &str, k: usize, n: usize) -> Result<ObservableChain, CliError> {
    let descriptors: Vec<&str> = obs.split(',').map(str::trim).collect();
    let mats: Vec<Mat<f64>> = if descriptors.len() == 1 {
        vec![resolve_observable(descriptors[0], n)?; k]
    } else if descriptors.len() == k {
        descriptors
            .iter()
            .map(|d| resolve_observable(d, n))
            .collect::<Result<_, _>>()?
    } else {
        return Err(CliError::Config(format!(
            "--obs needs 1 or {k} descriptors, got {}",
            descriptors.len()
        )));
    };
    Ok(ObservableChain::from_real(&mats)?)
}

fn term_json(t: &TermBreakdown) -> serde_json::Value {
    json!({
        "partition": t.partition.to_text(),
        "kreweras": t.kreweras.to_text(),
        "weight": [t.weight.re, t.weight.im],
        "observable_factor": [t.observable_factor.re, t.observable_factor.im],
        "contribution": [t.contribution.re, t.contribution.im],
    })
}

fn prediction_json(kind: &str, params: serde_json::Value, p: &ScalarPrediction) -> serde_json::Value {
    json!({
        "kind": kind,
        "params": params,
        "value_re": p.value.re,
        "value_im": p.value.im,
        "terms": p.terms.iter().map(term_json).collect::<Vec<_>>(),
    })
}

pub fn predict_chain(z: &str, obs: &str, n: usize) -> Result<serde_json::Value, CliError> {
    let zs: Vec<C64> = parse_complex_list(z)?;
    let chain = build_chain(obs, zs.len(), n)?;
    let t = SpectralTuple::new(zs.clone())?;
    let p = m_trace_partition(&t, &chain)?;
    let z_json: Vec<Vec<f64>> = zs.iter().map(|z| vec![z.re, z.im]).collect();
    Ok(prediction_json("chain", json!({"z": z_json, "obs": obs, "n": n}), &p))
}

pub fn predict_exp(s: &str, obs: &str, n: usize) -> Result<serde_json::Value, CliError> {
    let times = parse_real_list(s)?;
    let chain = build_chain(obs, times.len(), n)?;
    let p = exp_prediction(&times, &chain)?;
    Ok(prediction_json("exp", json!({"s": times, "obs": obs, "n": n}), &p))
}

pub fn predict_f(
    specs: &[String],
    k: Option<usize>,
    obs: &str,
    n: usize,
) -> Result<serde_json::Value, CliError> {
    let expanded: Vec<&String> = match k {
        Some(k) if specs.len() == 1 => std::iter::repeat(&specs[0]).take(k).collect(),
        Some(k) if specs.len() != k => {
            return Err(CliError::Config(format!(
                "--k {k} conflicts with {} --f specs",
                specs.len()
            )));
        }
        _ => specs.iter().collect(),
    };
    if expanded.is_empty() {
        return Err(CliError::Config("need at least one --f spec".into()));
    }
    let fns: Vec<Box<dyn Fn(f64) -> C64 + Send + Sync>> = expanded
        .iter()
        .map(|s| parse_function(s))
        .collect::<Result<_, _>>()?;
    let refs: Vec<&dyn Fn(f64) -> C64> = fns.iter().map(|b| b.as_ref() as _).collect();
    let chain = build_chain(obs, refs.len(), n)?;
    let p = f_prediction(&refs, &chain, &QuadratureSpec::default())?;
    let spec_list: Vec<&str> = expanded.iter().map(|s| s.as_str()).collect();
    Ok(prediction_json("f", json!({"f": spec_list, "obs": obs, "n": n}), &p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use wiglab_core::bessel::phi;
    use wiglab_core::semicircle::{divided_difference_recursive, stieltjes_m};

    #[test]
    fn chain_with_identities_gives_the_divided_difference() {
        let doc = predict_chain("0+1i,0+2i", "identity", 8).unwrap();
        let t = SpectralTuple::new(vec![C64::new(0.0, 1.0), C64::new(0.0, 2.0)]).unwrap();
        let want = divided_difference_recursive(&t).unwrap();
        assert!((doc["value_re"].as_f64().unwrap() - want.re).abs() < 1e-12);
        assert!((doc["value_im"].as_f64().unwrap() - want.im).abs() < 1e-12);
        assert_eq!(doc["terms"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn single_resolvent_is_the_stieltjes_transform() {
        let doc = predict_chain("0.5+0.7i", "identity", 8).unwrap();
        let want = stieltjes_m(C64::new(0.5, 0.7)).unwrap();
        assert!((doc["value_re"].as_f64().unwrap() - want.re).abs() < 1e-12);
        assert!((doc["value_im"].as_f64().unwrap() - want.im).abs() < 1e-12);
    }

    #[test]
    fn zero_times_reduce_to_the_observable_trace() {
        // <A B> with A = diag(+-1), B = rank-one traceless projection
        let doc = predict_exp("0,0", "diag-pm1,proj-traceless", 8).unwrap();
        let a = resolve_observable("diag-pm1", 8).unwrap();
        let b = resolve_observable("proj-traceless", 8).unwrap();
        let mut want = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                want += a[(i, j)] * b[(j, i)];
            }
        }
        want /= 8.0;
        assert!((doc["value_re"].as_f64().unwrap() - want).abs() < 1e-12);
        assert!(doc["value_im"].as_f64().unwrap().abs() < 1e-12);
    }

    #[test]
    fn single_phase_function_gives_the_semicircle_average() {
        let doc = predict_f(&["exp(i*3*x)".into()], Some(1), "identity", 8).unwrap();
        assert!((doc["value_re"].as_f64().unwrap() - phi(3.0)).abs() < 1e-8);
        assert!(doc["value_im"].as_f64().unwrap().abs() < 1e-8);
    }
}
