//! Run configuration: a strict key = value file with bracketed
//! sections, merged with command-line overrides. Unknown keys are hard
//! errors so a typo cannot silently fall back to a default.

use serde::{Deserialize, Serialize};

use crate::CliError;
use wiglab_sim::ensemble::{EnsembleSpec, OffDiagonal, Symmetry};

fn default_seed() -> u64 {
    42
}

fn default_out() -> String {
    "runs".into()
}

fn default_format() -> String {
    "csv".into()
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    pub workers: usize,
    pub out: String,
    pub format: String,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: default_seed(),
            workers: 0, // 0 = WIGLAB_WORKERS or 1
            out: default_out(),
            format: default_format(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub symmetry: String,
    pub offdiag: String,
    pub diag_variance: Option<f64>,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection {
            symmetry: "real".into(),
            offdiag: "gaussian".into(),
            diag_variance: None,
        }
    }
}

impl EnsembleSection {
    pub fn build(&self, n: usize) -> Result<EnsembleSpec, CliError> {
        let symmetry = match self.symmetry.as_str() {
            "real" => Symmetry::Real,
            "complex" => Symmetry::Complex,
            other => {
                return Err(CliError::Config(format!(
                    "ensemble.symmetry must be \"real\" or \"complex\", got {other:?}"
                )))
            }
        };
        let offdiag = match self.offdiag.as_str() {
            "gaussian" => OffDiagonal::Gaussian,
            "rademacher" => OffDiagonal::Rademacher,
            "uniform" => OffDiagonal::Uniform,
            other => {
                return Err(CliError::Config(format!(
                    "ensemble.offdiag must be gaussian|rademacher|uniform, got {other:?}"
                )))
            }
        };
        let mut spec = EnsembleSpec::new(n, symmetry, offdiag)?;
        if let Some(v) = self.diag_variance {
            spec = spec.with_diag_variance(v)?;
        }
        Ok(spec)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalLawSection {
    pub k: usize,
    pub n_list: Vec<usize>,
    pub eta_list: Vec<f64>,
    pub re_z: f64,
    pub samples: usize,
    pub obs: String,
}

impl Default for LocalLawSection {
    fn default() -> Self {
        LocalLawSection {
            k: 1,
            n_list: vec![256, 512, 1024, 2048],
            eta_list: vec![1.0],
            re_z: 0.0,
            samples: 100,
            obs: "diag-pm1".into(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermaliseSection {
    pub n: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub t_step: f64,
    pub samples: usize,
    pub obs_a: String,
    pub obs_b: String,
    pub obs_c: Option<String>,
    /// Optional (t, s) evaluation for a three-observable run.
    pub triple_t: Option<f64>,
    pub triple_s: Option<f64>,
}

impl Default for ThermaliseSection {
    fn default() -> Self {
        ThermaliseSection {
            n: 2048,
            t_min: 2.0,
            t_max: 30.0,
            t_step: 0.25,
            samples: 50,
            obs_a: "diag-pm1".into(),
            obs_b: "diag-pm1".into(),
            obs_c: None,
            triple_t: None,
            triple_s: None,
        }
    }
}

impl ThermaliseSection {
    pub fn time_grid(&self) -> Result<Vec<f64>, CliError> {
        if !(self.t_step > 0.0) || self.t_max < self.t_min {
            return Err(CliError::Config(format!(
                "bad time grid: t_min {}, t_max {}, t_step {}",
                self.t_min, self.t_max, self.t_step
            )));
        }
        let mut ts = Vec::new();
        let steps = ((self.t_max - self.t_min) / self.t_step).round() as usize;
        for i in 0..=steps {
            ts.push(self.t_min + i as f64 * self.t_step);
        }
        Ok(ts)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct FreenessSection {
    pub n: usize,
    pub k: usize,
    pub separations: Vec<f64>,
    pub samples: usize,
    pub obs_a: String,
    pub obs_b: String,
    /// Polynomial coefficients (ascending degree) applied to the two
    /// observables before centering.
    pub poly_a: Vec<f64>,
    pub poly_b: Vec<f64>,
    /// Oscillation window for local time-averaging.
    pub window: f64,
    pub window_points: usize,
}

impl Default for FreenessSection {
    fn default() -> Self {
        FreenessSection {
            n: 1024,
            k: 2,
            separations: vec![2.0, 5.0, 10.0, 20.0],
            samples: 6,
            obs_a: "diag-pm1".into(),
            obs_b: "random-traceless:7".into(),
            poly_a: vec![0.0, 1.0],
            poly_b: vec![0.0, 1.0],
            window: std::f64::consts::FRAC_PI_2,
            window_points: 5,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub run: RunSection,
    pub ensemble: EnsembleSection,
    pub locallaw: LocalLawSection,
    pub thermalise: ThermaliseSection,
    pub freeness: FreenessSection,
}

impl Config {
    pub fn from_file(path: &str) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {path}: {e}")))?;
        Self::from_str(&text)
    }

    pub fn from_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config error: {e}")))
    }

    /// Effective worker count: explicit value, else environment, else 1.
    pub fn workers(&self) -> usize {
        if self.run.workers >= 1 {
            self.run.workers
        } else {
            wiglab_sim::mc::default_workers()
        }
    }

    /// Serialized effective configuration for output headers.
    pub fn effective_toml(&self) -> String {
        toml::to_string(self).unwrap_or_else(|e| format!("# config serialization failed: {e}"))
    }
}

/// Parses "a+bi" style complex literals: "0+1i", "-0.5-2i", "1", "2i".
pub fn parse_complex(s: &str) -> Result<wiglab_sim::C64, CliError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(CliError::Config("empty complex literal".into()));
    }
    let fail = || CliError::Config(format!("cannot parse complex literal {t:?}; use forms like 1, 2i, 0.5+1i, -1-0.25i"));
    if let Some(body) = t.strip_suffix('i') {
        // split into real and imaginary at the last +/- that is not an exponent sign or leading sign
        let chars: Vec<char> = body.chars().collect();
        let mut split = None;
        for idx in (1..chars.len()).rev() {
            let c = chars[idx];
            if (c == '+' || c == '-') && chars[idx - 1] != 'e' && chars[idx - 1] != 'E' {
                split = Some(idx);
                break;
            }
        }
        match split {
            Some(idx) => {
                let re: f64 = body[..idx].parse().map_err(|_| fail())?;
                let im_str = &body[idx..];
                let im: f64 = if im_str == "+" {
                    1.0
                } else if im_str == "-" {
                    -1.0
                } else {
                    im_str.parse().map_err(|_| fail())?
                };
                Ok(wiglab_sim::C64::new(re, im))
            }
            None => {
                let im: f64 = if body.is_empty() {
                    1.0
                } else if body == "-" {
                    -1.0
                } else {
                    body.parse().map_err(|_| fail())?
                };
                Ok(wiglab_sim::C64::new(0.0, im))
            }
        }
    } else {
        let re: f64 = t.parse().map_err(|_| fail())?;
        Ok(wiglab_sim::C64::new(re, 0.0))
    }
}

/// Parses a comma-separated list of complex literals.
pub fn parse_complex_list(s: &str) -> Result<Vec<wiglab_sim::C64>, CliError> {
    s.split(',').map(parse_complex).collect()
}

/// Parses a comma-separated list of reals.
pub fn parse_real_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Config(format!("bad number {tok:?}: {e}")))
        })
        .collect()
}

/// Resolves a named observable generator at dimension n. Accepted
/// forms: identity, diag-pm1, proj-traceless, random-traceless:SEED,
/// file:PATH.
pub fn resolve_observable(descr: &str, n: usize) -> Result<faer::Mat<f64>, CliError> {
    use wiglab_sim::observable as obs;
    let d = descr.trim();
    if d == "identity" {
        return Ok(obs::identity(n));
    }
    if d == "diag-pm1" {
        if n % 2 != 0 {
            return Err(CliError::Config(format!(
                "diag-pm1 needs even dimension for balance, got {n}"
            )));
        }
        return Ok(obs::alternating_sign(n));
    }
    if d == "proj-traceless" {
        return Ok(obs::rank_one_projection_traceless(n));
    }
    if let Some(seed) = d.strip_prefix("random-traceless:") {
        let seed: u64 = seed
            .parse()
            .map_err(|e| CliError::Config(format!("bad seed in {d:?}: {e}")))?;
        return Ok(obs::random_traceless(n, seed));
    }
    if let Some(path) = d.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read observable {path}: {e}")))?;
        let m = obs::parse_observable_text(&text)?;
        if m.nrows() != n {
            return Err(CliError::Config(format!(
                "observable in {path} is {}x{}, expected {n}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut im_norm = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                im_norm += m[(i, j)].im * m[(i, j)].im;
            }
        }
        if im_norm.sqrt() > 1e-12 {
            return Err(CliError::Config(format!(
                "observable in {path} has complex entries; experiment generators are real"
            )));
        }
        return Ok(faer::Mat::from_fn(n, n, |i, j| m[(i, j)].re));
    }
    Err(CliError::Config(format!(
        "unknown observable descriptor {d:?}; use identity | diag-pm1 | proj-traceless | random-traceless:SEED | file:PATH"
    )))
}

/// A scalar function on the spectrum described on the command line:
/// "exp(i*T*x)" (phase), "resolvent(RE,IM)", "poly:c0,c1,...", "one",
/// or "x".
pub fn parse_function(descr: &str) -> Result<Box<dyn Fn(f64) -> wiglab_sim::C64 + Send + Sync>, CliError> {
    let d = descr.trim().replace(' ', "");
    if d == "one" || d == "1" {
        return Ok(Box::new(|_| wiglab_sim::C64::new(1.0, 0.0)));
    }
    if d == "x" {
        return Ok(Box::new(|x| wiglab_sim::C64::new(x, 0.0)));
    }
    if let Some(rest) = d.strip_prefix("exp(i*").and_then(|r| r.strip_suffix("*x)")) {
        let t: f64 = rest
            .parse()
            .map_err(|e| CliError::Config(format!("bad phase speed in {descr:?}: {e}")))?;
        return Ok(Box::new(move |x| wiglab_sim::C64::new(0.0, t * x).exp()));
    }
    if let Some(rest) = d.strip_prefix("resolvent(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            return Err(CliError::Config(format!(
                "resolvent needs (re,im), got {descr:?}"
            )));
        }
        let re: f64 = parts[0]
            .parse()
            .map_err(|e| CliError::Config(format!("bad re in {descr:?}: {e}")))?;
        let im: f64 = parts[1]
            .parse()
            .map_err(|e| CliError::Config(format!("bad im in {descr:?}: {e}")))?;
        if im == 0.0 {
            return Err(CliError::Config("resolvent requires nonzero imaginary part".into()));
        }
        let z = wiglab_sim::C64::new(re, im);
        return Ok(Box::new(move |x| (wiglab_sim::C64::new(x, 0.0) - z).inv()));
    }
    if let Some(rest) = d.strip_prefix("poly:") {
        let coeffs = parse_real_list(rest)?;
        if coeffs.is_empty() {
            return Err(CliError::Config("poly needs at least one coefficient".into()));
        }
        return Ok(Box::new(move |x| {
            let mut acc = 0.0;
            for &c in coeffs.iter().rev() {
                acc = acc * x + c;
            }
            wiglab_sim::C64::new(acc, 0.0)
        }));
    }
    Err(CliError::Config(format!(
        "unknown function spec {descr:?}; use exp(i*T*x) | resolvent(RE,IM) | poly:c0,c1,... | one | x"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_hard_errors() {
        assert!(Config::from_str("[run]\nseed = 3\n").is_ok());
        let err = Config::from_str("[run]\nsedd = 3\n").unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("sedd"), "error should name the bad key: {msg}");
        assert!(Config::from_str("[mystery]\nx = 1\n").is_err());
    }

    #[test]
    fn defaults_and_overlays_merge() {
        let cfg = Config::from_str("[thermalise]\nn = 512\n").unwrap();
        assert_eq!(cfg.thermalise.n, 512);
        assert_eq!(cfg.thermalise.t_step, 0.25);
        assert_eq!(cfg.run.seed, 42);
        let grid = cfg.thermalise.time_grid().unwrap();
        assert_eq!(grid.len(), 113);
        assert!((grid[0] - 2.0).abs() < 1e-12 && (grid[112] - 30.0).abs() < 1e-12);
    }

    #[test]
    fn complex_literals_parse() {
        let z = parse_complex("0+1i").unwrap();
        assert_eq!((z.re, z.im), (0.0, 1.0));
        let z = parse_complex("-0.5-2i").unwrap();
        assert_eq!((z.re, z.im), (-0.5, -2.0));
        let z = parse_complex("2i").unwrap();
        assert_eq!((z.re, z.im), (0.0, 2.0));
        let z = parse_complex("1.5").unwrap();
        assert_eq!((z.re, z.im), (1.5, 0.0));
        let z = parse_complex("1e-2+3e-1i").unwrap();
        assert!((z.re - 0.01).abs() < 1e-15 && (z.im - 0.3).abs() < 1e-15);
        assert!(parse_complex("pear").is_err());
        let zs = parse_complex_list("0+1i,0+2i").unwrap();
        assert_eq!(zs.len(), 2);
    }

    #[test]
    fn observable_descriptors_resolve() {
        assert_eq!(resolve_observable("identity", 4).unwrap()[(2, 2)], 1.0);
        assert_eq!(resolve_observable("diag-pm1", 4).unwrap()[(1, 1)], -1.0);
        assert!(resolve_observable("diag-pm1", 5).is_err());
        let p = resolve_observable("proj-traceless", 4).unwrap();
        assert!((p[(0, 0)] - 0.75).abs() < 1e-14);
        let r = resolve_observable("random-traceless:3", 8).unwrap();
        let tr: f64 = (0..8).map(|i| r[(i, i)]).sum();
        assert!(tr.abs() < 1e-12);
        assert!(resolve_observable("nonsense", 4).is_err());
    }

    #[test]
    fn function_specs_parse() {
        let f = parse_function("exp(i*3*x)").unwrap();
        let v = f(0.5);
        assert!((v - wiglab_sim::C64::new(0.0, 1.5).exp()).norm() < 1e-15);
        let g = parse_function("resolvent(0.5,1.0)").unwrap();
        let v = g(0.0);
        let want = (wiglab_sim::C64::new(-0.5, -1.0)).inv();
        assert!((v - want).norm() < 1e-15);
        let p = parse_function("poly: 1, 0, 2").unwrap();
        assert!((p(2.0).re - 9.0).abs() < 1e-14);
        assert!(parse_function("exp(3x)").is_err());
        assert!(parse_function("resolvent(1,0)").is_err());
    }
}
