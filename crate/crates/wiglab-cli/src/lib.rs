//! Library surface of the command-line laboratory: configuration,
//! record writing, experiment drivers and envelope fitting. The binary
//! in main.rs is a thin argument-parsing shell over these.

pub mod config;
pub mod experiments;
pub mod fit;
pub mod records;

use clap::{Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Sim(#[from] wiglab_sim::SimError),
    #[error(transparent)]
    Core(#[from] wiglab_core::CoreError),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "wiglab",
    about = "Deterministic approximants for observable chains in large random matrices, with Monte Carlo verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file: key = value lines under [section] headers
    #[arg(long, global = true)]
    config: Option<String>,

    /// Master seed override
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker thread count override (env WIGLAB_WORKERS is the default)
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output directory override
    #[arg(long, global = true)]
    out: Option<String>,

    /// Format echoed to stdout; CSV, JSON and text are always written
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the deterministic identity battery; exit 0 iff all pass
    Verify {
        /// Restrict every identity family to chains of length <= K
        #[arg(long, value_name = "K")]
        k_max: Option<usize>,

        /// Fault injection: scales every pair factor q by (1 + EPS) in
        /// the connected-graph route, which must trip the
        /// cumulant-equivalence identity
        #[arg(long, value_name = "EPS")]
        perturb_q: Option<f64>,
    },
    /// Resolvent chains against their deterministic approximant over
    /// (N, eta) grids, with log-log slope fits
    Locallaw,
    /// Heisenberg-evolved observables decaying onto the prediction
    Thermalise,
    /// Centered alternating products at growing time separation
    Freeness,
    /// Prints a deterministic prediction with its per-partition terms
    Predict {
        #[command(subcommand)]
        target: PredictTarget,
    },
    /// Inspects the non-crossing combinatorics behind the formulas
    Ncp {
        /// Ground-set size
        #[arg(long)]
        k: usize,

        /// Also enumerate non-crossing graphs and their edge counts
        #[arg(long)]
        graphs: bool,
    },
}

#[derive(Subcommand)]
enum PredictTarget {
    /// Chain of resolvents: <G(z_1) A_1 ... G(z_k) A_k>
    Chain {
        /// Comma-separated spectral parameters, e.g. 0+1i,0+2i
        #[arg(long)]
        z: String,

        /// Comma-separated observable descriptors; a single descriptor
        /// is used for every slot
        #[arg(long, default_value = "identity")]
        obs: String,

        /// Observable dimension for the named generators
        #[arg(long, default_value_t = 8)]
        n: usize,
    },
    /// Phase chain: <e^{i s_1 W} A_1 ... e^{i s_k W} A_k>
    Exp {
        /// Comma-separated phase times, e.g. 10,-5
        #[arg(long)]
        s: String,

        #[arg(long, default_value = "identity")]
        obs: String,

        #[arg(long, default_value_t = 8)]
        n: usize,
    },
    /// General function chain evaluated by quadrature
    F {
        /// Function spec, repeatable: exp(i*T*x) | resolvent(RE,IM) |
        /// poly:c0,c1,... | one | x
        #[arg(long, required = true)]
        f: Vec<String>,

        /// Replicate a single --f spec to a chain of length K
        #[arg(long)]
        k: Option<usize>,

        #[arg(long, default_value = "identity")]
        obs: String,

        #[arg(long, default_value_t = 8)]
        n: usize,
    },
}

/// Entry point for the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version through this path too
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    wiglab_sim::ensure_sequential_backend();
    let mut cfg = match &cli.config {
        Some(path) => config::Config::from_file(path)?,
        None => config::Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(CliError::Config("--workers must be >= 1".into()));
        }
        cfg.run.workers = workers;
    }
    if let Some(out) = cli.out {
        cfg.run.out = out;
    }
    if let Some(format) = cli.format {
        cfg.run.format = format;
    }

    match cli.command {
        Command::Verify { k_max, perturb_q } => {
            experiments::verify::cmd_verify(&cfg, k_max, perturb_q)
        }
        Command::Locallaw => experiments::locallaw::cmd_locallaw(&cfg).map(|_| 0),
        Command::Thermalise => experiments::thermalise::cmd_thermalise(&cfg).map(|_| 0),
        Command::Freeness => experiments::freeness::cmd_freeness(&cfg).map(|_| 0),
        Command::Predict { target } => {
            let doc = match target {
                PredictTarget::Chain { z, obs, n } => {
                    experiments::predict::predict_chain(&z, &obs, n)?
                }
                PredictTarget::Exp { s, obs, n } => experiments::predict::predict_exp(&s, &obs, n)?,
                PredictTarget::F { f, k, obs, n } => {
                    experiments::predict::predict_f(&f, k, &obs, n)?
                }
            };
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
            Ok(0)
        }
        Command::Ncp { k, graphs } => {
            let report = experiments::ncp::inspect(k, graphs)?;
            print!("{report}");
            Ok(0)
        }
    }
}
