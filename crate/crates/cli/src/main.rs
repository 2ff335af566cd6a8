use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use qmemory::davies::Coupling;
use qmemory_cli::config::{parse_model_kind, set_path};
use qmemory_cli::{execute, CliError, Method, Purpose, RunConfig};
use serde_json::{json, Value};

/// Thermal quantum-memory experiments: structural checks, Gibbs tables,
/// autocorrelations and lifetime scans.
///
/// Exit status: 0 when every check passes, 1 on a failed check or runtime
/// error, 2 on a usage or configuration error.
#[derive(Parser, Debug)]
#[command(name = "qmemory", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stationarity, detailed balance, ergodicity, locality, factorization
    /// and the exact-diagonalization cross-check.
    Check(Overrides),
    /// Ground and Gibbs expectation tables.
    Gibbs(Overrides),
    /// Autocorrelation curve of the encoded logical.
    Autocorr(Overrides),
    /// Lifetime as a function of lattice size.
    LifetimeScan(Overrides),
}

fn parse_method(s: &str) -> Result<Method, String> {
    serde_json::from_value(json!(s)).map_err(|_| format!("unknown method {s:?}; expected exact-full, exact-reduced, kmc or auto"))
}

/// Flags override fields of the JSON config; without `--config` the model
/// and `beta` must be given here.
#[derive(Args, Debug, Default)]
struct Overrides {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// ising or kitaev.
    #[arg(long, value_parser = parse_model_kind)]
    model: Option<qmemory::model::ModelKind>,
    /// Ring length N or torus edge length K.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    /// Rate for positive Bohr frequencies.
    #[arg(long)]
    gamma: Option<f64>,
    /// Rate at zero frequency.
    #[arg(long)]
    gamma_zero: Option<f64>,
    /// x-only, z-only or both.
    #[arg(long)]
    coupling: Option<Coupling>,
    #[arg(long)]
    logical: Option<String>,
    /// Stabilizer indices whose product dresses the logical.
    #[arg(long, value_delimiter = ',')]
    dressing: Option<Vec<usize>>,
    /// Explicit time points.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    times: Option<Vec<f64>>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    per_decade: Option<usize>,
    /// exact-full, exact-reduced, kmc, or auto (lifetime-scan only).
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    #[arg(long)]
    n_traj: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Lattice sizes for lifetime-scan.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    max_exact_bits: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn document(&self) -> anyhow::Result<Value> {
        let mut doc = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("{} is not valid JSON", path.display()))?
            }
            None => json!({}),
        };
        let mut set = |path: &str, v: Option<Value>| {
            if let Some(v) = v {
                set_path(&mut doc, path, v);
            }
        };
        set("model.kind", self.model.map(|m| json!(m)));
        set("model.size", self.size.map(|v| json!(v)));
        set("beta", self.beta.map(|v| json!(v)));
        set("bath.gamma", self.gamma.map(|v| json!(v)));
        set("bath.gamma_zero", self.gamma_zero.map(|v| json!(v)));
        set("coupling", self.coupling.map(|v| json!(v)));
        set("logical", self.logical.as_ref().map(|v| json!(v)));
        set("dressing", self.dressing.as_ref().map(|v| json!(v)));
        set("times.points", self.times.as_ref().map(|v| json!(v)));
        set("times.t_min", self.t_min.map(|v| json!(v)));
        set("times.t_max", self.t_max.map(|v| json!(v)));
        set("times.per_decade", self.per_decade.map(|v| json!(v)));
        set("method", self.method.map(|v| json!(v)));
        set("n_traj", self.n_traj.map(|v| json!(v)));
        set("seed", self.seed.map(|v| json!(v)));
        set("threads", self.threads.map(|v| json!(v)));
        set("sizes", self.sizes.as_ref().map(|v| json!(v)));
        set("max_exact_bits", self.max_exact_bits.map(|v| json!(v)));
        set("output_dir", self.out.as_ref().map(|v| json!(v)));
        Ok(doc)
    }
}

fn run(purpose: Purpose, overrides: &Overrides) -> Result<bool, (u8, anyhow::Error)> {
    let doc = overrides.document().map_err(|e| (2, e))?;
    let cfg = RunConfig::from_value(doc).map_err(|e| (e.exit_code(), e.into()))?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| (1, anyhow::Error::new(e).context("cannot configure the thread pool")))?;
    }
    let outcome = execute(purpose, cfg).map_err(|e: CliError| (e.exit_code(), e.into()))?;
    println!("{}", outcome.summary);
    println!("manifest: {}", outcome.manifest.display());
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (purpose, overrides) = match &cli.command {
        Command::Check(o) => (Purpose::Check, o),
        Command::Gibbs(o) => (Purpose::Gibbs, o),
        Command::Autocorr(o) => (Purpose::Autocorr, o),
        Command::LifetimeScan(o) => (Purpose::LifetimeScan, o),
    };
    match run(purpose, overrides) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: one or more checks failed");
            ExitCode::from(1)
        }
        Err((code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
