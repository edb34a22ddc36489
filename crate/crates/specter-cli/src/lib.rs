//! Flag surface for the `specter` binary. Each subcommand collapses into a
//! [`config::RunConfig`], the same structure a batch file deserializes to,
//! so both paths execute identically.

pub mod app;
pub mod config;
pub mod mtx;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "specter",
    version,
    about = "Pseudospectra, generalized singular values, and transient growth for dense pencils"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample the pseudospectrum indicator on a rectangular grid
    Psgrid(PsgridArgs),
    /// Eigenvalues of randomly perturbed pencils
    Scatter(ScatterArgs),
    /// Distance to instability across the imaginary axis
    Stabradius(StabradiusArgs),
    /// B-singular value pairs of a matrix pair (A, B)
    Gsvd(GsvdArgs),
    /// Numerical range boundary in the M inner product
    Numrange(NumrangeArgs),
    /// Maximum transient energy growth over time
    Growth(GrowthArgs),
    /// Write a built-in test problem as Matrix Market files
    Gen(GenArgs),
    /// Execute a JSON array of run configurations in order
    Batch(BatchArgs),
}

#[derive(Args)]
struct PsgridArgs {
    /// Matrix Market file for A
    #[arg(long)]
    a: String,
    /// Matrix Market file for M (Hermitian positive definite)
    #[arg(long)]
    m: Option<String>,
    /// standard, generalized, or weighted
    #[arg(long)]
    mode: Option<String>,
    /// Bounding box re0,re1,im0,im1
    #[arg(long, allow_hyphen_values = true)]
    region: String,
    /// Grid points along the real axis
    #[arg(long)]
    nx: usize,
    /// Grid points along the imaginary axis
    #[arg(long)]
    ny: usize,
    /// Output file
    #[arg(long)]
    out: String,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct ScatterArgs {
    /// Matrix Market file for A
    #[arg(long)]
    a: String,
    /// Matrix Market file for M (Hermitian positive definite)
    #[arg(long)]
    m: Option<String>,
    /// standard, generalized, or weighted
    #[arg(long)]
    mode: Option<String>,
    /// Perturbation size
    #[arg(long)]
    eps: f64,
    /// Number of random perturbations
    #[arg(long)]
    npert: usize,
    /// Random seed (default 0)
    #[arg(long)]
    seed: Option<u64>,
    /// full, rank1, or residual (default full)
    #[arg(long)]
    strategy: Option<String>,
    /// Output file; csv output adds a .meta.json sidecar
    #[arg(long)]
    out: String,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct StabradiusArgs {
    /// Matrix Market file for A
    #[arg(long)]
    a: String,
    /// Matrix Market file for M (Hermitian positive definite)
    #[arg(long)]
    m: Option<String>,
    /// standard, generalized, or weighted
    #[arg(long)]
    mode: Option<String>,
    /// Output file
    #[arg(long)]
    out: String,
    /// json (default) or csv
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct GsvdArgs {
    /// Matrix Market file for A
    #[arg(long)]
    a: String,
    /// Matrix Market file for B
    #[arg(long)]
    b: String,
    /// Output file
    #[arg(long)]
    out: String,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct NumrangeArgs {
    /// Matrix Market file for A
    #[arg(long)]
    a: String,
    /// Matrix Market file for M (Hermitian positive definite)
    #[arg(long)]
    m: Option<String>,
    /// Number of boundary angles (at least 3)
    #[arg(long)]
    ntheta: usize,
    /// Output file
    #[arg(long)]
    out: String,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct GrowthArgs {
    /// Matrix Market file for A
    #[arg(long)]
    a: String,
    /// Matrix Market file for M (Hermitian positive definite)
    #[arg(long)]
    m: Option<String>,
    /// t0:t1:k for k equispaced points, or a comma list
    #[arg(long, allow_hyphen_values = true)]
    times: String,
    /// eig, gsvd, or oracle (default eig)
    #[arg(long)]
    route: Option<String>,
    /// Output file
    #[arg(long)]
    out: String,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct GenArgs {
    /// jordan, normal, or fem
    #[arg(long)]
    problem: String,
    /// Size for jordan and fem
    #[arg(long)]
    n: Option<usize>,
    /// Jordan eigenvalue, re or re,im
    #[arg(long, allow_hyphen_values = true)]
    lam: Option<String>,
    /// Spectrum for normal: re,im pairs separated by semicolons
    #[arg(long, allow_hyphen_values = true)]
    lambdas: Option<String>,
    /// Seed for normal (default 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Advection speed for fem
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    /// Diffusion coefficient for fem (positive)
    #[arg(long)]
    nu: Option<f64>,
    /// Output file for A
    #[arg(long)]
    out: String,
    /// Output file for M (fem only)
    #[arg(long = "out-m")]
    out_m: Option<String>,
}

#[derive(Args)]
struct BatchArgs {
    /// JSON file holding an array of run configurations
    #[arg(long)]
    config: String,
}

impl Cmd {
    fn into_config(self) -> Option<RunConfig> {
        let cfg = match self {
            Cmd::Psgrid(x) => RunConfig {
                subcommand: "psgrid".to_string(),
                a: Some(x.a),
                m: x.m,
                mode: x.mode,
                region: Some(x.region),
                nx: Some(x.nx),
                ny: Some(x.ny),
                out: Some(x.out),
                format: x.format,
                ..RunConfig::default()
            },
            Cmd::Scatter(x) => RunConfig {
                subcommand: "scatter".to_string(),
                a: Some(x.a),
                m: x.m,
                mode: x.mode,
                eps: Some(x.eps),
                npert: Some(x.npert),
                seed: x.seed,
                strategy: x.strategy,
                out: Some(x.out),
                format: x.format,
                ..RunConfig::default()
            },
            Cmd::Stabradius(x) => RunConfig {
                subcommand: "stabradius".to_string(),
                a: Some(x.a),
                m: x.m,
                mode: x.mode,
                out: Some(x.out),
                format: x.format,
                ..RunConfig::default()
            },
            Cmd::Gsvd(x) => RunConfig {
                subcommand: "gsvd".to_string(),
                a: Some(x.a),
                b: Some(x.b),
                out: Some(x.out),
                format: x.format,
                ..RunConfig::default()
            },
            Cmd::Numrange(x) => RunConfig {
                subcommand: "numrange".to_string(),
                a: Some(x.a),
                m: x.m,
                ntheta: Some(x.ntheta),
                out: Some(x.out),
                format: x.format,
                ..RunConfig::default()
            },
            Cmd::Growth(x) => RunConfig {
                subcommand: "growth".to_string(),
                a: Some(x.a),
                m: x.m,
                times: Some(x.times),
                route: x.route,
                out: Some(x.out),
                format: x.format,
                ..RunConfig::default()
            },
            Cmd::Gen(x) => RunConfig {
                subcommand: "gen".to_string(),
                problem: Some(x.problem),
                n: x.n,
                lam: x.lam,
                lambdas: x.lambdas,
                seed: x.seed,
                c: x.c,
                nu: x.nu,
                out: Some(x.out),
                out_m: x.out_m,
                ..RunConfig::default()
            },
            Cmd::Batch(_) => return None,
        };
        Some(cfg)
    }
}

fn run_batch(path: &str) -> Result<(), app::CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| app::CliError::Input(format!("{path}: {e}")))?;
    let configs: Vec<RunConfig> = serde_json::from_str(&text)
        .map_err(|e| app::CliError::Input(format!("{path}: {e}")))?;
    for cfg in &configs {
        app::run(cfg)?;
    }
    Ok(())
}

/// Parse the process arguments, execute, and return the exit status.
pub fn run_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.cmd {
        Cmd::Batch(b) => run_batch(&b.config),
        other => app::run(&other.into_config().expect("not batch")),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("specter: {e}");
            e.exit_code()
        }
    }
}
