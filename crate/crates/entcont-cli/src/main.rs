use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use entcont::entropies::{bs_entropy, umegaki};
use entcont::linops::DimensionProfile;
use entcont::statekit::{sample_state, RngStream};
use entcont_cli::config::{expand_tolerance_flags, ConfigBuilder};
use entcont_cli::{experiments, exit, stateio, CliError};

#[derive(Parser)]
#[command(name = "entcont", version, about = "Continuity-bound experiments on finite-dimensional quantum states")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

/// Flags for running an experiment; each overrides the config file.
#[derive(Args, Default)]
struct RunArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// fig-divergence-cloud, fig-divergence-heatmap, fig-bs-remainder, fig-variational-violation or verify-suite.
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Local dimensions, e.g. `2,2`.
    #[arg(long)]
    dims: Option<String>,
    #[arg(long)]
    min_eig_lo: Option<String>,
    #[arg(long)]
    min_eig_hi: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Heatmap grid points per axis.
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated check names for verify-suite.
    #[arg(long)]
    checks: Option<String>,
    #[arg(long)]
    mutation: Option<String>,
    /// Tolerance override `NAME=VALUE`; also accepted as `--tol-NAME VALUE`.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one random state and write it as JSON.
    SampleState {
        #[arg(long, default_value = "2")]
        dims: String,
        #[arg(long, default_value_t = 0.0)]
        min_eig: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        index: u64,
        /// Output file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a divergence between two JSON states.
    Divergence {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Umegaki)]
        kind: Kind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Umegaki,
    Bs,
}

fn main() -> ExitCode {
    let args = expand_tolerance_flags(std::env::args());
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::BAD_CONFIG } else { exit::SUCCESS };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match cli.command {
        Some(Command::SampleState { dims, min_eig, seed, index, out }) => sample(&dims, min_eig, seed, index, out),
        Some(Command::Divergence { rho, sigma, kind }) => divergence(&rho, &sigma, kind),
        None => run_experiment(&cli.run),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn builder(args: &RunArgs) -> Result<ConfigBuilder, CliError> {
    let mut b = ConfigBuilder::new();
    if let Some(path) = &args.config {
        b.load_file(path)?;
    }
    let flags = [
        ("experiment", &args.experiment),
        ("samples", &args.samples),
        ("seed", &args.seed),
        ("dims", &args.dims),
        ("min_eig_lo", &args.min_eig_lo),
        ("min_eig_hi", &args.min_eig_hi),
        ("out", &args.out),
        ("grid", &args.grid),
        ("checks", &args.checks),
        ("mutation", &args.mutation),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            b.set(key, v)?;
        }
    }
    for t in &args.tol {
        let (name, v) = t
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("tolerance '{t}' must look like NAME=VALUE")))?;
        b.set(&format!("tol.{name}"), v)?;
    }
    Ok(b)
}

fn run_experiment(args: &RunArgs) -> Result<i32, CliError> {
    let cfg = builder(args)?.build()?;
    let res = experiments::run(&cfg)?;
    let m = &res.manifest;
    println!("{}: wrote {} and {}", m.experiment, res.csv_path.display(), res.manifest_path.display());
    for c in &m.checks {
        let status = if c.failed > 0 { "FAIL" } else { "ok" };
        println!("  {status:4} {} ({}/{} passed, {} skipped)", c.name, c.passed, c.total, c.skipped);
        for f in &c.failures {
            println!("       #{} [{} seed {}]: {}", f.index, f.stream, f.seed, f.detail);
        }
    }
    for (k, v) in &m.statistics {
        println!("  {k} = {v}");
    }
    if m.vacuous {
        println!("  no checks selected (vacuous run)");
    }
    Ok(m.exit_code)
}

fn sample(dims: &str, min_eig: f64, seed: u64, index: u64, out: Option<PathBuf>) -> Result<i32, CliError> {
    let locals: Vec<usize> = dims
        .split([',', 'x'])
        .map(|s| s.trim().parse().map_err(|_| CliError::Config(format!("invalid dims '{dims}'"))))
        .collect::<Result<_, _>>()?;
    let profile = DimensionProfile::new(&locals).map_err(|e| CliError::Config(e.to_string()))?;
    let stream = RngStream::new(seed, "sample-state");
    let mut rng = stream.rng(index);
    let rho = sample_state(profile.total(), min_eig, &mut rng)
        .map_err(|e| CliError::Config(e.to_string()))?
        .with_profile(profile)?;
    match out {
        Some(path) => stateio::write_state(&path, &rho)?,
        None => println!("{}", stateio::to_json(&rho)),
    }
    Ok(exit::SUCCESS)
}

fn divergence(rho: &PathBuf, sigma: &PathBuf, kind: Kind) -> Result<i32, CliError> {
    let rho = stateio::read_state(rho)?;
    let sigma = stateio::read_state(sigma)?;
    if rho.dim() != sigma.dim() {
        return Err(CliError::Format(format!("dimension mismatch: {} vs {}", rho.dim(), sigma.dim())));
    }
    let (name, value) = match kind {
        Kind::Umegaki => ("umegaki", umegaki(&rho, &sigma)),
        Kind::Bs => ("bs", bs_entropy(&rho, &sigma)),
    };
    let report = serde_json::json!({
        "kind": name,
        "finite": value.is_finite(),
        "value": if value.is_finite() { serde_json::json!(value.to_f64()) } else { serde_json::json!("inf") },
        "trace_distance": rho.trace_distance(&sigma)?,
        "min_eig_sigma": sigma.min_eig(),
    });
    println!("{report}");
    Ok(exit::SUCCESS)
}
