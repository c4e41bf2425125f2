//! The `diamond` command line: `build`, `run`, `plot` and `config`.
//!
//! Configuration is layered: defaults, then the `--config` file, then
//! `--set key=value` flags, then the named flags. Every output carries the
//! config hash and seed; wall-clock times only go to `*.run.json` sidecars.

pub mod cache;
pub mod output;
pub mod plot;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use diamond_experiments::{ExperimentError, RunConfig};
use sha2::{Digest, Sha256};

#[derive(Debug, Parser)]
#[command(name = "diamond", version, about = "Build the diamond complex and run its verification experiments")]
pub struct Cli {
    #[command(flatten)]
    pub opts: Options,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Key-value configuration file (`key = value` per line, `#` comments).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Worker threads for sampling and solves (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for reports and plots.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Directory for cached complexes.
    #[arg(long, global = true, default_value = ".diamond-cache")]
    pub cache_dir: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub n0: Option<u64>,
    #[arg(long, global = true)]
    pub levels: Option<u32>,
    /// `true` for the toy schedule, `false` for the full one.
    #[arg(long, global = true)]
    pub toy: Option<bool>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Build the configured complex into the cache (no-op on a cache hit).
    Build,
    /// Run one experiment, or `all`.
    Run { experiment: String },
    /// Render SVG plots of a JSON report.
    Plot { report: PathBuf },
    /// Print the resolved configuration and its hash.
    Config,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("resource guard: {0}")]
    Resource(String),
    #[error("{0}")]
    Failed(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) | CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Usage(m) => CliError::Usage(m),
            ExperimentError::Resource(m) => CliError::Resource(m),
            ExperimentError::Numerical(m) => CliError::Failed(format!("numerical failure: {m}")),
        }
    }
}

/// Hex SHA-256 of the canonical configuration text.
pub fn config_hash(cfg: &RunConfig) -> String {
    format!("{:x}", Sha256::digest(cfg.to_text().as_bytes()))
}

pub fn resolve_config(opts: &Options) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &opts.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    for kv in &opts.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Usage(format!("`--set {kv}`: expected KEY=VALUE")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    let named: [(&str, Option<String>); 7] = [
        ("seed", opts.seed.map(|v| v.to_string())),
        ("n0", opts.n0.map(|v| v.to_string())),
        ("levels", opts.levels.map(|v| v.to_string())),
        ("toy", opts.toy.map(|v| v.to_string())),
        ("trials", opts.trials.map(|v| v.to_string())),
        ("samples", opts.samples.map(|v| v.to_string())),
        ("eps", opts.eps.map(|v| v.to_string())),
    ];
    for (k, v) in named {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
    }
    Ok(cfg)
}

fn init_threads(threads: Option<usize>) -> Result<(), CliError> {
    match threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        // a second call in the same process keeps the first pool
        Some(n) => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Ok(())
        }
        None => Ok(()),
    }
}

/// Run a parsed command; the result is the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("diamond: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    let cfg = resolve_config(&cli.opts)?;
    init_threads(cli.opts.threads)?;
    let hash = config_hash(&cfg);
    match &cli.command {
        Command::Config => {
            print!("# config_hash = {hash}\n{}", cfg.to_text());
            Ok(0)
        }
        Command::Build => {
            let (path, hit) = cache::build_cached(&cfg, &cli.opts.cache_dir)?;
            println!("{} {}", if hit { "cache hit" } else { "built" }, path.display());
            Ok(0)
        }
        Command::Run { experiment } => {
            let pass = output::run(experiment, &cfg, &hash, &cli.opts.out)?;
            Ok(if pass { 0 } else { 1 })
        }
        Command::Plot { report } => {
            for path in plot::plot_file(report, &cli.opts.out)? {
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
    }
}
