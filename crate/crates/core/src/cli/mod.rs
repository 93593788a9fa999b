//! The `wkrylov` experiment harness.
//!
//! Every subcommand reads the same global flags, merged over an optional
//! TOML config file (`--config`), into an [`ExperimentConfig`] that is
//! validated before any work starts. Exit codes: 0 on success, 1 for usage or
//! configuration errors, 2 when a run fails.

mod commands;
mod config;
pub mod experiment;

pub use config::{ExperimentConfig, Method, RuleKind, SWEEP_EPSILONS};

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::problems::ProblemKind;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(#[source] Error),
    #[error(transparent)]
    Runtime(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Parser)]
#[command(
    name = "wkrylov",
    version,
    about = "Weighted LSQR regularization experiments on first-kind integral equations"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// Test problem(s), comma separated: shaw, phillips, expst, green.
    #[arg(long, global = true, value_delimiter = ',')]
    pub problem: Vec<ProblemKind>,
    /// Number of observation points.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Number of quadrature nodes (odd).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Noise level(s) ||e|| / ||b_exact||, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub epsilon: Vec<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub seed: Vec<u64>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub rule: Vec<RuleKind>,
    /// Discrepancy principle safety factor.
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub method: Vec<Method>,
    /// Full reorthogonalization in the bidiagonalization.
    #[arg(long, global = true)]
    pub reorth: Option<Toggle>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Concurrent sweep cells.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Use h = (t2 - t1) / n in the Simpson weights instead of the node spacing.
    #[arg(long, global = true)]
    pub paper_h: bool,
    /// Problem directory written by `gen`, used instead of generating one.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// TOML experiment config; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a problem directory (matrix, weights, solution, data, meta).
    Gen,
    /// One run: per-iteration CSV and a summary row.
    Solve,
    /// Every (problem, epsilon, seed, method, rule) combination.
    Sweep,
    /// L-curve points and the selected corner.
    Lcurve {
        /// Read `k,res_norm,sol_mnorm` rows from a CSV instead of running.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Dense weighted SVD of a (small) problem.
    Wsvd,
    /// Approximate weighted singular triplets from the bidiagonalization.
    Triplets {
        #[arg(long, default_value_t = 30)]
        steps: usize,
        #[arg(long, default_value_t = 5)]
        count: usize,
        /// Convergence threshold on the residual bound (default 1e-8 times
        /// the largest approximation).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Print the resolved configuration as TOML.
    Config,
}

impl Command {
    fn is_sweep(&self) -> bool {
        matches!(self, Command::Sweep)
    }
}

/// Merges the config file (if any) and the flags over the defaults.
pub fn resolve(global: &GlobalArgs, command: &Command) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &global.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(e.into()))?;
            ExperimentConfig::from_toml(&text).map_err(CliError::Config)?
        }
        None => {
            let mut c = ExperimentConfig::default();
            if command.is_sweep() {
                c.epsilons = SWEEP_EPSILONS.to_vec();
                c.rules = vec![RuleKind::Oracle, RuleKind::Dp, RuleKind::Lc];
                c.methods = vec![Method::Wlsqr, Method::Lsqr];
            }
            c
        }
    };
    if !global.problem.is_empty() {
        cfg.problems = global.problem.clone();
    }
    if !global.epsilon.is_empty() {
        cfg.epsilons = global.epsilon.clone();
    }
    if !global.seed.is_empty() {
        cfg.seeds = global.seed.clone();
    }
    if !global.rule.is_empty() {
        cfg.rules = global.rule.clone();
    }
    if !global.method.is_empty() {
        cfg.methods = global.method.clone();
    }
    cfg.m = global.m.or(cfg.m);
    cfg.n = global.n.or(cfg.n);
    cfg.tau = global.tau.unwrap_or(cfg.tau);
    cfg.max_iter = global.max_iter.unwrap_or(cfg.max_iter);
    if let Some(t) = global.reorth {
        cfg.reorth = t == Toggle::On;
    }
    cfg.paper_h |= global.paper_h;
    cfg.jobs = global.jobs.or(cfg.jobs);
    cfg.input = global.input.clone().or(cfg.input);
    cfg.out = global.out.clone().or(cfg.out);
    cfg.validate().map_err(CliError::Config)?;
    Ok(cfg)
}

/// Runs a parsed command, writing primary output to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve(&cli.global, &cli.command)?;
    log::debug!("resolved config:\n{}", cfg.to_toml().unwrap_or_default());
    match &cli.command {
        Command::Gen => commands::gen(&cfg, out),
        Command::Solve => commands::solve(&cfg, out),
        Command::Sweep => commands::sweep(&cfg, out),
        Command::Lcurve { history } => commands::lcurve(&cfg, history.as_deref(), out),
        Command::Wsvd => commands::wsvd(&cfg, out),
        Command::Triplets { steps, count, tol } => {
            commands::triplets(&cfg, *steps, *count, *tol, out)
        }
        Command::Config => {
            out.write_all(cfg.to_toml()?.as_bytes())
                .map_err(Error::from)?;
            Ok(())
        }
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
