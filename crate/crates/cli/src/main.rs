//! `edgepower`: divergences, study planning, regime classification and
//! figure data for partial-correlation detection in Gaussian graphical
//! models.
//!
//! Every command prints a JSON envelope on stdout. Exit status is 0 on
//! success (warnings included), 1 on domain or I/O errors and 2 on usage
//! errors.

mod commands;
mod envelope;
mod matrix_file;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub const THREADS_ENV: &str = "EDGEPOWER_THREADS";

#[derive(Debug, Parser)]
#[command(name = "edgepower", version, about)]
pub struct Cli {
    /// Also report divergences in bits (values are computed in nats).
    #[arg(long, global = true)]
    pub bits: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kullback-Leibler divergence of an alternative model from the null.
    #[command(subcommand)]
    Kld(KldCommand),
    /// Sample sizes and power for detecting one partial correlation.
    #[command(subcommand)]
    Plan(PlanCommand),
    /// Write the data behind the divergence plots.
    #[command(subcommand)]
    Figure(FigureCommand),
    /// Tail regime of the likelihood-ratio summands for a given rho.
    Regime(RegimeArgs),
}

#[derive(Debug, Args)]
pub struct RhoArg {
    /// Nonzero partial-correlation parameter.
    #[arg(long, allow_negative_numbers = true)]
    pub rho: f64,
}

#[derive(Debug, Args)]
pub struct RhoPArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub rho: f64,
    /// Number of variables.
    #[arg(long)]
    pub p: usize,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Draws per parallel work item (does not change results).
    #[arg(long, default_value_t = 1024)]
    pub chunk_size: usize,
}

#[derive(Debug, Subcommand)]
pub enum KldCommand {
    /// Single edge at a known position (exact).
    ExactEdge(RhoArg),
    /// Single edge at an unknown position, large-p approximation.
    MixtureApprox(RhoPArgs),
    /// Two disjoint edges at unknown positions, large-p approximation.
    TwoEdgeApprox(RhoPArgs),
    /// Single covariance entry at an unknown position, large-p approximation.
    CovarianceApprox(RhoPArgs),
    /// Single edge at an unknown position, Monte Carlo.
    MixtureMc {
        #[command(flatten)]
        model: RhoPArgs,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Two zero-mean Gaussians read from matrix files.
    General {
        /// Covariance of the alternative model f1.
        #[arg(long)]
        model_a: std::path::PathBuf,
        /// Covariance of the null model f0.
        #[arg(long)]
        model_b: std::path::PathBuf,
        /// Also run the Monte Carlo oracle.
        #[arg(long)]
        mc: bool,
        #[command(flatten)]
        mc_args: McArgs,
    },
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Alternative partial correlation (one-sided, > 0).
    #[arg(long, allow_negative_numbers = true)]
    pub rho: f64,
    #[arg(long)]
    pub p: u64,
    /// Family-wise significance level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Number of tests for the Bonferroni correction [default: p(p-1)/2].
    #[arg(long)]
    pub m: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum PlanCommand {
    /// Required sample size by the divergence and asymptotic routes.
    Size(PlanArgs),
    /// Asymptotic power at a given sample size.
    Power {
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long)]
        n: u64,
        /// Use sqrt(2 log(m/alpha)) instead of the exact quantile.
        #[arg(long)]
        approx_quantile: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum FigureCommand {
    /// Monte Carlo vs approximate divergence across p (CSV plus JSON sidecar).
    #[command(name = "1")]
    One {
        #[arg(long, allow_negative_numbers = true)]
        rho: f64,
        /// Comma-separated dimensions.
        #[arg(long, value_delimiter = ',', default_value = "10,30,100,300")]
        p_grid: Vec<usize>,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// The three per-observation divergences against rho^2 at fixed p.
    #[command(name = "2")]
    Two {
        #[arg(long, default_value_t = 100)]
        p: usize,
        /// Comma-separated rho^2 values [default: 0,0.05,...,0.45].
        #[arg(long, value_delimiter = ',')]
        rho2_grid: Option<Vec<f64>>,
        #[arg(long)]
        out: std::path::PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct RegimeArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub rho: f64,
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match commands::run(&cli) {
        Ok(envelope) => match serde_json::to_string_pretty(&envelope) {
            Ok(s) => {
                println!("{s}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
