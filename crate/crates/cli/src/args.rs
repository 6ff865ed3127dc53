use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "binsplit",
    version,
    about = "Exact laws, asymptotics and simulations of the binomial splitting process",
    long_about = "Exact laws, asymptotics and simulations of the binomial splitting process.\n\n\
                  Probabilities are given as fractions a/b. Exit codes: 0 ok, 2 usage, \
                  3 resource ceiling, 4 numeric failure, 5 goodness-of-fit failure."
)]
pub struct Cli {
    #[command(flatten)]
    pub output: OutputArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,

    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact laws as rationals.
    ///
    /// CSV columns: n,k,probability.
    Exact(ExactArgs),
    /// Asymptotic mean, variance, PMF or CDF next to the exact values.
    ///
    /// CSV columns for mean/var: n,u,exact,asymptotic,residual,constant.
    /// CSV columns for pmf/cdf: n,k,offset,exact,asymptotic,residual.
    /// `u` is log_{1/p} n, `offset` is k - floor(u). Empty cells mean n is
    /// outside the exact oracle range.
    Asympt(AsymptArgs),
    /// Data for the two fluctuation plots.
    ///
    /// CSV columns: n,u,approximation,fourier.
    Figure(FigureArgs),
    /// Monte Carlo histogram of one of the equivalent models, with a fit
    /// against its exact law.
    ///
    /// CSV columns: value,count,frequency,exact.
    Simulate(SimulateArgs),
    /// Run the cross-check suite; exit 0 iff every check passes.
    ///
    /// CSV columns: check,p,status,detail.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    X,
    Y,
    Z,
    W,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    /// Probability p as a/b (ignored for model Y, which uses 1/(m+1)).
    #[arg(long, default_value = "1/2")]
    pub p: String,

    #[arg(long, value_enum, default_value_t = ModelArg::X, ignore_case = true)]
    pub model: ModelArg,

    /// Parking dimension parameter for model Y.
    #[arg(long, default_value_t = 1)]
    pub m: u64,

    /// A single n or an inclusive range lo..hi.
    #[arg(long)]
    pub n: String,

    /// Largest n served by exact arithmetic.
    #[arg(long, default_value_t = binsplit::exact::DEFAULT_EXACT_CEILING)]
    pub ceiling: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Mean,
    Var,
    Pmf,
    Cdf,
}

#[derive(Debug, Args)]
pub struct AsymptArgs {
    #[arg(long, default_value = "1/2")]
    pub p: String,

    #[arg(long, value_enum)]
    pub quantity: Quantity,

    /// A single n or an inclusive range lo..hi.
    #[arg(long)]
    pub n: String,

    /// Fourier harmonics K kept in Q and Q_V.
    #[arg(long, short = 'K', default_value_t = binsplit::asymptotics::DEFAULT_HARMONICS)]
    pub harmonics: i64,

    /// Offsets -J..=J around floor(log_{1/p} n) for pmf and cdf.
    #[arg(long, short = 'J', default_value_t = 12)]
    pub window: i64,

    /// Largest n for which exact values are computed alongside.
    #[arg(long, default_value_t = 8192)]
    pub oracle_max: usize,

    /// Cap on terms of the moment series.
    #[arg(long, default_value_t = binsplit::asymptotics::DEFAULT_SERIES_CAP)]
    pub series_cap: usize,

    /// Quadrature tolerance for the variance coefficient cross-check.
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Fig3,
    Fig4,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub which: Which,

    #[arg(long, default_value = "1/3")]
    pub p: String,

    /// Inclusive range lo..hi of n.
    #[arg(long, default_value = "81..2187")]
    pub n: String,

    /// Harmonics on the Fourier side (default 5 for fig3, 4 for fig4).
    #[arg(long)]
    pub harmonics: Option<i64>,

    /// Harmonics of the reference series used for the truncation bound.
    #[arg(long, default_value_t = binsplit::asymptotics::DEFAULT_HARMONICS)]
    pub reference_harmonics: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimModel {
    /// Corner-preference parking, simulated car by car.
    Parking,
    /// Parking through the splitting recursion.
    ParkingSplit,
    /// Depth of a random key in a PATRICIA trie.
    Patricia,
    /// Left arm of a PATRICIA trie.
    PatriciaArm,
    /// Distinct values among n geometric variables.
    Geometric,
    /// Occupied urns.
    Urn,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: SimModel,

    /// Bit probability p as a/b (parking uses 1/(m+1)).
    #[arg(long, default_value = "1/2")]
    pub p: String,

    #[arg(long)]
    pub n: usize,

    #[arg(long, default_value_t = 1)]
    pub m: u64,

    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,

    #[arg(long, env = "BINSPLIT_SEED", default_value_t = 1)]
    pub seed: u64,

    /// Exit with code 5 if the chi-square test rejects at `alpha`.
    #[arg(long)]
    pub assert_fit: bool,

    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Negate Q_1 while leaving Q_{-1} alone.
    Q1Sign,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Comma-separated list of p values.
    #[arg(long, default_value = "1/2,1/3,1/4", value_delimiter = ',')]
    pub p: Vec<String>,

    /// Largest n for the exact rational checks.
    #[arg(long, default_value_t = 30)]
    pub n_cap: usize,

    /// Trials per simulation check.
    #[arg(long, default_value_t = 20_000)]
    pub trials: u64,

    #[arg(long, env = "BINSPLIT_SEED", default_value_t = 1)]
    pub seed: u64,

    /// Family-wise level; each simulation check splits it across its tests.
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,

    /// Deliberately corrupt one quantity to exercise the harness.
    #[arg(long, value_enum)]
    pub inject_fault: Option<Fault>,
}

/// Parses `N` or `lo..hi` (also `lo..=hi`), inclusive.
pub fn parse_range(text: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::Usage(format!("expected n or lo..hi, got {text:?}"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let n = num(text)?;
            (n, n)
        }
    };
    if lo > hi {
        return Err(CliError::Usage(format!("range {lo}..{hi} is out of order")));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("7").unwrap(), (7, 7));
        assert_eq!(parse_range("2..9").unwrap(), (2, 9));
        assert_eq!(parse_range("2..=9").unwrap(), (2, 9));
        assert!(parse_range("9..2").is_err());
        assert!(parse_range("x").is_err());
        assert!(parse_range("1..").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
