//! Command-line grammar and its validated form.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mtcircle::gfield::{is_prime, PrimeContext};
use mtcircle::ssgraph::PolyBudget;
use mtcircle::theorems::VerifyOptions;
use mtcircle::Result;

#[derive(Debug, Parser)]
#[command(
    name = "mtcircle",
    version,
    about = "Supersingular L-matrices, Eisenstein filtrations and the invariant alpha over Z/ell^s"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Write results to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Cache directory; caching is off when neither this nor the variable is set.
    #[arg(long, env = "MTCIRCLE_CACHE_DIR", global = true)]
    pub cache_dir: Option<PathBuf>,

    /// Total degree budget for Hecke polynomial monomials.
    #[arg(long, default_value_t = 6, global = true,
          value_parser = clap::value_parser!(u64).range(1..=12))]
    pub degree: u64,

    /// Largest q with T_q - (q + 1) among the ideal generators [default: max(20, (p + 1)/6)].
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(2..=10_000))]
    pub prime_bound: Option<u64>,

    /// Largest vertex count for exhaustive spanning-tree enumeration.
    #[arg(long, default_value_t = 8, global = true,
          value_parser = clap::value_parser!(u64).range(1..=9))]
    pub tree_cap: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TheoremArg {
    Main,
    Alpha2,
    Alpha3,
    Tree,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct ContextArgs {
    #[arg(short = 'p')]
    pub p: u64,

    /// Defaults to the smallest prime ell >= 5 dividing p - 1.
    #[arg(long)]
    pub ell: Option<u64>,

    #[arg(short = 's', default_value_t = 1)]
    pub s: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Supersingular j-invariants and their weights.
    Supersingular(ContextArgs),
    /// The L-matrix over Z/ell^t.
    Lmatrix(ContextArgs),
    /// The Brandt matrix B_q.
    Brandt {
        #[command(flatten)]
        ctx: ContextArgs,
        #[arg(long)]
        q: u64,
    },
    /// Ranks of the Manin-symbol homology and its distinguished submodules.
    Homology(ContextArgs),
    /// The invariant alpha(p, ell, s).
    Alpha(ContextArgs),
    /// The Merel sum and its agreement with I^2 H_+ = I^3 H_+.
    Merel(ContextArgs),
    /// Machine-check one identity, or all that apply.
    Verify {
        #[command(flatten)]
        ctx: ContextArgs,
        #[arg(long, value_enum)]
        theorem: TheoremArg,
    },
    /// Every applicable identity over the fixed test battery.
    Battery,
}

/// A fully validated invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub task: Task,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub opts: VerifyOptions,
}

#[derive(Debug, Clone)]
pub enum Task {
    Supersingular(PrimeContext),
    Lmatrix(PrimeContext),
    Brandt(PrimeContext, u64),
    Homology(PrimeContext),
    Alpha(PrimeContext),
    Merel(PrimeContext),
    Verify(PrimeContext, TheoremArg),
    Battery,
}

fn default_ell(p: u64) -> Option<u64> {
    (5..p).find(|&l| (p - 1) % l == 0 && is_prime(l))
}

impl ContextArgs {
    pub fn context(&self) -> Result<PrimeContext> {
        let ell = match self.ell {
            Some(l) => l,
            None => default_ell(self.p).ok_or_else(|| {
                mtcircle::Error::InvalidContext(format!(
                    "no prime ell >= 5 divides p - 1 for p = {}",
                    self.p
                ))
            })?,
        };
        PrimeContext::new(self.p, ell, self.s)
    }
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig> {
        let task = match &self.command {
            Command::Supersingular(c) => Task::Supersingular(c.context()?),
            Command::Lmatrix(c) => Task::Lmatrix(c.context()?),
            Command::Brandt { ctx, q } => Task::Brandt(ctx.context()?, *q),
            Command::Homology(c) => Task::Homology(c.context()?),
            Command::Alpha(c) => Task::Alpha(c.context()?),
            Command::Merel(c) => Task::Merel(c.context()?),
            Command::Verify { ctx, theorem } => Task::Verify(ctx.context()?, *theorem),
            Command::Battery => Task::Battery,
        };
        let opts = VerifyOptions {
            budget: PolyBudget {
                max_degree: self.degree as usize,
                ..PolyBudget::default()
            },
            prime_bound: self.prime_bound,
            tree_cap: self.tree_cap as usize,
        };
        Ok(RunConfig {
            task,
            format: self.format,
            output: self.output,
            cache_dir: self.cache_dir,
            opts,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_ell_is_smallest_admissible_prime() {
        assert_eq!(default_ell(181), Some(5));
        assert_eq!(default_ell(29), Some(7));
        assert_eq!(default_ell(13), None);
    }

    #[test]
    fn flags_parse_after_subcommand() {
        let argv = ["mtcircle", "verify", "--theorem", "tree", "-p", "61", "--ell", "5", "-s", "1", "--format", "csv"];
        let cli = Cli::try_parse_from(argv).unwrap();
        assert_eq!(cli.format, Format::Csv);
        let cfg = cli.into_config().unwrap();
        assert!(matches!(cfg.task, Task::Verify(c, TheoremArg::Tree) if c.p == 61));
    }
}
