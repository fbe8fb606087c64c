use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

const EXIT_CODES: &str = "\
Exit codes:
   0  success
   1  certification finished but some verdict failed
   2  command-line usage error
   3  file I/O error
   4  malformed JSON
  10  invalid type space          11  vector length mismatch
  12  negative probability mass   13  probabilities not normalized
  14  zero marginal mass          15  eps out of range
  16  truncation level out of range
  17  members on different type spaces
  18  empty family                19  infeasible family sizes
  20  dimension cap exceeded      21  lottery system has no solution
  22  Cremer-McLean condition violated
  23  stacked conditionals rank deficient
  24  profile outside the support 25  unsupported bidder count
  26  zero likelihood for every member
  27  invalid argument

Probability vectors are row-major over the product of the type spaces, last
bidder fastest. Lottery charges are indexed by (opponent profile, sample 1, ...,
sample m), opponent profile slowest.";

#[derive(Debug, Parser)]
#[command(name = "cm-samples", version, about = "Build and certify surplus-extracting auctions that use samples from the prior", after_help = EXIT_CODES)]
pub struct Cli {
    /// Relative tolerance for rank, solve and certification checks.
    #[arg(long, global = true, env = "CM_TOL", default_value_t = 1e-9)]
    pub tol: f64,

    /// Largest vector, matrix or enumeration allowed, in entries.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub cap: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-bidder Cremer-McLean verdicts for a distribution or every member of a family.
    CheckCm(SourceArgs),
    /// Dimension of the span of the family's probability vectors.
    Span(FamilyArg),
    /// Worst-case sample count k - r + 1.
    Bound(FamilyArg),
    /// Smallest sample count at which every lottery system is solvable.
    Search(FamilyArg),
    /// Solve the lotteries and write the auction file.
    Build(BuildArgs),
    /// Exactly certify an auction under every family member.
    Certify(CertifyArgs),
    /// Monte-Carlo simulation of an auction under one family member.
    Simulate(SimulateArgs),
    /// Error rate of the likelihood distinguisher on the biased pair.
    DemoCoin(DemoCoinArgs),
    /// Full surplus against lookahead revenue on the biased pair.
    DemoGap(DemoGapArgs),
    /// Build the tight lower-bound family and report stacked ranks.
    DemoLb(DemoLbArgs),
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Distribution file.
    #[arg(long, conflicts_with = "family", required_unless_present = "family")]
    pub dist: Option<PathBuf>,
    /// Family file.
    #[arg(long)]
    pub family: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FamilyArg {
    #[arg(long)]
    pub family: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub family: PathBuf,
    /// Sample count; searched for when omitted.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value = "auction.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub auction: PathBuf,
    #[arg(long)]
    pub family: PathBuf,
    /// Report file; printed to stdout only when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub auction: PathBuf,
    #[arg(long)]
    pub family: PathBuf,
    /// Zero-based family member to draw from.
    #[arg(long, default_value_t = 0)]
    pub member: usize,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemoCoinArgs {
    #[arg(long, default_value_t = 2)]
    pub h: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Comma-separated sample counts.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0usize, 1, 10, 100, 1000, 10000])]
    pub counts: Vec<usize>,
    #[arg(long, default_value_t = 5000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Also write the {D_A, D_B} family file.
    #[arg(long)]
    pub family_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemoGapArgs {
    /// Comma-separated truncation levels.
    #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 4, 8, 16, 32, 64])]
    pub h: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemoLbArgs {
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    /// Support size per bidder; defaults to r + 1.
    #[arg(long)]
    pub t: Option<usize>,
    /// Randomize the free construction parameters.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub family_out: Option<PathBuf>,
}
