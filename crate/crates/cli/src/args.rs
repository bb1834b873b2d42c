use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use symrel::{ExponentVector, DEFAULT_TERM_CAP};

#[derive(Parser, Debug)]
#[command(
    name = "symrel",
    version,
    about = "Exact checks of Bell-polynomial symmetric-function relations"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Random rational points tried before each exact expansion.
    #[arg(long, default_value_t = 3, global = true)]
    pub prescreen: usize,
    /// Largest number of terms one expansion may produce.
    #[arg(long, env = "SYMREL_TERM_CAP", default_value_t = DEFAULT_TERM_CAP, global = true,
          value_parser = positive)]
    pub term_cap: usize,
    /// Worker threads (0 picks one per core).
    #[arg(long, default_value_t = 0, global = true)]
    pub jobs: usize,
    /// Seed for the prescreen points.
    #[arg(long, default_value_t = 0x5eed, global = true)]
    pub seed: u64,
    /// Lift the default bounds n <= 8, m <= 4.
    #[arg(long, global = true)]
    pub allow_large: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check one of the relations over a grid of (n, m).
    Verify(VerifyArgs),
    /// Regenerate a Z or Y coefficient table.
    Table(TableArgs),
    /// Solve the linear system on the C_{n,k} coefficients.
    SolveC(SolveCArgs),
    /// Check the listed Bernoulli-number relations and the a_k values.
    BernoulliRelations(BernoulliArgs),
    /// List the polynomial families.
    Families,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// 1: vanishing for n < m; 2: polynomial quotient for n >= m;
    /// 3: both, for every single power-sum product.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub conjecture: u8,
    /// Family name, or `symbolic` for free a_k (ignored by relation 3).
    #[arg(long, default_value = "symbolic")]
    pub family: String,
    /// Degree, as `N` or `A..B` (inclusive). Defaults to every valid n.
    #[arg(long)]
    pub n: Option<IndexRange>,
    /// Number of variables, as `M` or `A..B` (inclusive).
    #[arg(long, default_value = "2..4")]
    pub m: IndexRange,
    /// Restrict relation 3 to one power-sum product, e.g. `0,1`.
    #[arg(long)]
    pub key: Option<Key>,
    /// Include per-stage timings in the JSON report.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    #[value(name = "Z", alias = "z")]
    Z,
    #[value(name = "Y", alias = "y")]
    Y,
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableKind::Z => "Z",
            TableKind::Y => "Y",
        })
    }
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[arg(value_enum)]
    pub table: TableKind,
    /// Z: the degree of Z. Y: the weight of the key.
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    /// Y only: a single key; all keys of weight n otherwise.
    #[arg(long)]
    pub key: Option<Key>,
}

#[derive(Args, Debug)]
pub struct SolveCArgs {
    /// Weight, as `N` or `A..B`.
    #[arg(long)]
    pub n: IndexRange,
    /// Rebuild the Bernoulli polynomial from its free coefficients.
    #[arg(long)]
    pub check_bernoulli: bool,
}

#[derive(Args, Debug)]
pub struct BernoulliArgs {
    /// Highest a_k solved for by sequential elimination.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(2..))]
    pub max_index: u32,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

/// An inclusive range written `N`, `A..B` or `A..=B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexRange(pub RangeInclusive<usize>);

impl FromStr for IndexRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad bound `{t}`: {e}"));
        let r = match s.split_once("..") {
            Some((a, b)) => num(a)?..=num(b.strip_prefix('=').unwrap_or(b))?,
            None => {
                let v = num(s)?;
                v..=v
            }
        };
        if r.is_empty() {
            return Err(format!("empty range `{s}`"));
        }
        Ok(IndexRange(r))
    }
}

/// A comma-separated exponent vector such as `0,1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Key(pub ExponentVector);

impl FromStr for Key {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let entries = s
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|e| format!("bad key entry `{t}`: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Key(ExponentVector::new(entries)))
    }
}
