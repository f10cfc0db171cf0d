use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "zkmip", version, about = "Two-prover zero-knowledge proofs for Subset Sum and 3SAT")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance with a planted witness, or validate one with --instance.
    Gen(GenArgs),
    /// Run honest (or witnessless) provers against honest verifiers.
    Prove(ProveArgs),
    /// Measure how often witnessless provers get accepted.
    Attack(AttackArgs),
    /// Communication cost per round and in total.
    Bench(BenchArgs),
    /// Check 2w(G) - 1 <= w(G_coup) on a game file or random binary games.
    GameCheck(GameCheckArgs),
    /// Compare honest and simulated verifier views.
    ZkCheck(ZkCheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    #[value(name = "subset-sum")]
    SubsetSum,
    #[value(name = "3sat")]
    ThreeSat,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Run seed; every random choice derives from it.
    #[arg(long, env = "ZKMIP_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Also write the reported numbers as `key<TAB>value` lines.
    #[arg(long, value_name = "PATH")]
    pub export: Option<PathBuf>,
}

/// Where the statement comes from.
#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    #[arg(long, value_enum, default_value = "subset-sum")]
    pub protocol: Protocol,
    /// Instance file (Subset Sum format or DIMACS). Generated from --n/--m when absent.
    #[arg(long, value_name = "PATH")]
    pub instance: Option<PathBuf>,
    /// Set size (Subset Sum) or variable count (3SAT).
    #[arg(long)]
    pub n: Option<usize>,
    /// Clause count (3SAT).
    #[arg(long)]
    pub m: Option<usize>,
    /// Soundness parameter: one round has error 1/2 + 2^-K.
    #[arg(long = "K", default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..=64))]
    pub k: u32,
    /// Field modulus (prime), overriding the one derived from K.
    #[arg(long, value_name = "Q")]
    pub modulus: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub inst: InstanceArgs,
    /// Resample the planted Subset Sum witness until it selects something.
    #[arg(long)]
    pub nonempty: bool,
    /// Output file; printed to stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct ProveArgs {
    #[command(flatten)]
    pub inst: InstanceArgs,
    /// Rounds to run; defaults to enough for soundness error 2^-100.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub rounds: Option<u64>,
    /// Ignore the witness and let the provers cheat by answering the audit.
    #[arg(long)]
    pub witnessless: bool,
    /// Write the message log here.
    #[arg(long, value_name = "PATH")]
    pub transcript_out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    /// Commit honestly to random data and answer the audit.
    AnswerAudit,
    /// Commit to data that passes the reveal.
    AnswerReveal,
    /// Best single-round value over all deterministic provers (tiny instances).
    Exhaustive,
}

#[derive(Debug, Clone, Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub inst: InstanceArgs,
    #[arg(long, value_enum, default_value = "answer-audit")]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub rounds: u64,
    #[arg(long, value_name = "PATH")]
    pub transcript_out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "subset-sum")]
    pub protocol: Protocol,
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    /// Clause count (3SAT); defaults to 4n.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long = "K", default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..=64))]
    pub k: u32,
    /// Also time field multiplications. The timing line varies between runs.
    #[arg(long)]
    pub throughput: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct GameCheckArgs {
    /// Game file.
    #[arg(long, value_name = "PATH", conflicts_with = "random", required_unless_present = "random")]
    pub instance: Option<PathBuf>,
    /// Check this many random games with binary alphabets instead.
    #[arg(long, value_name = "COUNT")]
    pub random: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct ZkCheckArgs {
    #[arg(long, value_enum, default_value = "subset-sum")]
    pub protocol: Protocol,
    /// Instance with witness; a built-in instance over Q = 5 when absent.
    #[arg(long, value_name = "PATH")]
    pub instance: Option<PathBuf>,
    /// Field modulus for an instance file that does not fix one.
    #[arg(long, value_name = "Q")]
    pub modulus: Option<String>,
    /// Compare sampled histograms instead of enumerating.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}
