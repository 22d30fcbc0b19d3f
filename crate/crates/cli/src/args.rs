use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gqads_core::analysis::BetaRule;
use gqads_core::{Mode, ProtocolParams, Seed, TagScheme};

#[derive(Debug, Parser)]
#[command(name = "gqads", version, about = "Quantum-assisted digital signature toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate QKD and write the two keys k1 and k2.
    Keygen(KeygenArgs),
    /// Distribute, sign and verify one message.
    Run(RunArgs),
    /// Run a seeded attack campaign against the analytical values.
    Attack(AttackArgs),
    /// Threshold and block-count optimisation, figure tables.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    #[value(alias = "json-lines")]
    Jsonl,
    Pretty,
}

impl Format {
    pub fn token(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
            Format::Pretty => "pretty",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SeedArg {
    /// 64 hex digits or a decimal integer; random when absent.
    #[arg(long, env = "GQADS_SEED")]
    pub seed: Option<Seed>,
}

impl SeedArg {
    pub fn resolve(&self) -> Seed {
        self.seed.unwrap_or_else(|| Seed::from_u64(rand::random()))
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "pretty")]
    pub format: Format,
    /// Add exact num/den columns next to rational values.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Blocks per key.
    #[arg(long)]
    pub n: Option<u32>,
    /// Bits per block.
    #[arg(long)]
    pub r: Option<u32>,
    /// Blocks each verifier shares with the other; defaults to n/2.
    #[arg(long = "S")]
    pub shared: Option<u32>,
    /// Bob's threshold; defaults to n + S.
    #[arg(long)]
    pub vb: Option<u32>,
    /// Charlie's threshold; defaults to 2S + 1.
    #[arg(long, conflicts_with = "k")]
    pub vc: Option<u32>,
    /// Charlie's private-block requirement V_C - 2S.
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long, default_value = "gqads")]
    pub mode: Mode,
    /// MAC suite, e.g. poly1305-hmacsha256/t128 or toy.
    #[arg(long)]
    pub suite: Option<TagScheme>,
}

impl ParamArgs {
    pub fn resolve(&self, default_n: u32, default_r: u32) -> ProtocolParams {
        let deterministic = self.mode == Mode::DeterministicGqads;
        let n = self.n.unwrap_or(if deterministic { 2 } else { default_n });
        let r = self.r.unwrap_or(default_r);
        let shared = self.shared.unwrap_or(if deterministic { 1 } else { n / 2 });
        let v_c = match (self.vc, self.k) {
            (Some(v), _) => v,
            (None, Some(k)) => 2 * shared + k,
            (None, None) if deterministic => n + shared,
            (None, None) => 2 * shared + 1,
        };
        ProtocolParams {
            n,
            r,
            shared,
            v_b: self.vb.unwrap_or(n + shared),
            v_c,
            mode: self.mode,
            scheme: self.suite.clone().unwrap_or_default(),
        }
    }
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[arg(long, default_value_t = 64)]
    pub n: u32,
    #[arg(long, default_value_t = 64)]
    pub r: u32,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Directory receiving k1.key and k2.key.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Write hex text instead of the binary layout.
    #[arg(long)]
    pub hex: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Tamper {
    None,
    /// Flip the first bit of the message after signing.
    FlipBit,
    /// Flip the first bit of the first tag.
    FlipTag,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Key file for k1 (Alice and Bob); needs --k2 too.
    #[arg(long, requires = "k2")]
    pub k1: Option<PathBuf>,
    /// Key file for k2 (Alice and Charlie); needs --k1 too.
    #[arg(long, requires = "k1")]
    pub k2: Option<PathBuf>,
    /// File holding the message to sign.
    #[arg(long, conflicts_with = "text")]
    pub message: Option<PathBuf>,
    /// Inline message text.
    #[arg(long)]
    pub text: Option<String>,
    #[arg(long, value_enum, default_value = "none")]
    pub tamper: Tamper,
    /// Charlie does not answer.
    #[arg(long)]
    pub charlie_offline: bool,
    /// Write the signed message here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Verify an existing signed-message file instead of signing.
    #[arg(long, conflicts_with_all = ["message", "text"])]
    pub input_signed: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackKind {
    Repudiation,
    ForgeryToy,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(value_enum)]
    pub attack: AttackKind,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Errors Alice injects; defaults to e* = n + S - V_C + 1.
    #[arg(long)]
    pub errors: Option<u32>,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Targets {
    pub b_r: u32,
    pub b_f: u32,
}

impl std::str::FromStr for Targets {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or("expected bR:bF")?;
        let parse = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("`{t}`: {e}"));
        Ok(Targets {
            b_r: parse(a)?,
            b_f: parse(b)?,
        })
    }
}

impl std::fmt::Display for Targets {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.b_r, self.b_f)
    }
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Block count; with --r, optimise the thresholds at this (n, r).
    #[arg(long, requires = "r")]
    pub n: Option<u32>,
    #[arg(long, requires = "n")]
    pub r: Option<u32>,
    /// Key length; optimise n | L.
    #[arg(long = "L", conflicts_with = "n")]
    pub key_bits: Option<u64>,
    /// Security targets bR:bF in bits.
    #[arg(long)]
    pub targets: Option<Targets>,
    /// Largest n tried when searching the minimal key for --targets.
    #[arg(long, default_value_t = 512)]
    pub max_n: u32,
    /// How S is tied to n: half, beta-star or free.
    #[arg(long)]
    pub rule: Option<BetaRule>,
    /// Emit one figure table by name.
    #[arg(long, conflicts_with_all = ["n", "key_bits", "targets"])]
    pub figure: Option<String>,
    /// Emit the full grid behind the optimum.
    #[arg(long)]
    pub sweep: bool,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}
