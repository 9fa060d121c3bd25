use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tentbreak::Backend;

#[derive(Debug, Parser)]
#[command(name = "tentbreak", version, about = "Tent-map block cipher: encryption, attacks and analysis")]
pub struct Cli {
    /// Arithmetic backend: fpL (fixed point, L fractional bits), f64 or f32.
    #[arg(long, global = true)]
    pub backend: Option<Backend>,

    /// Block parameter; blocks are 4n bits wide.
    #[arg(long, global = true)]
    pub n: Option<u32>,

    /// Maximum message length in blocks.
    #[arg(long, global = true)]
    pub r: Option<usize>,

    /// Seed for every randomized choice.
    #[arg(long, global = true, env = "TENTBREAK_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for sampling; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand.
#[derive(Clone, Debug)]
pub struct Config {
    pub backend: Option<Backend>,
    pub n: Option<u32>,
    pub r: Option<usize>,
    pub seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
}

impl Cli {
    pub fn config(&self) -> Config {
        Config {
            backend: self.backend,
            n: self.n,
            r: self.r,
            seed: self.seed,
            workers: self.workers,
            out: self.out.clone(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate key material.
    Keygen(KeygenArgs),
    /// Encrypt a byte file under a key and timestamp.
    Encrypt(EncryptArgs),
    /// Decrypt with a key, or without one from a recovered state.
    Decrypt(DecryptArgs),
    /// Run an attack against a locally hosted victim session.
    Attack(AttackArgs),
    /// Emit figure data and statistics as CSV.
    Analyze(AnalyzeArgs),
    /// Solve noise vectors of a recovered state from known plaintexts.
    SolveU(SolveArgs),
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    /// Fix alpha instead of drawing it; weak values are accepted with a warning.
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    /// Sub-key K in hex.
    #[arg(long)]
    pub k: Option<String>,
    /// Draw alpha from all of (0, 1) instead of 0 < |alpha - 0.5| < 0.01.
    #[arg(long)]
    pub allow_weak: bool,
}

#[derive(Debug, Args)]
pub struct EncryptArgs {
    #[arg(long)]
    pub key: PathBuf,
    /// Plaintext bytes, split most significant bit first into 4n-bit blocks.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Timestamp; the current UNIX time when absent.
    #[arg(long)]
    pub t: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DecryptArgs {
    #[arg(long, required_unless_present = "state", conflicts_with = "state")]
    pub key: Option<PathBuf>,
    /// Recovered state for decryption without the key.
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Ciphertext file.
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AttackMode {
    /// Chosen-plaintext recovery of the permutations.
    Cpa,
    /// Chosen-ciphertext recovery, cross-checked against chosen plaintext.
    Cca,
    /// Chosen plaintext, known-plaintext noise vectors, keyless decryption.
    Full,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    pub mode: AttackMode,
    /// Victim key; drawn from the seed when absent.
    #[arg(long)]
    pub key: Option<PathBuf>,
    /// Victim timestamp; drawn from the seed when absent.
    #[arg(long)]
    pub t: Option<u64>,
    /// Let the victim clock advance by one per query.
    #[arg(long)]
    pub drift: bool,
    /// Known plaintext messages used by `full`.
    #[arg(long, default_value_t = 2)]
    pub known: usize,
    /// Where to write the recovered state.
    #[arg(long)]
    pub state: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    /// Noise-vector histogram of a skewed-alpha orbit.
    Fig1,
    /// Guess complexity over the alpha grid.
    Fig2,
    /// Degraded orbit of the alpha = 0.5 map.
    Fig3,
    /// Reach of beta: boundary-hit expectation, optionally measured.
    Beta,
    /// Mean orbit lengths at small precisions.
    Census,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExtractorArg {
    Standard,
    Mended,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub target: Target,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub x0: Option<String>,
    /// Noise vectors (fig1), orbits (beta) or starting points (census).
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, value_enum, default_value_t = ExtractorArg::Standard)]
    pub extractor: ExtractorArg,
    /// Precision bits: one value for beta, a list for census.
    #[arg(long, value_delimiter = ',')]
    pub l: Vec<u32>,
    /// Precision of the measured first-hit census for beta.
    #[arg(long, default_value_t = 16)]
    pub empirical_l: u32,
    /// For fig3, emit the orbit as `index,x` instead of the summary.
    #[arg(long)]
    pub orbit: bool,
    /// Orbit values emitted with --orbit.
    #[arg(long, default_value_t = 128)]
    pub steps: usize,
    /// Iteration budget for cycle detection in fig3.
    #[arg(long, default_value_t = 1 << 20)]
    pub max_iter: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    /// Every value in numeric order, reporting all solutions.
    Exhaustive,
    /// Probability-guided order, stopping at the first solution.
    Prioritized,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Recovered state holding the permutations.
    #[arg(long)]
    pub state: PathBuf,
    /// Known pair as PLAINTEXT_FILE=CIPHERTEXT_FILE; repeatable.
    #[arg(long, required = true)]
    pub known: Vec<String>,
    #[arg(long, value_enum, default_value_t = OrderArg::Exhaustive)]
    pub order: OrderArg,
    /// Estimate of alpha steering the prioritized order.
    #[arg(long, default_value = "0.49")]
    pub alpha_est: f64,
    /// Candidates tried per block in prioritized mode.
    #[arg(long, default_value_t = 1 << 32)]
    pub budget: u64,
}
