use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "skcap", version, about = "Secret-key capacity, exponents and random-binning simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, env = "SKCAP_THREADS", default_value_t = 0)]
    pub threads: usize,

    /// Master seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Secret-key capacity, or the upper bound when the channel is not degraded.
    Capacity(ChannelArgs),
    /// max I(X,S;Y|Z) over cost-feasible inputs.
    UpperBound(ChannelArgs),
    /// Gaussian interference model over a power grid.
    SweepGaussian(SweepGaussianArgs),
    /// Binary on-off channel over a grid of P(S=1).
    SweepBinary(SweepBinaryArgs),
    /// Reliability and secrecy exponents over rate grids.
    Exponents(ExponentsArgs),
    /// Ensemble of random-binning codes, evaluated exactly.
    Simulate(SimulateArgs),
    /// Bound identities and ensemble inequalities as pass/fail checks.
    VerifyBounds(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Gaussian,
    BinaryOnoff,
    Random,
    RandomDegraded,
}

#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    /// Channel JSON file.
    #[arg(long, conflicts_with = "family", required_unless_present = "family")]
    pub channel: Option<PathBuf>,

    /// Named channel family.
    #[arg(long, value_enum)]
    pub family: Option<Family>,

    /// Cost budget E[Λ(S)] <= gamma.
    #[arg(long)]
    pub gamma: Option<f64>,

    /// Rescale file rows that are off unit mass.
    #[arg(long)]
    pub renormalize: bool,

    #[command(flatten)]
    pub onoff: OnOffArgs,

    #[command(flatten)]
    pub gaussian: GaussianArgs,

    #[command(flatten)]
    pub random: RandomArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OnOffArgs {
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    #[arg(long, default_value_t = 0.8)]
    pub q_tilde: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.2)]
    pub delta3: f64,
}

#[derive(Debug, Clone, Args)]
pub struct GaussianArgs {
    /// Linear input power.
    #[arg(long, default_value_t = 1.0)]
    pub power: f64,
    /// Fade deviations ν1,ν2,ν3.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.0, 2.0])]
    pub nu: Vec<f64>,
    /// Noise deviations σ1,σ2,σ3.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.0, 1.0])]
    pub sigma: Vec<f64>,
    #[arg(long, default_value_t = 0.8, allow_negative_numbers = true)]
    pub rho12: f64,
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub rho13: f64,
}

#[derive(Debug, Clone, Args)]
pub struct RandomArgs {
    /// |S|,|X|,|Y|,|Z| for random families.
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 2, 2, 2])]
    pub alphabets: Vec<usize>,
    /// Seed of the random channel draw.
    #[arg(long, default_value_t = 0)]
    pub channel_seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SweepGaussianArgs {
    #[command(flatten)]
    pub gaussian: GaussianArgs,
    /// Power grid in dB, `start:stop:step` or a comma list.
    #[arg(long, default_value = "-10:20:0.5", allow_hyphen_values = true)]
    pub db: String,
    /// Linear power grid; overrides --db.
    #[arg(long)]
    pub linear: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepBinaryArgs {
    #[command(flatten)]
    pub onoff: OnOffArgs,
    /// Number of equally spaced β values on [0, 1].
    #[arg(long, default_value_t = 1001)]
    pub points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Bernoulli input grid for binary S, `start:stop:step` or a comma list.
    #[arg(long, conflicts_with = "input")]
    pub beta: Option<String>,
    /// Explicit input pmf, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub input: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct ExponentsArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub input: InputArgs,
    /// Optimize each exponent over p(s) instead of fixing the input.
    #[arg(long, conflicts_with_all = ["beta", "input"])]
    pub optimize: bool,
    #[arg(long, default_value = "0")]
    pub r_sk: String,
    #[arg(long, default_value = "0")]
    pub r_phi: String,
    #[arg(long, default_value = "0")]
    pub r_m: String,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub input: InputArgs,
    /// Blocklengths, `a:b` or a comma list.
    #[arg(long, default_value = "1:3")]
    pub n: String,
    #[arg(long, default_value_t = 0.0)]
    pub r_sk: f64,
    #[arg(long, default_value_t = 0.0)]
    pub r_phi: f64,
    #[arg(long, default_value_t = 0.0)]
    pub r_m: f64,
    #[arg(long, default_value_t = 500)]
    pub codebooks: usize,
}
