use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qalpha", version, about = "Q_alpha, Littlewood-Paley Morrey and Campanato norm laboratory")]
pub struct Cli {
    /// Worker threads (default: one per core). Results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample corpus functions and write them as grid files.
    Gen(GenArgs),
    /// Compute one norm of every input function.
    Norm(NormArgs),
    /// Split functions into Littlewood-Paley bands and report band energies.
    Decompose(DecomposeArgs),
    /// Tabulate the dyadic-cube kernel on seeded point pairs.
    Kernel(KernelArgs),
    /// Run one of the verification experiments.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormName {
    Qalpha,
    Campanato,
    Lpmorrey,
    Dyadiclp,
    Mb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Profile {
    #[default]
    Linear,
    Logarithmic,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file. Defaults to $QALPHA_OUT_DIR/<command>.<ext> when that
    /// variable is set, otherwise stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Output format (default: csv if --out ends in .csv, else json).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Grid-function text file to read.
    #[arg(long, conflicts_with = "corpus")]
    pub input: Option<PathBuf>,

    /// JSON corpus file (array of function specs). Without --input or
    /// --corpus the built-in default corpus is used.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ShapeArgs {
    /// Spatial dimension, 1 or 2 (overrides the corpus file).
    #[arg(long = "n")]
    pub dim: Option<usize>,

    /// Grid points per axis, a power of two >= 8 (overrides the corpus file).
    #[arg(long)]
    pub size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,

    /// JSON corpus file; defaults to the built-in corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,

    /// Output directory (default: $QALPHA_OUT_DIR, else the current directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    /// Which norm to compute.
    #[arg(value_enum)]
    pub kind: NormName,

    /// Smoothness exponent alpha.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub alpha: f64,

    /// Campanato exponent lambda in [0, n] (default: n - 2 alpha).
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Finest cube level in the supremum (default: log2 N - 3).
    #[arg(long)]
    pub level_max: Option<u32>,

    /// Add the half-edge-shifted copy of every cube.
    #[arg(long)]
    pub shifted: bool,

    /// Truncation depth of the dyadic sum (dyadiclp only).
    #[arg(long = "K", default_value_t = 0)]
    pub k_max: u32,

    /// Coarsest Littlewood-Paley band.
    #[arg(long, default_value_t = 0)]
    pub j_min: i64,

    /// Filter profile family.
    #[arg(long, value_enum, default_value_t)]
    pub profile: Profile,

    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Coarsest Littlewood-Paley band.
    #[arg(long, default_value_t = 0)]
    pub j_min: i64,

    /// Filter profile family.
    #[arg(long, value_enum, default_value_t)]
    pub profile: Profile,

    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    /// Kernel exponent alpha (must exceed -n/2).
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub alpha: f64,

    /// Dilation factor m >= 2.
    #[arg(long, default_value_t = 2.0)]
    pub m: f64,

    /// Spatial dimension, 1 or 2.
    #[arg(long = "n", default_value_t = 1)]
    pub dim: usize,

    /// Number of sampled pairs.
    #[arg(long, default_value_t = 1000)]
    pub pairs: usize,

    /// Sampler seed.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub pairs: PairArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Both sides of the LP characterization across grid sizes.
    Equivalence(EquivalenceArgs),
    /// Exact order-exchange identity of the dyadic sum.
    Fubini(FubiniArgs),
    /// Truncated kernel-sum bound against the Q_alpha norm.
    Lemma23(Lemma23Args),
    /// Decay of the dyadic kernel with distance.
    Decay(KernelArgs),
    /// Q_alpha against the Morrey-Besov norm.
    Embedding(EmbeddingArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// JSON corpus file; defaults to the built-in corpus for the command.
    #[arg(long)]
    pub corpus: Option<PathBuf>,

    /// Spatial dimension, 1 or 2.
    #[arg(long = "n", default_value_t = 1)]
    pub dim: usize,
}

#[derive(Debug, Args)]
pub struct EquivalenceArgs {
    /// Smoothness exponent alpha in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,

    /// Grid sizes, ascending; repeat the flag for each.
    #[arg(long = "size", default_values_t = [64, 128, 256])]
    pub sizes: Vec<usize>,

    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FubiniArgs {
    /// Exponents alpha > 0; repeat the flag for each.
    #[arg(long = "alpha", default_values_t = [0.3, 0.5, 0.7])]
    pub alphas: Vec<f64>,

    /// Grid points per axis.
    #[arg(long, default_value_t = 256)]
    pub size: usize,

    /// Deepest root-cube level checked.
    #[arg(long, default_value_t = 2)]
    pub level_max: u32,

    /// Largest truncation depth checked; every K from 0 up is run.
    #[arg(long = "K", default_value_t = 3)]
    pub k_max: u32,

    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct Lemma23Args {
    /// Kernel exponent alpha.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub alpha: f64,

    /// Dilation factors m >= 2; repeat the flag for each.
    #[arg(long = "m", default_values_t = [2.0, 4.0])]
    pub ms: Vec<f64>,

    /// Truncation depths; repeat the flag for each.
    #[arg(long = "K", default_values_t = [3, 4])]
    pub ks: Vec<u32>,

    /// Grid points per axis.
    #[arg(long, default_value_t = 256)]
    pub size: usize,

    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EmbeddingArgs {
    /// Smoothness exponent alpha in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,

    /// Grid points per axis.
    #[arg(long, default_value_t = 128)]
    pub size: usize,

    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
