use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sense::eval::SplitSpec;
use sense::sampler::{DEFAULT_NODE_WINDOW, DEFAULT_TEXT_WINDOW, DEFAULT_WALKS_PER_NODE, DEFAULT_WALK_LENGTH};
use sense::train::{DEFAULT_BETA1, DEFAULT_BETA2, DEFAULT_DIM, DEFAULT_EPOCHS, DEFAULT_NEGATIVES};
use sense::vocab::{DEFAULT_MIN_COUNT, DEFAULT_SUBSAMPLE};
use sense::{ConditioningFrame, TrainMode, Variant};

#[derive(Debug, Parser)]
#[command(
    name = "sense",
    version,
    about = "Joint graph/text node embeddings and node sequence vectors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train node embeddings and write them as text.
    Train(TrainCmd),
    /// Encode a node sequence into one vector.
    Encode(EncodeCmd),
    /// Decode a sequence vector back into node ids.
    Decode(DecodeCmd),
    /// Evaluation protocols.
    #[command(subcommand)]
    Eval(EvalCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Add,
    Concat,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Add => Variant::Add,
            VariantArg::Concat => Variant::Concat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Joint,
    GraphOnly,
    TextOnly,
}

impl From<ModeArg> for TrainMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Joint => TrainMode::Joint,
            ModeArg::GraphOnly => TrainMode::GraphOnly,
            ModeArg::TextOnly => TrainMode::TextOnly,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainOpts {
    /// Edge list: one "src<TAB>dst" pair per line.
    #[arg(long)]
    pub edges: PathBuf,
    /// Node text: one "node_id<TAB>text" line per node.
    #[arg(long)]
    pub texts: Option<PathBuf>,
    /// Treat edges as directed arcs.
    #[arg(long)]
    pub directed: bool,
    #[arg(long, default_value_t = DEFAULT_DIM)]
    pub dim: usize,
    #[arg(long, value_enum, default_value_t = VariantArg::Add)]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Joint)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_WALKS_PER_NODE)]
    pub walks_per_node: usize,
    #[arg(long, default_value_t = DEFAULT_WALK_LENGTH)]
    pub walk_length: usize,
    #[arg(long, default_value_t = DEFAULT_TEXT_WINDOW)]
    pub text_window: usize,
    #[arg(long, default_value_t = DEFAULT_NODE_WINDOW)]
    pub node_window: usize,
    /// Return parameter of the biased walk.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// In-out parameter of the biased walk.
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    #[arg(long, default_value_t = DEFAULT_NEGATIVES)]
    pub negatives: usize,
    #[arg(long, default_value_t = DEFAULT_EPOCHS)]
    pub epochs: usize,
    /// Learning rate for graph pairs.
    #[arg(long, default_value_t = DEFAULT_BETA1)]
    pub beta1: f64,
    /// Learning rate for text pairs; must be below beta1.
    #[arg(long, default_value_t = DEFAULT_BETA2)]
    pub beta2: f64,
    #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
    pub min_count: u64,
    #[arg(long, default_value_t = DEFAULT_SUBSAMPLE)]
    pub subsample: f64,
    /// Characters of node text kept per node.
    #[arg(long, default_value_t = 500)]
    pub char_limit: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; more than one makes results nondeterministic.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct TrainCmd {
    #[command(flatten)]
    pub opts: TrainOpts,
    /// Node labels; when given, a classification report is written next to the embeddings.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EncodeCmd {
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Comma-separated node ids.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_id)]
    pub sequence: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecodeCmd {
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub seqvec: PathBuf,
    /// Also write the decoded rows to this CSV file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum EvalCmd {
    /// One-vs-rest node classification on an embedding file.
    Classify(ClassifyCmd),
    /// Hold out links, train on the rest, classify held-out links against non-links.
    Linkpred(LinkpredCmd),
    /// Exact-recovery rate of encode/decode over dimensions and lengths.
    DecodeSweep(SweepCmd),
    /// Monte-Carlo statistics of inner products of random unit vectors.
    TheoremCheck(TheoremCmd),
}

#[derive(Debug, Args)]
pub struct ClassifyCmd {
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Train/validation/test percentages.
    #[arg(long, default_value = "60,20,20", value_parser = parse_split)]
    pub split: SplitSpec,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LinkpredCmd {
    #[command(flatten)]
    pub opts: TrainOpts,
    /// Fraction of links held out as positives.
    #[arg(long, default_value_t = 0.01)]
    pub holdout: f64,
    #[arg(long, default_value = "60,20,20", value_parser = parse_split)]
    pub split: SplitSpec,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SequenceModeArg {
    RandomNodes,
    RandomWalk,
}

#[derive(Debug, Args)]
pub struct SweepCmd {
    #[arg(long, value_enum, default_value_t = SequenceModeArg::RandomNodes)]
    pub mode: SequenceModeArg,
    /// Number of random unit vectors (random-nodes mode).
    #[arg(long, default_value_t = 4604)]
    pub n: usize,
    /// Comma-separated dimensions; in random-walk mode defaults to the dimensions of the given tables.
    #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
    pub dims: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,50", value_parser = parse_positive)]
    pub lengths: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Graph for walk sequences (random-walk mode).
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long)]
    pub directed: bool,
    /// Trained embedding files, one per dimension (random-walk mode).
    #[arg(long, value_delimiter = ',')]
    pub embeddings: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrameArg {
    Axis,
    Uniform,
}

impl From<FrameArg> for ConditioningFrame {
    fn from(f: FrameArg) -> Self {
        match f {
            FrameArg::Axis => ConditioningFrame::Axis,
            FrameArg::Uniform => ConditioningFrame::Uniform,
        }
    }
}

#[derive(Debug, Args)]
pub struct TheoremCmd {
    /// Vector dimension.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Inner product of the pair before shifting; omit for independent pairs.
    #[arg(long)]
    pub c: Option<f64>,
    /// Shift applied to the second vector when --c is given.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = FrameArg::Axis)]
    pub frame: FrameArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also write the statistics to this CSV file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn parse_positive(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("expected a positive integer, got `{s}`")),
    }
}

pub fn parse_id(s: &str) -> Result<String, String> {
    let id = s.trim();
    if id.is_empty() {
        return Err("sequence must be a non-empty comma-separated list of node ids".into());
    }
    Ok(id.to_string())
}

pub fn parse_split(s: &str) -> Result<SplitSpec, String> {
    SplitSpec::parse_percentages(s, 0).map_err(|e| e.to_string())
}
