use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use guided_gan_core::frameworks::FrameworkId;
use toml::Value;

use crate::config::parse_assignment;
use crate::data::DatasetKind;

#[derive(Debug, Parser)]
#[command(name = "guided-gan", version, about = "Train recurrent (bi)GANs and baselines on sequences and probe their features")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one framework and write a run directory.
    Train(TrainArgs),
    /// Fit a linear probe on frozen features of a checkpoint.
    Probe(ProbeArgs),
    /// Sample sequences from a checkpoint's generator.
    Generate(GenerateArgs),
    /// Compare probe results across run directories.
    Report(ReportArgs),
}

fn parse_framework(s: &str) -> Result<FrameworkId, String> {
    s.parse().map_err(|_| {
        let ids: Vec<&str> = FrameworkId::ALL.iter().map(|f| f.as_str()).collect();
        format!("unknown framework (expected one of {})", ids.join(", "))
    })
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Flat TOML configuration; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_framework)]
    pub framework: Option<FrameworkId>,
    #[arg(long, value_parser = |s: &str| s.parse::<DatasetKind>())]
    pub dataset: Option<DatasetKind>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub train_limit: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_z: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Probe the encoder every N epochs while training.
    #[arg(long)]
    pub probe_every: Option<usize>,
    /// Any configuration key, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_assignment)]
    pub set: Vec<(String, Value)>,
    /// Output directory [default: runs/<framework>-<dataset>-seed<seed>].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Replace an existing output directory.
    #[arg(long)]
    pub force: bool,
    /// Print the effective configuration and exit.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureArg {
    Encoder,
    Discriminator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PoolingArg {
    Final,
    Mean,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Expected framework; refused if the checkpoint holds another one.
    #[arg(long, value_parser = parse_framework)]
    pub framework: Option<FrameworkId>,
    #[arg(long, value_enum, default_value = "encoder")]
    pub features: FeatureArg,
    /// Pooling of discriminator hidden states.
    #[arg(long, value_enum, default_value = "final")]
    pub pooling: PoolingArg,
    /// Label fractions for a sweep, e.g. `0.01,0.1,1.0`.
    #[arg(long, value_delimiter = ',')]
    pub fractions: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub subset_seed: u64,
    /// Also probe on G(E(x)) reconstructions of both splits.
    #[arg(long)]
    pub faithfulness: bool,
    /// Write train/test feature matrices as CSV.
    #[arg(long)]
    pub export_embeddings: bool,
    #[arg(long)]
    pub probe_epochs: Option<usize>,
    #[arg(long)]
    pub probe_seed: Option<u64>,
    /// Overrides the data directory stored in the checkpoint.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Output directory [default: <run>/probe].
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also reconstruct the first `n` test windows through G(E(x)).
    #[arg(long)]
    pub reconstruct: bool,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Output directory [default: <run>/generated].
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Run directories to compare.
    #[arg(required = true, num_args = 1..)]
    pub runs: Vec<PathBuf>,
    #[arg(long, default_value = "report")]
    pub out: PathBuf,
    #[arg(long)]
    pub force: bool,
}
