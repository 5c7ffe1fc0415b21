//! `netmanifold` command-line interface: corpus ingestion, distances,
//! exploration, means, interpolation, PCA, regression, two-sample tests and
//! the edge z-screen over graph Laplacian files.
//!
//! Exit codes: 0 on success, 1 for invalid input or flags, 2 when a
//! numerical routine fails on valid input.

mod commands;
mod output;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use netmanifold::{ReverseMapVariant, TestMethod, VarianceModel, WardVariant};

use output::Format;
use settings::{ConfigFile, Overrides};

#[derive(Debug, Parser)]
#[command(name = "netmanifold", version, about = "Statistics for samples of graph Laplacians")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Metric preset (default sqrt).
    #[arg(long, global = true, value_enum)]
    metric: Option<MetricArg>,
    /// Embedding power; overrides the preset.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Reverse map from the embedding space; overrides the preset.
    #[arg(long, global = true, value_enum)]
    reverse: Option<ReverseArg>,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output format for the result table.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// TOML configuration file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the result table to this file instead of standard output.
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build one trace-normalised Laplacian per document.
    Ingest(IngestArgs),
    /// Pairwise distance matrix.
    Dist(DistArgs),
    /// Classical multidimensional scaling of the distance matrix.
    Mds(MdsArgs),
    /// Ward hierarchical clustering of the distance matrix.
    Cluster(ClusterArgs),
    /// Sample mean Laplacian.
    Mean(MeanArgs),
    /// Points on the path between two Laplacians.
    Interpolate(InterpolateArgs),
    /// Principal components in the tangent space at the mean.
    Pca(PcaArgs),
    /// Regression on covariates with likelihood-ratio tests.
    Regress(RegressArgs),
    /// Two-sample test for equal group means.
    Test2(Test2Args),
    /// Per-edge z-scores between two groups.
    Edges(EdgesArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Euclidean,
    Sqrt,
    Procrustes,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReverseArg {
    OddIntegerPower,
    NearestPsd,
    RightGram,
    LeftGram,
}

impl From<ReverseArg> for ReverseMapVariant {
    fn from(r: ReverseArg) -> Self {
        match r {
            ReverseArg::OddIntegerPower => Self::OddIntegerPower,
            ReverseArg::NearestPsd => Self::NearestPsdThenPower,
            ReverseArg::RightGram => Self::RightGram,
            ReverseArg::LeftGram => Self::LeftGram,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WardArg {
    D2,
    D,
}

impl From<WardArg> for WardVariant {
    fn from(w: WardArg) -> Self {
        match w {
            WardArg::D2 => Self::D2,
            WardArg::D => Self::D,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Diagonal,
    Isotropic,
}

impl From<ModelArg> for VarianceModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Diagonal => Self::Diagonal,
            ModelArg::Isotropic => Self::Isotropic,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Permutation,
    Asymptotic,
}

impl From<MethodArg> for TestMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Permutation => Self::Permutation,
            MethodArg::Asymptotic => Self::Asymptotic,
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// TSV with header path, label, group, year.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Vocabulary size.
    #[arg(long, default_value_t = 1000)]
    pub m: usize,
    /// Co-occurrence window.
    #[arg(long, default_value_t = 5)]
    pub span: usize,
    /// Output directory for the Laplacians, vocab.txt and manifest.tsv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    /// Manifest listing Laplacian files.
    #[arg(long)]
    pub manifest: PathBuf,
}

#[derive(Debug, Args)]
pub struct MdsArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Number of coordinates.
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum, default_value_t = WardArg::D2)]
    pub ward: WardArg,
    /// Report cluster memberships for this many clusters instead of the
    /// merge table.
    #[arg(long)]
    pub cut: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MeanArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Restrict to one group.
    #[arg(long)]
    pub group: Option<String>,
    /// Laplacian file for the mean.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InterpolateArgs {
    #[arg(long)]
    pub from: PathBuf,
    #[arg(long)]
    pub to: PathBuf,
    /// Path parameters; 0 gives --from, 1 gives --to.
    #[arg(long = "c", value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub c: Vec<f64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// File name prefix for the path points.
    #[arg(long, default_value = "path")]
    pub prefix: String,
}

#[derive(Debug, Args)]
pub struct PcaArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// CSV of scores (label, s1, s2, ...).
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// CSV of node importances (word, importance, sign); euclidean metric only.
    #[arg(long)]
    pub importance: Option<PathBuf>,
    /// Component (1-based) for --importance.
    #[arg(long, default_value_t = 1)]
    pub component: usize,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Covariate columns to use (repeatable); all manifest covariates by default.
    #[arg(long)]
    pub covariate: Vec<String>,
    #[arg(long, value_enum, default_value_t = ModelArg::Diagonal)]
    pub model: ModelArg,
    /// CSV of the fitted path in principal-component scores.
    #[arg(long)]
    pub path_out: Option<PathBuf>,
    /// Points on the fitted path.
    #[arg(long, default_value_t = 25)]
    pub steps: usize,
    /// Principal components reported on the fitted path.
    #[arg(long, default_value_t = 2)]
    pub components: usize,
}

#[derive(Debug, Args)]
pub struct Test2Args {
    #[arg(long)]
    pub manifest: PathBuf,
    /// The two groups to compare; defaults to the manifest's two groups.
    #[arg(long, value_delimiter = ',')]
    pub groups: Option<Vec<String>>,
    #[arg(long, value_enum, default_value_t = MethodArg::Permutation)]
    pub method: MethodArg,
    /// Permutations.
    #[arg(long, default_value_t = 199)]
    pub r: usize,
    /// Monte Carlo draws for the asymptotic null distribution.
    #[arg(long, default_value_t = netmanifold::twosample::DEFAULT_DRAWS)]
    pub draws: usize,
}

#[derive(Debug, Args)]
pub struct EdgesArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub groups: Option<Vec<String>>,
    /// Rows to report, by decreasing |z|.
    #[arg(long, default_value_t = 100)]
    pub top: usize,
    #[arg(long, default_value_t = 0.2)]
    pub beta: f64,
    #[arg(long = "n-ref", default_value_t = 200.0)]
    pub n_ref: f64,
    /// Offset added to s_p: 'median' or a number.
    #[arg(long)]
    pub offset: Option<String>,
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.global.config {
        Some(path) => ConfigFile::read(path)?,
        None => ConfigFile::default(),
    };
    let metric = cli.global.metric.map(|m| {
        m.to_possible_value()
            .expect("metric variants are not skipped")
            .get_name()
            .to_string()
    });
    let settings = settings::resolve(
        file,
        Overrides {
            metric,
            alpha: cli.global.alpha,
            reverse: cli.global.reverse.map(Into::into),
            seed: cli.global.seed,
            threads: cli.global.threads,
            format: cli.global.format,
        },
    )?;
    if let Some(n) = settings.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let config = &settings.config;
    log::info!("configuration {}", config.describe());
    let report = match &cli.command {
        Command::Ingest(a) => commands::ingest(a, config)?,
        Command::Dist(a) => commands::dist(a, config)?,
        Command::Mds(a) => commands::mds(a, config)?,
        Command::Cluster(a) => commands::cluster(a, config)?,
        Command::Mean(a) => commands::mean(a, config)?,
        Command::Interpolate(a) => commands::interpolate(a, config)?,
        Command::Pca(a) => commands::pca(a, config)?,
        Command::Regress(a) => commands::regress(a, config)?,
        Command::Test2(a) => commands::test2(a, config)?,
        Command::Edges(a) => commands::edges(a, config)?,
    };
    output::emit(cli.global.output.as_deref(), &report.render(settings.format)?)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<netmanifold::Error>() {
        Some(e) if e.is_numerical() => 2,
        _ => 1,
    }
}

/// The error chain joined by `: `, skipping causes already spelled out by
/// the message above them.
fn describe(err: &anyhow::Error) -> String {
    let mut out = err.to_string();
    let mut previous = out.clone();
    for cause in err.chain().skip(1) {
        let text = cause.to_string();
        if !previous.contains(&text) {
            out.push_str(": ");
            out.push_str(&text);
        }
        previous = text;
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
