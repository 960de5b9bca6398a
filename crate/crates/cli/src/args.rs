use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "stance",
    version,
    about = "Explain observed behavior by analogy with remembered experiences"
)]
pub struct Cli {
    /// Directory that receives the command's artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// What to print on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Primary seed: the training seed for `train` and `evaluate`, the first
    /// rollout seed for `simulate`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// TOML run configuration.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse micro-theory files and summarize their contents.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Declarations shared by all files (event flags, categories).
        #[arg(long)]
        vocabulary: Option<PathBuf>,
    },
    /// Map one base experience onto a target and list the hypotheses.
    Match {
        base: PathBuf,
        target: PathBuf,
        /// Event vocabulary; when given, hypotheses are filtered.
        #[arg(long)]
        vocabulary: Option<PathBuf>,
    },
    /// Rank a manifest's bases by similarity times edge count.
    Order { manifest: PathBuf },
    /// Augment a manifest's target with hypotheses until nothing changes.
    Synthesize { manifest: PathBuf },
    /// Learn a policy for a scenario (built-in name or TOML file).
    Train { scenario: String },
    /// Roll out a policy and record observation traces.
    Simulate {
        scenario: String,
        /// Policy written by `train`; trained on the fly when absent.
        #[arg(long)]
        policy: Option<PathBuf>,
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Summarize trace files as representative chronologies.
    Chronicle {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Train, observe and classify all built-in behaviors.
    Evaluate,
    /// Render a micro-theory as a DOT graph.
    ExportDot {
        path: PathBuf,
        /// Earlier version of the same experience; new expressions are dashed.
        #[arg(long)]
        original: Option<PathBuf>,
        #[arg(long)]
        vocabulary: Option<PathBuf>,
    },
}
