mod commands;
mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Failure reported as `error[<category>]: <message>` on stderr.
#[derive(Debug)]
pub struct CliError {
    pub category: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(category: &'static str, message: impl Into<String>) -> Self {
        CliError {
            category,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::new("io", format!("{}: {e}", path.display()))
    }
}

impl From<mtlue::Error> for CliError {
    fn from(e: mtlue::Error) -> Self {
        CliError::new(e.category(), e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "mtlue", version, about = "Multitask user embeddings from review text")]
struct Cli {
    /// TOML run configuration. Keys can be overridden with MTLUE_<SECTION>__<KEY> variables.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Training worker threads. 1 is deterministic.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ReviewsArg {
    /// Preprocessed review file (overrides `reviews`).
    #[arg(long)]
    reviews: Option<PathBuf>,
}

#[derive(Args)]
struct EmbeddingsArg {
    /// User embedding file.
    #[arg(long)]
    embeddings: PathBuf,
    /// Method name recorded in reports.
    #[arg(long, default_value = "mtl")]
    method: String,
}

#[derive(Subcommand)]
enum Command {
    /// Load raw review records, preprocess, anonymize ids and save.
    Ingest {
        /// Newline-delimited JSON review records.
        #[arg(long)]
        input: PathBuf,
        /// Salt for the id digests.
        #[arg(long)]
        salt: String,
        /// Skip malformed records instead of failing.
        #[arg(long)]
        lenient: bool,
    },
    /// Generate a seeded synthetic corpus.
    Synth {
        #[arg(long, value_enum)]
        preset: Option<Preset>,
    },
    /// Train user, item and word embeddings jointly.
    Train {
        #[command(flatten)]
        reviews: ReviewsArg,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train a baseline user embedding.
    TrainBaseline {
        #[arg(value_enum)]
        method: Baseline,
        #[command(flatten)]
        reviews: ReviewsArg,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Spectral clustering of user embeddings scored by pairwise genre F1.
    EvalCluster {
        #[command(flatten)]
        reviews: ReviewsArg,
        #[command(flatten)]
        embeddings: EmbeddingsArg,
    },
    /// Sentiment classification with or without user embeddings.
    EvalClassify {
        #[arg(value_enum)]
        mode: ClassifyMode,
        #[command(flatten)]
        reviews: ReviewsArg,
        /// User embedding file, required for `personalized`.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long, default_value = "mtl")]
        method: String,
    },
    /// Overlap of the top mutual-information features between genres.
    AnalyzeOverlap {
        #[command(flatten)]
        reviews: ReviewsArg,
        #[arg(long, value_enum)]
        mi_target: Option<MiTargetArg>,
        #[arg(long)]
        top_k: Option<usize>,
    },
    /// Train-on-one-genre, test-on-another sentiment F1 grid.
    AnalyzeCrossgroup {
        #[command(flatten)]
        reviews: ReviewsArg,
    },
    /// Project user vectors to two dimensions for plotting.
    ///
    /// Uses the top two principal components of the mean-centred vectors
    /// (PCA), not t-SNE. Writes user, genres and coordinates as CSV.
    #[command(name = "export-2d")]
    Export2d {
        #[command(flatten)]
        reviews: ReviewsArg,
        #[command(flatten)]
        embeddings: EmbeddingsArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Default,
    SentimentBias,
    DisjointGenres,
    SharedVocabulary,
}

#[derive(Clone, Copy, ValueEnum)]
enum Baseline {
    Word2user,
    User2vec,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassifyMode {
    Plain,
    Personalized,
}

#[derive(Clone, Copy, ValueEnum)]
enum MiTargetArg {
    Sentiment,
    Genre,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.message.replace('\n', " ");
            eprintln!("error[{}]: {message}", e.category);
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = config::load(cli.config.as_deref(), std::env::vars())?;
    if let Some(t) = cli.threads {
        config.train.threads = t;
    }
    if let Some(out) = cli.out {
        config.out_dir = Some(out);
    }
    let set_reviews = |config: &mut config::RunConfig, arg: ReviewsArg| {
        if let Some(r) = arg.reviews {
            config.reviews = Some(r);
        }
    };
    let set_train = |config: &mut config::RunConfig, epochs: Option<usize>, seed: Option<u64>| {
        if let Some(e) = epochs {
            config.train.epochs = e;
        }
        if let Some(s) = seed {
            config.train.seed = s;
        }
    };
    match cli.command {
        Command::Ingest { input, salt, lenient } => commands::ingest(&config, &input, &salt, lenient),
        Command::Synth { preset } => {
            if let Some(p) = preset {
                let seed = config.synth.seed;
                config.synth = match p {
                    Preset::Default => mtlue::corpus::SyntheticConfig::default(),
                    Preset::SentimentBias => mtlue::corpus::SyntheticConfig::sentiment_bias(),
                    Preset::DisjointGenres => mtlue::corpus::SyntheticConfig::disjoint_genres(),
                    Preset::SharedVocabulary => mtlue::corpus::SyntheticConfig::shared_vocabulary(),
                };
                config.synth.seed = seed;
            }
            commands::synth(&config)
        }
        Command::Train { reviews, epochs, seed } => {
            set_reviews(&mut config, reviews);
            set_train(&mut config, epochs, seed);
            commands::train(&config)
        }
        Command::TrainBaseline {
            method,
            reviews,
            epochs,
            seed,
        } => {
            set_reviews(&mut config, reviews);
            set_train(&mut config, epochs, seed);
            let method = match method {
                Baseline::Word2user => mtlue::baselines::Method::Word2User,
                Baseline::User2vec => mtlue::baselines::Method::User2Vec,
            };
            commands::train_baseline(&config, method)
        }
        Command::EvalCluster { reviews, embeddings } => {
            set_reviews(&mut config, reviews);
            commands::eval_cluster(&config, &embeddings.embeddings, &embeddings.method)
        }
        Command::EvalClassify {
            mode,
            reviews,
            embeddings,
            method,
        } => {
            set_reviews(&mut config, reviews);
            let embeddings = match (mode, embeddings) {
                (ClassifyMode::Plain, _) => None,
                (ClassifyMode::Personalized, Some(p)) => Some((p, method)),
                (ClassifyMode::Personalized, None) => {
                    return Err(CliError::new("usage", "personalized classification needs --embeddings"))
                }
            };
            commands::eval_classify(&config, embeddings)
        }
        Command::AnalyzeOverlap {
            reviews,
            mi_target,
            top_k,
        } => {
            set_reviews(&mut config, reviews);
            if let Some(t) = mi_target {
                config.analysis.mi_target = match t {
                    MiTargetArg::Sentiment => mtlue::analysis::MiTarget::Sentiment,
                    MiTargetArg::Genre => mtlue::analysis::MiTarget::Genre,
                };
            }
            if let Some(k) = top_k {
                config.analysis.top_k = k;
            }
            commands::analyze_overlap(&config)
        }
        Command::AnalyzeCrossgroup { reviews } => {
            set_reviews(&mut config, reviews);
            commands::analyze_crossgroup(&config)
        }
        Command::Export2d { reviews, embeddings } => {
            set_reviews(&mut config, reviews);
            commands::export_2d(&config, &embeddings.embeddings, &embeddings.method)
        }
    }
}
