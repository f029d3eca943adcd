//! `affect`: run the emotion-affect pipeline from the command line.
//!
//! Every command reads the optional `--config` file plus its own arguments,
//! writes its artifacts, and prints one summary line. Failures print
//! `error[<category>]: <message>` and exit with status 1; usage errors exit
//! with status 2.

mod commands;
mod config;
mod data;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::PipelineConfig;

#[derive(Debug, Parser)]
#[command(
    name = "affect",
    version,
    about = "Emotion intensity, ordinal and multi-label pipeline"
)]
struct Cli {
    /// Pipeline config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Choose the ordinal mapping jointly with the prediction set instead of
    /// mapping the first (best ensemble) prediction set.
    #[arg(long, global = true)]
    submission_strategy: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalize, tokenize and segment a dataset; writes `id<TAB>tokens`.
    Prep {
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the emotional word-vector network on a hashtag corpus.
    EvecTrain {
        corpus: PathBuf,
        #[arg(long)]
        dev: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Per-epoch losses as JSON.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Write a trained network's embedding layer as a word-vector table.
    EvecExport {
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the feature matrix for a dataset.
    Featurize {
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated blocks, overriding the config.
        #[arg(long, value_delimiter = ',')]
        blocks: Option<Vec<String>>,
        /// Fit a standardizer on this dataset, save it here and apply it.
        #[arg(long, conflicts_with = "scaler")]
        fit_scaler: Option<PathBuf>,
        /// Apply a saved standardizer.
        #[arg(long)]
        scaler: Option<PathBuf>,
    },
    /// Grid-search a kernel regressor on train/dev and save the winner.
    RegTrain {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        train_features: PathBuf,
        #[arg(long)]
        dev: PathBuf,
        #[arg(long)]
        dev_features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-config dev scores as JSON.
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Predict intensities with a saved regressor.
    RegPredict {
        model: PathBuf,
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Clip predictions to [0, 1].
        #[arg(long)]
        clip: bool,
    },
    /// Average prediction files, optionally choosing members greedily on dev.
    RegEnsemble {
        #[arg(required = true)]
        predictions: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Gold intensity dataset used for greedy member selection.
        #[arg(long)]
        select_with: Option<PathBuf>,
    },
    /// Fit an intensity-to-class mapping.
    OrdmapFit {
        /// Training intensities: a regression dataset or a prediction file.
        #[arg(long)]
        train_intensity: PathBuf,
        /// Ordinal-class training dataset (same ids).
        #[arg(long)]
        train: PathBuf,
        /// Dev prediction files, best ensemble first.
        #[arg(long)]
        dev_pred: Vec<PathBuf>,
        /// Ordinal-class dev dataset.
        #[arg(long)]
        dev: Option<PathBuf>,
        /// naive, scope, poly or auto; overrides the config.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Map predicted intensities to classes.
    OrdmapApply {
        mapper: PathBuf,
        predictions: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the Laplacian-regularized linear multi-label model.
    MlTrainRlr {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long, requires = "dev_features")]
        dev: Option<PathBuf>,
        #[arg(long)]
        dev_features: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train an ensemble of logistic classifier chains.
    MlTrainCc {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict label sets with RLR, chains, or their blend.
    MlPredict {
        dataset: PathBuf,
        features: PathBuf,
        #[arg(long, required_unless_present = "chains")]
        rlr: Option<PathBuf>,
        #[arg(long)]
        chains: Option<PathBuf>,
        /// RLR and chain weights, overriding the config.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        weights: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against a gold dataset.
    Eval {
        gold: PathBuf,
        predictions: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Mean score differences over paired sentences.
    BiasAudit {
        predictions: PathBuf,
        pairs: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

/// Settings shared by every command.
pub struct Ctx {
    pub cfg: PipelineConfig,
    pub submission_strategy: bool,
}

fn run(cli: Cli) -> Result<String> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let ctx = Ctx {
        cfg,
        submission_strategy: cli.submission_strategy,
    };
    use commands::*;
    match cli.command {
        Command::Prep { dataset, out } => text::prep(&ctx, &dataset, &out),
        Command::EvecTrain {
            corpus,
            dev,
            out,
            history,
        } => text::evec_train(&ctx, &corpus, dev.as_deref(), &out, history.as_deref()),
        Command::EvecExport { model, out } => text::evec_export(&model, &out),
        Command::Featurize {
            dataset,
            out,
            blocks,
            fit_scaler,
            scaler,
        } => text::featurize(&ctx, &dataset, &out, blocks, fit_scaler.as_deref(), scaler.as_deref()),
        Command::RegTrain {
            train,
            train_features,
            dev,
            dev_features,
            out,
            scores,
        } => regression::reg_train(
            &ctx,
            &train,
            &train_features,
            &dev,
            &dev_features,
            &out,
            scores.as_deref(),
        ),
        Command::RegPredict {
            model,
            features,
            out,
            clip,
        } => regression::reg_predict(&model, &features, &out, clip),
        Command::RegEnsemble {
            predictions,
            out,
            select_with,
        } => regression::reg_ensemble(&predictions, &out, select_with.as_deref()),
        Command::OrdmapFit {
            train_intensity,
            train,
            dev_pred,
            dev,
            method,
            out,
        } => regression::ordmap_fit(&ctx, &train_intensity, &train, &dev_pred, dev.as_deref(), method, &out),
        Command::OrdmapApply {
            mapper,
            predictions,
            out,
        } => regression::ordmap_apply(&mapper, &predictions, &out),
        Command::MlTrainRlr {
            train,
            features,
            dev,
            dev_features,
            out,
        } => multilabel::train_rlr(&ctx, &train, &features, dev.as_deref(), dev_features.as_deref(), &out),
        Command::MlTrainCc { train, features, out } => multilabel::train_cc(&ctx, &train, &features, &out),
        Command::MlPredict {
            dataset,
            features,
            rlr,
            chains,
            weights,
            out,
        } => multilabel::predict(
            &ctx,
            &dataset,
            &features,
            rlr.as_deref(),
            chains.as_deref(),
            weights,
            &out,
        ),
        Command::Eval {
            gold,
            predictions,
            json,
        } => evaluate::eval(&gold, &predictions, json.as_deref()),
        Command::BiasAudit {
            predictions,
            pairs,
            json,
        } => evaluate::bias_audit(&predictions, &pairs, json.as_deref()),
    }
}

fn category(err: &anyhow::Error) -> &'static str {
    err.chain()
        .find_map(|e| e.downcast_ref::<affect_core::Error>())
        .map_or("cli", affect_core::Error::category)
}

// Context lines down to the first library error, whose text already
// includes its own cause.
fn message(err: &anyhow::Error) -> String {
    let mut parts = Vec::new();
    for e in err.chain() {
        parts.push(e.to_string());
        if e.downcast_ref::<affect_core::Error>().is_some() {
            break;
        }
    }
    parts.join(": ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = message(&e).replace('\n', " ");
            eprintln!("error[{}]: {msg}", category(&e));
            ExitCode::from(1)
        }
    }
}
