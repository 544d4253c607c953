//! Command-line surface: the subcommands and their flags.
//!
//! Flags shared across stages keep one spelling everywhere (`--workdir`,
//! `--seed`, `--analysis-date`, …). Paths inside the working directory
//! are fixed names, so only external files (the dump XMLs, an alternate
//! model file) take path flags.

use std::fmt;
use std::path::PathBuf;

use chrono::{NaiveDate, NaiveDateTime};
use clap::{Parser, Subcommand, ValueEnum};

use unresolved_core::learner::{Algorithm, FeatureSet, DEFAULT_FOLDS};
use unresolved_core::topics::{AlphaMode, DEFAULT_ITERATIONS, DEFAULT_TOPICS};

use crate::commands::DEFAULT_SEED;

/// Mine a Q&A dump, featurize its questions, and predict which ones will
/// never see an accepted answer.
#[derive(Debug, Parser)]
#[command(name = "unresolved", version, about, max_term_width = 100)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic Posts/Users dump with known class structure.
    Synth(SynthArgs),
    /// Parse a dump, link threads, and select the labeled dataset.
    Ingest(IngestArgs),
    /// Train the topic model and compute per-question feature tables.
    Featurize(FeaturizeArgs),
    /// Fit one classifier on the whole feature table and save it.
    Train(TrainArgs),
    /// Cross-validate classifiers and write the evaluation report.
    Evaluate(EvaluateArgs),
    /// Label feature rows with a saved model.
    Predict(PredictArgs),
    /// Write descriptive statistics (five-point summaries, histograms).
    Report(ReportArgs),
}

/// Accepts `YYYY-MM-DD` (read as midnight) or a full `YYYY-MM-DDTHH:MM:SS`.
pub fn parse_date(text: &str) -> Result<NaiveDateTime, String> {
    if let Ok(stamp) = NaiveDateTime::parse_from_str(text, "%Y-%m-%dT%H:%M:%S") {
        return Ok(stamp);
    }
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight exists"))
        .map_err(|_| format!("expected YYYY-MM-DD or YYYY-MM-DDTHH:MM:SS, got {text:?}"))
}

#[derive(Debug, Parser)]
pub struct SynthArgs {
    /// Directory that receives the generated files.
    #[arg(long)]
    pub workdir: PathBuf,
    /// Number of dataset-eligible questions to generate.
    #[arg(long, default_value_t = 2000)]
    pub questions: usize,
    /// Fraction of the questions left without an accepted answer.
    #[arg(long, default_value_t = 0.5)]
    pub unresolved_fraction: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Snapshot date the dump pretends to be taken at.
    #[arg(long, value_parser = parse_date, default_value = "2015-02-18")]
    pub analysis_date: NaiveDateTime,
    /// Where to write the posts dump (default: WORKDIR/Posts.xml).
    #[arg(long)]
    pub posts: Option<PathBuf>,
    /// Where to write the users dump (default: WORKDIR/Users.xml).
    #[arg(long)]
    pub users: Option<PathBuf>,
    /// Fold count the dump should support; sizes below 2·folds warn.
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    pub folds: usize,
}

#[derive(Debug, Parser)]
pub struct IngestArgs {
    /// Posts dump (Stack Exchange Posts.xml format).
    #[arg(long)]
    pub posts: PathBuf,
    /// Users dump (Stack Exchange Users.xml format).
    #[arg(long)]
    pub users: PathBuf,
    #[arg(long)]
    pub workdir: PathBuf,
    /// Minimum question age in days at the analysis date.
    #[arg(long, default_value_t = 183)]
    pub min_age_days: u32,
    /// Minimum number of answers a question must have.
    #[arg(long, default_value_t = 10)]
    pub min_answers: u32,
    /// Snapshot date the dump was taken at; ages and delays are measured
    /// against it.
    #[arg(long, value_parser = parse_date)]
    pub analysis_date: NaiveDateTime,
}

#[derive(Debug, Parser)]
pub struct FeaturizeArgs {
    #[arg(long)]
    pub workdir: PathBuf,
    /// Number of LDA topics (K).
    #[arg(long, default_value_t = DEFAULT_TOPICS)]
    pub topics: usize,
    /// Gibbs sweeps over the corpus.
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    pub lda_iters: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Corpus topic-weight convention used by the entropy and similarity
    /// metrics.
    #[arg(long, value_enum, default_value_t = AlphaModeArg::Marginal)]
    pub alpha_mode: AlphaModeArg,
}

#[derive(Debug, Parser)]
pub struct TrainArgs {
    #[arg(long)]
    pub workdir: PathBuf,
    #[arg(long, value_enum)]
    pub algorithm: AlgorithmArg,
    #[arg(long, value_enum, default_value_t = FeatureSetArg::Full)]
    pub feature_set: FeatureSetArg,
    /// Where to write the model (default: WORKDIR/model.json).
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Parser)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub workdir: PathBuf,
    /// Which classifier(s) to evaluate.
    #[arg(long, value_enum, default_value_t = AlgorithmArg::All)]
    pub algorithm: AlgorithmArg,
    /// Restrict to one feature set; both are evaluated when omitted.
    #[arg(long, value_enum)]
    pub feature_set: Option<FeatureSetArg>,
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    pub folds: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Parser)]
pub struct PredictArgs {
    #[arg(long)]
    pub workdir: PathBuf,
    /// Model file to apply (default: WORKDIR/model.json).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Feature CSV to label (default: WORKDIR/features.csv).
    #[arg(long)]
    pub features: Option<PathBuf>,
}

#[derive(Debug, Parser)]
pub struct ReportArgs {
    #[arg(long)]
    pub workdir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    /// C4.5-style decision tree.
    Tree,
    /// Logistic regression.
    Logistic,
    /// Gaussian naive Bayes.
    Nb,
    /// Every classifier (evaluate only).
    All,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(arg: AlgorithmArg) -> Algorithm {
        match arg {
            AlgorithmArg::Tree => Algorithm::DecisionTree,
            AlgorithmArg::Logistic => Algorithm::LogisticRegression,
            AlgorithmArg::Nb => Algorithm::NaiveBayes,
            AlgorithmArg::All => unreachable!("`all` is expanded before conversion"),
        }
    }
}

impl fmt::Display for AlgorithmArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgorithmArg::Tree => "tree",
            AlgorithmArg::Logistic => "logistic",
            AlgorithmArg::Nb => "nb",
            AlgorithmArg::All => "all",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureSetArg {
    /// Topic entropy, rejection ratio, access delay, votes, reputation.
    Full,
    /// Rejection ratio, access delay, votes.
    Reduced,
}

impl From<FeatureSetArg> for FeatureSet {
    fn from(arg: FeatureSetArg) -> FeatureSet {
        match arg {
            FeatureSetArg::Full => FeatureSet::Full,
            FeatureSetArg::Reduced => FeatureSet::Reduced,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlphaModeArg {
    /// Weight topics by their trained corpus frequency.
    Marginal,
    /// Weight topics by the symmetric prior (uniform).
    Prior,
}

impl From<AlphaModeArg> for AlphaMode {
    fn from(arg: AlphaModeArg) -> AlphaMode {
        match arg {
            AlphaModeArg::Marginal => AlphaMode::Marginal,
            AlphaModeArg::Prior => AlphaMode::Prior,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn dates_parse_at_midnight_or_with_time() {
        let midnight = parse_date("2015-02-18").unwrap();
        assert_eq!(midnight.to_string(), "2015-02-18 00:00:00");
        let stamped = parse_date("2015-02-18T10:31:22").unwrap();
        assert_eq!(stamped.to_string(), "2015-02-18 10:31:22");
        assert!(parse_date("18/02/2015").is_err());
        assert!(parse_date("2015-13-01").is_err());
    }

    #[test]
    fn evaluate_defaults_cover_all_algorithms_and_both_sets() {
        let cli = Cli::try_parse_from(["unresolved", "evaluate", "--workdir", "w"]).unwrap();
        match cli.command {
            Command::Evaluate(args) => {
                assert_eq!(args.algorithm, AlgorithmArg::All);
                assert_eq!(args.feature_set, None);
                assert_eq!(args.folds, DEFAULT_FOLDS);
            }
            other => panic!("parsed {other:?}"),
        }
    }

    #[test]
    fn missing_required_flag_is_a_parse_error() {
        // ingest without --posts (the "missing dump path" usage error).
        let err = Cli::try_parse_from([
            "unresolved",
            "ingest",
            "--users",
            "u.xml",
            "--workdir",
            "w",
            "--analysis-date",
            "2015-02-18",
        ])
        .unwrap_err();
        assert!(err.to_string().contains("--posts"));
    }

    #[test]
    fn algorithm_names_match_the_flag_grammar() {
        for (name, expected) in [
            ("tree", AlgorithmArg::Tree),
            ("logistic", AlgorithmArg::Logistic),
            ("nb", AlgorithmArg::Nb),
            ("all", AlgorithmArg::All),
        ] {
            let cli = Cli::try_parse_from([
                "unresolved",
                "evaluate",
                "--workdir",
                "w",
                "--algorithm",
                name,
            ])
            .unwrap();
            match cli.command {
                Command::Evaluate(args) => assert_eq!(args.algorithm, expected),
                other => panic!("parsed {other:?}"),
            }
        }
    }
}
