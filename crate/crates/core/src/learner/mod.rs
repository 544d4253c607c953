//! Classifier training and stratified cross-validation.
//!
//! Three learners share one contract: fit on dense feature rows, emit a
//! probability for the Unresolved class. Everything fold-dependent —
//! imputation means and the model itself — is fit on training rows only,
//! and the held-out predictions from all folds are pooled into a single
//! confusion matrix.

pub mod bayes;
pub mod featfile;
pub mod logistic;
pub mod tree;

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Label;
pub use bayes::{train_bayes, BayesModel};
pub use featfile::{read_feature_csv, write_feature_csv, FeatureRecord, FEATURE_CSV_HEADER};
pub use logistic::{train_logistic, LogisticModel};
pub use tree::{train_tree, TreeModel, TreeParams};

pub const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    DecisionTree,
    LogisticRegression,
    NaiveBayes,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] =
        [Algorithm::DecisionTree, Algorithm::LogisticRegression, Algorithm::NaiveBayes];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Algorithm::DecisionTree => "DecisionTree",
            Algorithm::LogisticRegression => "LogisticRegression",
            Algorithm::NaiveBayes => "NaiveBayes",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    Full,
    Reduced,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 2] = [FeatureSet::Full, FeatureSet::Reduced];

    /// Column names drawn from the feature table, in matrix order.
    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            FeatureSet::Full => &["te", "arr", "lad_log", "votes", "rep_log"],
            FeatureSet::Reduced => &["arr", "lad_log", "votes"],
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureSet::Full => "full",
            FeatureSet::Reduced => "reduced",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub question_id: u64,
    /// May contain NaN for values that were never observed; the per-fold
    /// imputer fills them before any model sees the row.
    pub values: Vec<f64>,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub feature_names: Vec<String>,
    /// Sorted by question id.
    pub rows: Vec<FeatureRow>,
}

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("the feature table is empty")]
    EmptyDataset,
    #[error("every row is labelled {label}; training needs both classes")]
    SingleClass { label: Label },
    #[error("cross-validation needs at least two folds, got {folds}")]
    NotEnoughFolds { folds: usize },
    #[error(
        "training rows for fold {fold} contain a single class; \
         use fewer folds or more data"
    )]
    FoldTrainingSingleClass { fold: usize },
    #[error("question {question_id}, column {column}: value is not finite after imputation")]
    NonFinite { question_id: u64, column: String },
}

/// Select the columns of `set` from the feature table and order rows by
/// question id.
pub fn assemble(
    records: &[FeatureRecord],
    set: FeatureSet,
) -> Result<FeatureMatrix, LearnError> {
    if records.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    let mut rows: Vec<FeatureRow> = records
        .iter()
        .map(|r| {
            let values = set
                .columns()
                .iter()
                .map(|&column| match column {
                    "te" => r.te,
                    "arr" => r.arr,
                    "lad_log" => r.lad_log,
                    "votes" => r.votes as f64,
                    "rep_log" => r.rep_log,
                    other => unreachable!("unknown feature column {other}"),
                })
                .collect();
            FeatureRow { question_id: r.question_id, values, label: r.label }
        })
        .collect();
    rows.sort_by_key(|r| r.question_id);

    let first = rows[0].label;
    if rows.iter().all(|r| r.label == first) {
        return Err(LearnError::SingleClass { label: first });
    }
    Ok(FeatureMatrix {
        feature_names: set.columns().iter().map(|s| s.to_string()).collect(),
        rows,
    })
}

/// Column-mean imputation for NaN entries. Means come from whatever rows
/// the imputer was fit on; a column with no observed values falls back
/// to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imputer {
    pub means: Vec<f64>,
}

impl Imputer {
    pub fn fit(rows: &[&FeatureRow]) -> Imputer {
        let dims = rows.first().map_or(0, |r| r.values.len());
        let mut means = Vec::with_capacity(dims);
        for column in 0..dims {
            let mut sum = 0.0;
            let mut count = 0usize;
            for row in rows {
                let v = row.values[column];
                if !v.is_nan() {
                    sum += v;
                    count += 1;
                }
            }
            means.push(if count > 0 { sum / count as f64 } else { 0.0 });
        }
        Imputer { means }
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(&self.means)
            .map(|(&v, &m)| if v.is_nan() { m } else { v })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrainedModel {
    DecisionTree(TreeModel),
    LogisticRegression(LogisticModel),
    NaiveBayes(BayesModel),
}

impl TrainedModel {
    /// Probability of Unresolved for a dense (imputed) feature row.
    pub fn predict_prob(&self, features: &[f64]) -> f64 {
        match self {
            TrainedModel::DecisionTree(m) => m.predict_prob(features),
            TrainedModel::LogisticRegression(m) => m.predict_prob(features),
            TrainedModel::NaiveBayes(m) => m.predict_prob(features),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            TrainedModel::DecisionTree(_) => Algorithm::DecisionTree,
            TrainedModel::LogisticRegression(_) => Algorithm::LogisticRegression,
            TrainedModel::NaiveBayes(_) => Algorithm::NaiveBayes,
        }
    }
}

/// Threshold rule shared by every learner: ties go to Unresolved.
pub fn predict_label(prob_unresolved: f64) -> Label {
    if prob_unresolved >= 0.5 {
        Label::Unresolved
    } else {
        Label::Resolved
    }
}

/// An imputer and model fit together on the same training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub imputer: Imputer,
    pub model: TrainedModel,
}

impl FittedPipeline {
    pub fn predict(&self, values: &[f64]) -> (Label, f64) {
        let dense = self.imputer.apply(values);
        let p = self.model.predict_prob(&dense);
        (predict_label(p), p)
    }
}

/// Fit imputer and model on exactly these rows.
pub fn fit_pipeline(
    algorithm: Algorithm,
    rows: &[&FeatureRow],
) -> Result<FittedPipeline, LearnError> {
    if rows.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    let first = rows[0].label;
    if rows.iter().all(|r| r.label == first) {
        return Err(LearnError::SingleClass { label: first });
    }
    let imputer = Imputer::fit(rows);
    let mut x = Vec::with_capacity(rows.len());
    let mut y = Vec::with_capacity(rows.len());
    for row in rows {
        let dense = imputer.apply(&row.values);
        if let Some(column) = dense.iter().position(|v| !v.is_finite()) {
            return Err(LearnError::NonFinite {
                question_id: row.question_id,
                column: column.to_string(),
            });
        }
        x.push(dense);
        y.push(row.label);
    }
    let model = match algorithm {
        Algorithm::DecisionTree => {
            TrainedModel::DecisionTree(train_tree(&x, &y, TreeParams::default()))
        }
        Algorithm::LogisticRegression => {
            TrainedModel::LogisticRegression(train_logistic(&x, &y))
        }
        Algorithm::NaiveBayes => TrainedModel::NaiveBayes(train_bayes(&x, &y)),
    };
    Ok(FittedPipeline { imputer, model })
}

/// Assign each row a fold in 0..folds, stratified by label: within each
/// class the rows are shuffled (seeded) and dealt round-robin, so per-class
/// fold sizes differ by at most one.
pub fn stratified_folds(
    matrix: &FeatureMatrix,
    folds: usize,
    seed: u64,
) -> Result<Vec<usize>, LearnError> {
    if folds < 2 {
        return Err(LearnError::NotEnoughFolds { folds });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; matrix.rows.len()];
    for class in [Label::Unresolved, Label::Resolved] {
        let mut members: Vec<usize> = matrix
            .rows
            .iter()
            .enumerate()
            .filter(|(_, row)| row.label == class)
            .map(|(i, _)| i)
            .collect();
        members.shuffle(&mut rng);
        for (position, &row) in members.iter().enumerate() {
            assignment[row] = position % folds;
        }
    }
    Ok(assignment)
}

/// Pooled confusion matrix; Unresolved is the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
}

impl Confusion {
    pub fn record(&mut self, actual: Label, predicted: Label) {
        match (actual, predicted) {
            (Label::Unresolved, Label::Unresolved) => self.true_pos += 1,
            (Label::Resolved, Label::Unresolved) => self.false_pos += 1,
            (Label::Unresolved, Label::Resolved) => self.false_neg += 1,
            (Label::Resolved, Label::Resolved) => self.true_neg += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }

    pub fn accuracy(&self) -> f64 {
        (self.true_pos + self.true_neg) as f64 / self.total() as f64
    }

    /// Precision for Unresolved; None when nothing was predicted positive.
    pub fn precision(&self) -> Option<f64> {
        let denom = self.true_pos + self.false_pos;
        (denom > 0).then(|| self.true_pos as f64 / denom as f64)
    }

    /// Recall for Unresolved; None when no positives exist.
    pub fn recall(&self) -> Option<f64> {
        let denom = self.true_pos + self.false_neg;
        (denom > 0).then(|| self.true_pos as f64 / denom as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub algorithm: Algorithm,
    pub feature_set: FeatureSet,
    pub folds: usize,
    pub seed: u64,
    pub confusion: Confusion,
    pub accuracy: f64,
    pub precision_unresolved: Option<f64>,
    pub recall_unresolved: Option<f64>,
}

/// Stratified k-fold cross-validation with pooled metrics. Every fold's
/// imputer and model are fit on that fold's training rows alone.
pub fn cross_validate(
    algorithm: Algorithm,
    feature_set: FeatureSet,
    matrix: &FeatureMatrix,
    folds: usize,
    seed: u64,
) -> Result<EvaluationReport, LearnError> {
    let assignment = stratified_folds(matrix, folds, seed)?;
    let mut confusion = Confusion::default();
    for fold in 0..folds {
        let train: Vec<&FeatureRow> = matrix
            .rows
            .iter()
            .zip(&assignment)
            .filter(|(_, &f)| f != fold)
            .map(|(row, _)| row)
            .collect();
        let test: Vec<&FeatureRow> = matrix
            .rows
            .iter()
            .zip(&assignment)
            .filter(|(_, &f)| f == fold)
            .map(|(row, _)| row)
            .collect();
        if test.is_empty() {
            continue;
        }
        let pipeline = fit_pipeline(algorithm, &train).map_err(|e| match e {
            LearnError::SingleClass { .. } | LearnError::EmptyDataset => {
                LearnError::FoldTrainingSingleClass { fold }
            }
            other => other,
        })?;
        for row in test {
            let (predicted, _) = pipeline.predict(&row.values);
            confusion.record(row.label, predicted);
        }
    }
    debug_assert_eq!(confusion.total(), matrix.rows.len());
    Ok(EvaluationReport {
        algorithm,
        feature_set,
        folds,
        seed,
        confusion,
        accuracy: confusion.accuracy(),
        precision_unresolved: confusion.precision(),
        recall_unresolved: confusion.recall(),
    })
}

/// Serializable bundle written by training: enough to predict later and to
/// refuse feature tables assembled with a different column set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub algorithm: Algorithm,
    pub feature_set: FeatureSet,
    pub feature_names: Vec<String>,
    pub pipeline: FittedPipeline,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(question_id: u64, values: [f64; 5], label: Label) -> FeatureRecord {
        FeatureRecord {
            question_id,
            te: values[0],
            arr: values[1],
            lad_log: values[2],
            votes: values[3] as i64,
            rep_log: values[4],
            label,
        }
    }

    /// Two well-separated clusters, one per class.
    fn separable_records(n_per_class: usize) -> Vec<FeatureRecord> {
        let mut records = Vec::new();
        for i in 0..n_per_class {
            let jitter = (i % 5) as f64 * 0.1;
            records.push(record(
                i as u64 * 2 + 1,
                [2.0 + jitter, 0.8, 4.0 + jitter, -1.0, 4.0],
                Label::Unresolved,
            ));
            records.push(record(
                i as u64 * 2 + 2,
                [0.5 + jitter, 0.1, 1.0 + jitter, 12.0, 8.0],
                Label::Resolved,
            ));
        }
        records
    }

    #[test]
    fn pooled_metrics_match_hand_computation() {
        let confusion = Confusion { true_pos: 50, false_pos: 10, false_neg: 20, true_neg: 20 };
        assert!((confusion.accuracy() - 0.70).abs() < 1e-12);
        assert!((confusion.precision().unwrap() - 0.8333).abs() < 1e-4);
        assert!((confusion.recall().unwrap() - 0.7143).abs() < 1e-4);
    }

    #[test]
    fn tie_goes_to_unresolved() {
        assert_eq!(predict_label(0.5), Label::Unresolved);
        assert_eq!(predict_label(0.4999), Label::Resolved);
        assert_eq!(predict_label(0.5001), Label::Unresolved);
    }

    #[test]
    fn assemble_selects_columns_and_sorts() {
        let records = vec![
            record(30, [0.1, 0.2, 0.3, 4.0, 0.5], Label::Resolved),
            record(10, [1.1, 1.2, 1.3, -2.0, 1.5], Label::Unresolved),
        ];
        let full = assemble(&records, FeatureSet::Full).unwrap();
        assert_eq!(full.feature_names, ["te", "arr", "lad_log", "votes", "rep_log"]);
        assert_eq!(full.rows[0].question_id, 10);
        assert_eq!(full.rows[0].values, vec![1.1, 1.2, 1.3, -2.0, 1.5]);

        let reduced = assemble(&records, FeatureSet::Reduced).unwrap();
        assert_eq!(reduced.feature_names, ["arr", "lad_log", "votes"]);
        assert_eq!(reduced.rows[1].values, vec![0.2, 0.3, 4.0]);
    }

    #[test]
    fn assemble_rejects_degenerate_tables() {
        assert!(matches!(assemble(&[], FeatureSet::Full), Err(LearnError::EmptyDataset)));
        let one_class = vec![
            record(1, [0.0; 5], Label::Resolved),
            record(2, [1.0; 5], Label::Resolved),
        ];
        match assemble(&one_class, FeatureSet::Full) {
            Err(LearnError::SingleClass { label }) => assert_eq!(label, Label::Resolved),
            other => panic!("expected single-class error, got {other:?}"),
        }
    }

    #[test]
    fn stratified_folds_balance_each_class() {
        let matrix = assemble(&separable_records(51), FeatureSet::Full).unwrap();
        // 51 Unresolved + 51 Resolved rows into 10 folds.
        let assignment = stratified_folds(&matrix, 10, 7).unwrap();
        for class in [Label::Unresolved, Label::Resolved] {
            let mut per_fold = vec![0usize; 10];
            for (row, &fold) in matrix.rows.iter().zip(&assignment) {
                if row.label == class {
                    per_fold[fold] += 1;
                }
            }
            let min = per_fold.iter().min().unwrap();
            let max = per_fold.iter().max().unwrap();
            assert!(max - min <= 1, "class {class:?} fold sizes {per_fold:?}");
        }
    }

    #[test]
    fn fold_assignment_is_seed_deterministic() {
        let matrix = assemble(&separable_records(30), FeatureSet::Full).unwrap();
        let a = stratified_folds(&matrix, 10, 42).unwrap();
        let b = stratified_folds(&matrix, 10, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_few_folds_is_an_error() {
        let matrix = assemble(&separable_records(10), FeatureSet::Full).unwrap();
        assert!(matches!(
            cross_validate(Algorithm::DecisionTree, FeatureSet::Full, &matrix, 1, 0),
            Err(LearnError::NotEnoughFolds { folds: 1 })
        ));
    }

    #[test]
    fn minority_class_smaller_than_folds_fails() {
        // A single minority row: when the fold holding it is tested, the
        // training set is left with only the majority class.
        let mut records = separable_records(6)
            .into_iter()
            .filter(|r| r.label == Label::Resolved)
            .collect::<Vec<_>>();
        records.push(record(100, [9.0; 5], Label::Unresolved));
        let matrix = assemble(&records, FeatureSet::Full).unwrap();
        let result = cross_validate(Algorithm::NaiveBayes, FeatureSet::Full, &matrix, 3, 1);
        assert!(
            matches!(result, Err(LearnError::FoldTrainingSingleClass { .. })),
            "got {result:?}"
        );
    }

    #[test]
    fn cross_validation_pools_every_row_once() {
        let matrix = assemble(&separable_records(25), FeatureSet::Full).unwrap();
        for algorithm in Algorithm::ALL {
            let report =
                cross_validate(algorithm, FeatureSet::Full, &matrix, 10, 3).unwrap();
            assert_eq!(report.confusion.total(), matrix.rows.len(), "{algorithm}");
            assert!(report.accuracy > 0.9, "{algorithm}: accuracy {}", report.accuracy);
        }
    }

    #[test]
    fn held_out_rows_cannot_influence_fitting() {
        let matrix = assemble(&separable_records(20), FeatureSet::Full).unwrap();
        let train: Vec<&FeatureRow> = matrix.rows.iter().take(30).collect();
        let baseline = fit_pipeline(Algorithm::LogisticRegression, &train).unwrap();

        // Mutating rows outside the training slice must not change a thing.
        let mut mutated = matrix.clone();
        for row in mutated.rows.iter_mut().skip(30) {
            for v in &mut row.values {
                *v += 1000.0;
            }
        }
        let train_again: Vec<&FeatureRow> = mutated.rows.iter().take(30).collect();
        let refit = fit_pipeline(Algorithm::LogisticRegression, &train_again).unwrap();
        assert_eq!(baseline, refit);
    }

    #[test]
    fn imputer_uses_training_means_only() {
        let rows = vec![
            FeatureRow { question_id: 1, values: vec![1.0, f64::NAN], label: Label::Resolved },
            FeatureRow { question_id: 2, values: vec![3.0, 10.0], label: Label::Unresolved },
        ];
        let refs: Vec<&FeatureRow> = rows.iter().collect();
        let imputer = Imputer::fit(&refs);
        assert_eq!(imputer.means, vec![2.0, 10.0]);
        assert_eq!(imputer.apply(&[f64::NAN, f64::NAN]), vec![2.0, 10.0]);
        assert_eq!(imputer.apply(&[5.0, 6.0]), vec![5.0, 6.0]);
    }

    #[test]
    fn nan_rows_survive_cross_validation() {
        let mut records = separable_records(20);
        records[0].arr = f64::NAN;
        records[7].te = f64::NAN;
        let matrix = assemble(&records, FeatureSet::Full).unwrap();
        let report =
            cross_validate(Algorithm::NaiveBayes, FeatureSet::Full, &matrix, 5, 9).unwrap();
        assert_eq!(report.confusion.total(), matrix.rows.len());
    }

    #[test]
    fn report_serialization_is_stable() {
        let matrix = assemble(&separable_records(15), FeatureSet::Reduced).unwrap();
        let report =
            cross_validate(Algorithm::DecisionTree, FeatureSet::Reduced, &matrix, 5, 11)
                .unwrap();
        let a = serde_json::to_string_pretty(&report).unwrap();
        let again =
            cross_validate(Algorithm::DecisionTree, FeatureSet::Reduced, &matrix, 5, 11)
                .unwrap();
        let b = serde_json::to_string_pretty(&again).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"algorithm\": \"decision_tree\""));
        assert!(a.contains("\"feature_set\": \"reduced\""));
    }

    #[test]
    fn model_file_round_trips_through_json() {
        let matrix = assemble(&separable_records(10), FeatureSet::Reduced).unwrap();
        let refs: Vec<&FeatureRow> = matrix.rows.iter().collect();
        let pipeline = fit_pipeline(Algorithm::NaiveBayes, &refs).unwrap();
        let file = ModelFile {
            algorithm: Algorithm::NaiveBayes,
            feature_set: FeatureSet::Reduced,
            feature_names: matrix.feature_names.clone(),
            pipeline,
        };
        let json = serde_json::to_string_pretty(&file).unwrap();
        let back: ModelFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back, file);
        let (label, p) = back.pipeline.predict(&matrix.rows[0].values);
        assert_eq!(label, matrix.rows[0].label);
        assert!(p > 0.5);
    }
}
