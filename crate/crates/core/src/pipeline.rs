//! Featurization and descriptive statistics over a labelled dataset.
//!
//! This module turns thread records into per-question metric rows: topic
//! entropy and similarity from a trained topic model, text and code
//! readability, the asker's rejection ratio and access delay, and the
//! popularity figures. Dataset-level imputation (rejection-ratio mean,
//! readability median) happens here, once, with flags kept on every row,
//! and the resulting table feeds both the learner's feature CSV and the
//! report summaries.

use std::io::{Read, Write};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::content::{segment_html, text_stats};
use crate::ingest::{Label, ThreadRecord};
use crate::learner::FeatureRecord;
use crate::metrics::{
    answer_rejection_ratio, last_access_delay, log1p_transform, popularity, MetricsError,
};
use crate::readability::{
    code_features, code_readability, text_readability, zscore_code_features, ScorerWeights,
    WeightsError,
};
use crate::topics::{
    build_corpus, corpus_alpha, doc_theta, top_topics, topic_entropy, topic_similarity,
    train_lda, AlphaMode, Corpus, TopicModel, TopicsError, TOP_TOPIC_COUNT,
};

/// Bins used by every report histogram.
pub const HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("the dataset has no thread records")]
    EmptyDataset,
    #[error(transparent)]
    Topics(#[from] TopicsError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Weights(#[from] WeightsError),
    #[error(
        "topic model does not fit this dataset: model has {model_vocab} vocabulary entries \
         and {model_docs} documents, corpus has {corpus_vocab} and {corpus_docs}"
    )]
    ModelMismatch {
        model_vocab: usize,
        model_docs: usize,
        corpus_vocab: usize,
        corpus_docs: usize,
    },
    #[error("question {question_id} is missing from the topic corpus")]
    MissingDocument { question_id: u64 },
    #[error("feature table I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("feature table is malformed: {0}")]
    Csv(#[from] csv::Error),
}

/// Every metric for one question, after imputation. Serialises as one row
/// of the extended feature table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionFeatures {
    pub question_id: u64,
    pub label: Label,
    /// Topic entropy of the question (natural log).
    pub te: f64,
    /// Topic similarity between question and best answer.
    pub ts: f64,
    /// Average readability grade of the question prose.
    pub tr: f64,
    pub tr_imputed: bool,
    /// Code readability score in (0, 1).
    pub cr: f64,
    /// Answer rejection ratio of the asker, target question excluded.
    pub arr: f64,
    pub arr_imputed: bool,
    /// Whole days between the asker's last access and the analysis date.
    pub lad_days: u64,
    pub lad_log: f64,
    pub votes: i64,
    pub reputation: u64,
    pub rep_log: f64,
}

/// The featurized dataset plus the imputation values that filled its gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    /// Ascending by question id.
    pub rows: Vec<QuestionFeatures>,
    /// Mean of the defined rejection ratios, used where none was defined.
    pub arr_fill: f64,
    /// Median of the defined readability grades, used for prose-free posts.
    pub tr_fill: f64,
}

/// Knobs for topic-model training inside featurization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopicConfig {
    pub topics: usize,
    pub iterations: usize,
    pub seed: u64,
    pub alpha_mode: AlphaMode,
}

pub struct FeaturizeOutput {
    pub corpus: Corpus,
    pub model: TopicModel,
    pub table: FeatureTable,
}

/// Build the corpus, train the topic model, and compute every metric row.
/// `analysis_date` is the snapshot instant the selection criteria used.
pub fn featurize(
    records: &[ThreadRecord],
    analysis_date: NaiveDateTime,
    topic_config: &TopicConfig,
    weights: &ScorerWeights,
) -> Result<FeaturizeOutput, PipelineError> {
    if records.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    let corpus = build_corpus(records)?;
    let hyper_alpha = crate::topics::default_hyper_alpha(topic_config.topics);
    let model = train_lda(
        &corpus,
        topic_config.topics,
        hyper_alpha,
        crate::topics::DEFAULT_HYPER_BETA,
        topic_config.iterations,
        topic_config.seed,
    )?;
    let table = compute_features(
        records,
        analysis_date,
        &corpus,
        &model,
        topic_config.alpha_mode,
        weights,
    )?;
    Ok(FeaturizeOutput { corpus, model, table })
}

/// Compute metric rows against an already-trained model (e.g. one loaded
/// from disk). The model must have been trained on this dataset's corpus.
pub fn compute_features(
    records: &[ThreadRecord],
    analysis_date: NaiveDateTime,
    corpus: &Corpus,
    model: &TopicModel,
    alpha_mode: AlphaMode,
    weights: &ScorerWeights,
) -> Result<FeatureTable, PipelineError> {
    if records.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    if model.vocab_size != corpus.vocab_size() || model.n_docs() != corpus.n_docs() {
        return Err(PipelineError::ModelMismatch {
            model_vocab: model.vocab_size,
            model_docs: model.n_docs(),
            corpus_vocab: corpus.vocab_size(),
            corpus_docs: corpus.n_docs(),
        });
    }
    let mut records: Vec<&ThreadRecord> = records.iter().collect();
    records.sort_by_key(|r| r.question_id);

    // Code readability is z-scored across the dataset's questions, so the
    // feature vectors are collected up front.
    let code_vectors: Vec<_> = records
        .iter()
        .map(|r| code_features(&segment_html(&r.body).code_blocks))
        .collect();
    let z_rows = zscore_code_features(&code_vectors);

    let alpha = corpus_alpha(model, alpha_mode);

    struct Draft {
        question_id: u64,
        label: Label,
        te: f64,
        ts: f64,
        tr: Option<f64>,
        cr: f64,
        arr: Option<f64>,
        lad_days: u64,
        votes: i64,
        reputation: u64,
    }

    let mut drafts = Vec::with_capacity(records.len());
    for (record, z) in records.iter().zip(&z_rows) {
        let question_id = record.question_id;
        let q_doc = corpus
            .question_doc(question_id)
            .ok_or(PipelineError::MissingDocument { question_id })?;
        let a_doc = corpus
            .answer_doc(question_id)
            .ok_or(PipelineError::MissingDocument { question_id })?;
        let q_theta = doc_theta(model, q_doc);
        let a_theta = doc_theta(model, a_doc);
        let top = top_topics(&q_theta, TOP_TOPIC_COUNT);

        let prose = segment_html(&record.body).prose;
        let tr = text_readability(&text_stats(&prose)).average;
        let cr = code_readability(z, weights)?;

        let lad_days = last_access_delay(&record.owner, analysis_date)?;
        let pop = popularity(record.score, record.owner.reputation);

        drafts.push(Draft {
            question_id,
            label: record.label,
            te: topic_entropy(&q_theta, &alpha, &top),
            ts: topic_similarity(&q_theta, &a_theta, &alpha, &top),
            tr,
            cr,
            arr: answer_rejection_ratio(&record.owner, question_id),
            lad_days,
            votes: pop.votes,
            reputation: record.owner.reputation,
        });
    }

    let arr_fill = mean(drafts.iter().filter_map(|d| d.arr)).unwrap_or(0.0);
    let tr_fill = median(drafts.iter().filter_map(|d| d.tr)).unwrap_or(0.0);

    let rows = drafts
        .into_iter()
        .map(|d| QuestionFeatures {
            question_id: d.question_id,
            label: d.label,
            te: d.te,
            ts: d.ts,
            tr: d.tr.unwrap_or(tr_fill),
            tr_imputed: d.tr.is_none(),
            cr: d.cr,
            arr: d.arr.unwrap_or(arr_fill),
            arr_imputed: d.arr.is_none(),
            lad_days: d.lad_days,
            lad_log: log1p_transform(d.lad_days as f64),
            votes: d.votes,
            reputation: d.reputation,
            rep_log: log1p_transform(d.reputation as f64),
        })
        .collect();

    Ok(FeatureTable { rows, arr_fill, tr_fill })
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        sum += v;
        count += 1;
    }
    (count > 0).then(|| sum / count as f64)
}

fn median(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut sorted: Vec<f64> = values.collect();
    if sorted.is_empty() {
        return None;
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("grades are finite"));
    let n = sorted.len();
    Some(if n % 2 == 1 { sorted[n / 2] } else { (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0 })
}

/// The learner's view of the table: the model columns only.
pub fn to_feature_records(table: &FeatureTable) -> Vec<FeatureRecord> {
    table
        .rows
        .iter()
        .map(|row| FeatureRecord {
            question_id: row.question_id,
            te: row.te,
            arr: row.arr,
            lad_log: row.lad_log,
            votes: row.votes,
            rep_log: row.rep_log,
            label: row.label,
        })
        .collect()
}

/// Write the extended table (every metric, raw and transformed, plus
/// imputation flags) as CSV.
pub fn write_extended_csv<W: Write>(
    writer: W,
    rows: &[QuestionFeatures],
) -> Result<(), PipelineError> {
    let mut out = csv::Writer::from_writer(writer);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_extended_csv<R: Read>(reader: R) -> Result<Vec<QuestionFeatures>, PipelineError> {
    let mut input = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for row in input.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

/// Metrics covered by the descriptive report, with accessors.
pub const REPORT_METRICS: [(&str, fn(&QuestionFeatures) -> f64); 10] = [
    ("te", |r| r.te),
    ("ts", |r| r.ts),
    ("tr", |r| r.tr),
    ("cr", |r| r.cr),
    ("arr", |r| r.arr),
    ("lad_days", |r| r.lad_days as f64),
    ("lad_log", |r| r.lad_log),
    ("votes", |r| r.votes as f64),
    ("reputation", |r| r.reputation as f64),
    ("rep_log", |r| r.rep_log),
];

/// Five-point summary plus mean and a fixed-bin histogram for one metric
/// within one class. Histogram edges are shared by both classes of a
/// metric so their shapes are comparable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: String,
    pub label: Label,
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Lower edge of the shared histogram range.
    pub bin_lo: f64,
    /// Upper edge of the shared histogram range.
    pub bin_hi: f64,
    pub bins: Vec<usize>,
}

/// Linear-interpolation quantile over a sorted slice (the convention of
/// most statistics packages): q(p) at rank (n−1)·p.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let rank = (n - 1) as f64 * p;
    let below = rank.floor() as usize;
    let above = rank.ceil() as usize;
    let weight = rank - below as f64;
    sorted[below] * (1.0 - weight) + sorted[above] * weight
}

fn histogram(values: &[f64], lo: f64, hi: f64) -> Vec<usize> {
    let mut bins = vec![0usize; HISTOGRAM_BINS];
    let width = hi - lo;
    for &v in values {
        let index = if width <= 0.0 {
            0
        } else {
            // The maximum lands in the last bin instead of one past it.
            (((v - lo) / width * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1)
        };
        bins[index] += 1;
    }
    bins
}

/// Per-metric, per-class descriptive statistics. Order: REPORT_METRICS
/// order, Unresolved before Resolved within each metric.
pub fn summarize(rows: &[QuestionFeatures]) -> Vec<MetricSummary> {
    let mut summaries = Vec::new();
    for (metric, accessor) in REPORT_METRICS {
        let all: Vec<f64> = rows.iter().map(accessor).collect();
        let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for class in [Label::Unresolved, Label::Resolved] {
            let mut values: Vec<f64> =
                rows.iter().filter(|r| r.label == class).map(accessor).collect();
            if values.is_empty() {
                continue;
            }
            values.sort_by(|a, b| a.partial_cmp(b).expect("metrics are finite"));
            let count = values.len();
            summaries.push(MetricSummary {
                metric: metric.to_string(),
                label: class,
                count,
                mean: values.iter().sum::<f64>() / count as f64,
                min: values[0],
                q1: quantile(&values, 0.25),
                median: quantile(&values, 0.5),
                q3: quantile(&values, 0.75),
                max: values[count - 1],
                bin_lo: lo,
                bin_hi: hi,
                bins: histogram(&values, lo, hi),
            });
        }
    }
    summaries
}

/// Summary CSV: one row per (metric, class) with the five-point summary.
pub fn write_summary_csv<W: Write>(
    writer: W,
    summaries: &[MetricSummary],
) -> Result<(), PipelineError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "metric", "label", "count", "mean", "min", "q1", "median", "q3", "max",
    ])?;
    for s in summaries {
        out.write_record([
            s.metric.as_str(),
            &s.label.to_string(),
            &s.count.to_string(),
            &s.mean.to_string(),
            &s.min.to_string(),
            &s.q1.to_string(),
            &s.median.to_string(),
            &s.q3.to_string(),
            &s.max.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Histogram CSV: one row per (metric, class, bin) for external plotting.
pub fn write_histogram_csv<W: Write>(
    writer: W,
    summaries: &[MetricSummary],
) -> Result<(), PipelineError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["metric", "label", "bin", "lo", "hi", "count"])?;
    for s in summaries {
        let width = (s.bin_hi - s.bin_lo) / HISTOGRAM_BINS as f64;
        for (bin, &count) in s.bins.iter().enumerate() {
            let lo = s.bin_lo + width * bin as f64;
            let hi = if bin + 1 == HISTOGRAM_BINS { s.bin_hi } else { lo + width };
            out.write_record([
                s.metric.as_str(),
                &s.label.to_string(),
                &bin.to_string(),
                &lo.to_string(),
                &hi.to_string(),
                &count.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}
