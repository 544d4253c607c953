//! LDA topic modeling and the topic-derived question metrics.
//!
//! A corpus holds one document per question and one per its best answer.
//! [`gibbs`] trains the model by collapsed Gibbs sampling; this module
//! derives per-document distributions θ, corpus-level topic weights α, and
//! the two question metrics: topic similarity (corpus-weighted cosine
//! between question and answer over the question's dominant topics) and
//! topic entropy (uncertainty over those dominant topics).

pub mod gibbs;
pub mod store;

use std::collections::HashMap;

use thiserror::Error;

use crate::content::{normalize_for_topics, segment_html};
use crate::ingest::dataset::ThreadRecord;

pub use gibbs::{train_lda, LdaSampler};

/// Default topic count for full runs.
pub const DEFAULT_TOPICS: usize = 150;
/// Default Gibbs sweep count.
pub const DEFAULT_ITERATIONS: usize = 1000;
/// Default symmetric Dirichlet parameter for topic-word rows.
pub const DEFAULT_HYPER_BETA: f64 = 0.01;
/// How many dominant topics the question metrics use.
pub const TOP_TOPIC_COUNT: usize = 5;

/// Default symmetric Dirichlet parameter for document-topic rows.
pub fn default_hyper_alpha(k: usize) -> f64 {
    50.0 / k as f64
}

#[derive(Debug, Error)]
pub enum TopicsError {
    #[error("corpus has no documents")]
    EmptyCorpus,
    #[error("corpus vocabulary is empty — no usable tokens")]
    EmptyVocabulary,
    #[error("cannot extract {k} topics from {tokens} tokens")]
    TooManyTopics { k: usize, tokens: usize },
    #[error("invalid LDA parameters: {reason}")]
    InvalidParams { reason: String },
}

/// What a corpus document stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocRef {
    Question { question_id: u64 },
    Answer { question_id: u64, answer_id: u64 },
    /// Synthetic or test documents with no dump identity.
    Synthetic { index: usize },
}

/// Tokenized documents over an indexed vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    vocab: Vec<String>,
    vocab_index: HashMap<String, u32>,
    documents: Vec<Vec<u32>>,
    doc_refs: Vec<DocRef>,
    question_docs: HashMap<u64, usize>,
    answer_docs: HashMap<u64, usize>,
}

impl Corpus {
    /// Build from pre-tokenized documents; vocabulary indices follow first
    /// appearance.
    pub fn from_token_docs<S: AsRef<str>>(docs: &[Vec<S>]) -> Corpus {
        let mut corpus = Corpus {
            vocab: Vec::new(),
            vocab_index: HashMap::new(),
            documents: Vec::new(),
            doc_refs: Vec::new(),
            question_docs: HashMap::new(),
            answer_docs: HashMap::new(),
        };
        for (index, tokens) in docs.iter().enumerate() {
            let doc = corpus.intern(tokens);
            corpus.documents.push(doc);
            corpus.doc_refs.push(DocRef::Synthetic { index });
        }
        corpus
    }

    fn intern<S: AsRef<str>>(&mut self, tokens: &[S]) -> Vec<u32> {
        tokens
            .iter()
            .map(|t| {
                let t = t.as_ref();
                match self.vocab_index.get(t) {
                    Some(&idx) => idx,
                    None => {
                        let idx = self.vocab.len() as u32;
                        self.vocab.push(t.to_string());
                        self.vocab_index.insert(t.to_string(), idx);
                        idx
                    }
                }
            })
            .collect()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn n_docs(&self) -> usize {
        self.documents.len()
    }

    pub fn total_tokens(&self) -> usize {
        self.documents.iter().map(Vec::len).sum()
    }

    pub fn token(&self, index: u32) -> &str {
        &self.vocab[index as usize]
    }

    pub fn index_of(&self, token: &str) -> Option<u32> {
        self.vocab_index.get(token).copied()
    }

    pub fn document(&self, doc: usize) -> &[u32] {
        &self.documents[doc]
    }

    pub fn doc_ref(&self, doc: usize) -> DocRef {
        self.doc_refs[doc]
    }

    /// Document index of a question's prose, by question id.
    pub fn question_doc(&self, question_id: u64) -> Option<usize> {
        self.question_docs.get(&question_id).copied()
    }

    /// Document index of a question's best answer, by question id.
    pub fn answer_doc(&self, question_id: u64) -> Option<usize> {
        self.answer_docs.get(&question_id).copied()
    }
}

/// Tokenize dataset threads into a corpus: one document per question and
/// one per best answer, in dataset order (question doc first).
pub fn build_corpus(records: &[ThreadRecord]) -> Result<Corpus, TopicsError> {
    if records.is_empty() {
        return Err(TopicsError::EmptyCorpus);
    }
    let mut corpus = Corpus {
        vocab: Vec::new(),
        vocab_index: HashMap::new(),
        documents: Vec::new(),
        doc_refs: Vec::new(),
        question_docs: HashMap::new(),
        answer_docs: HashMap::new(),
    };
    for record in records {
        let q_tokens = normalize_for_topics(&segment_html(&record.body).prose);
        let doc = corpus.intern(&q_tokens);
        corpus.question_docs.insert(record.question_id, corpus.documents.len());
        corpus.documents.push(doc);
        corpus.doc_refs.push(DocRef::Question { question_id: record.question_id });

        let a_tokens = normalize_for_topics(&segment_html(&record.best_answer.body).prose);
        let doc = corpus.intern(&a_tokens);
        corpus.answer_docs.insert(record.question_id, corpus.documents.len());
        corpus.documents.push(doc);
        corpus.doc_refs.push(DocRef::Answer {
            question_id: record.question_id,
            answer_id: record.best_answer.id,
        });
    }
    if corpus.vocab.is_empty() {
        return Err(TopicsError::EmptyVocabulary);
    }
    Ok(corpus)
}

/// Trained LDA state: final Gibbs counts plus the run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub k: usize,
    pub vocab_size: usize,
    pub hyper_alpha: f64,
    pub hyper_beta: f64,
    pub seed: u64,
    pub iterations: usize,
    /// K × V, row-major by topic.
    topic_word: Vec<u32>,
    /// D × K, row-major by document.
    doc_topic: Vec<u32>,
    topic_totals: Vec<u32>,
    doc_totals: Vec<u32>,
}

impl TopicModel {
    /// Assemble a model from count matrices (totals are derived). Lengths
    /// must match `k` and `vocab_size`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_counts(
        k: usize,
        vocab_size: usize,
        hyper_alpha: f64,
        hyper_beta: f64,
        seed: u64,
        iterations: usize,
        topic_word: Vec<u32>,
        doc_topic: Vec<u32>,
    ) -> Result<TopicModel, TopicsError> {
        if k == 0 {
            return Err(TopicsError::InvalidParams { reason: "k must be at least 1".into() });
        }
        if topic_word.len() != k * vocab_size {
            return Err(TopicsError::InvalidParams {
                reason: format!(
                    "topic-word matrix has {} entries, expected {}",
                    topic_word.len(),
                    k * vocab_size
                ),
            });
        }
        if doc_topic.len() % k != 0 {
            return Err(TopicsError::InvalidParams {
                reason: format!(
                    "document-topic matrix has {} entries, not a multiple of k={k}",
                    doc_topic.len()
                ),
            });
        }
        let topic_totals = (0..k)
            .map(|t| topic_word[t * vocab_size..(t + 1) * vocab_size].iter().sum())
            .collect();
        let doc_totals = doc_topic.chunks(k).map(|row| row.iter().sum()).collect();
        Ok(TopicModel {
            k,
            vocab_size,
            hyper_alpha,
            hyper_beta,
            seed,
            iterations,
            topic_word,
            doc_topic,
            topic_totals,
            doc_totals,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.doc_totals.len()
    }

    pub fn topic_word_count(&self, topic: usize, word: usize) -> u32 {
        self.topic_word[topic * self.vocab_size + word]
    }

    pub fn doc_topic_count(&self, doc: usize, topic: usize) -> u32 {
        self.doc_topic[doc * self.k + topic]
    }

    pub fn topic_total(&self, topic: usize) -> u32 {
        self.topic_totals[topic]
    }

    pub fn doc_total(&self, doc: usize) -> u32 {
        self.doc_totals[doc]
    }

    pub fn total_tokens(&self) -> u64 {
        self.topic_totals.iter().map(|&n| u64::from(n)).sum()
    }

    /// Nonzero topic-word counts as `(topic, word, count)` triples.
    pub fn nonzero_topic_word(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.topic_word.iter().enumerate().filter(|(_, &c)| c > 0).map(move |(i, &c)| {
            (i / self.vocab_size, i % self.vocab_size, c)
        })
    }

    /// Nonzero document-topic counts as `(doc, topic, count)` triples.
    pub fn nonzero_doc_topic(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.doc_topic
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(i, &c)| (i / self.k, i % self.k, c))
    }
}

/// Per-document topic distribution θ (sums to 1).
#[derive(Debug, Clone, PartialEq)]
pub struct DocTopicDistribution {
    pub theta: Vec<f64>,
}

/// Corpus-level topic weights α (sums to 1).
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusTopicWeights {
    pub alpha: Vec<f64>,
}

/// Which reading of "topic weight over the corpus" to use: the trained
/// corpus-marginal topic frequency (default) or the normalized symmetric
/// prior (uniform), kept switchable because the two are both defensible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    #[default]
    Marginal,
    Prior,
}

/// Dominant topics of one document: `(topic index, θ)` sorted by θ
/// descending, ties by ascending index.
#[derive(Debug, Clone, PartialEq)]
pub struct TopTopics {
    pub entries: Vec<(usize, f64)>,
}

/// Smoothed document-topic distribution:
/// θ_k = (n_dk + α_h) / (N_d + K·α_h).
pub fn doc_theta(model: &TopicModel, doc: usize) -> DocTopicDistribution {
    let denom = f64::from(model.doc_total(doc)) + model.k as f64 * model.hyper_alpha;
    let theta = (0..model.k)
        .map(|t| (f64::from(model.doc_topic_count(doc, t)) + model.hyper_alpha) / denom)
        .collect();
    DocTopicDistribution { theta }
}

/// Corpus topic weights: the marginal topic frequency over all sampled
/// tokens, or the normalized prior (uniform) under [`AlphaMode::Prior`].
pub fn corpus_alpha(model: &TopicModel, mode: AlphaMode) -> CorpusTopicWeights {
    let alpha = match mode {
        AlphaMode::Marginal => {
            let total = model.total_tokens() as f64;
            (0..model.k).map(|t| f64::from(model.topic_total(t)) / total).collect()
        }
        AlphaMode::Prior => vec![1.0 / model.k as f64; model.k],
    };
    CorpusTopicWeights { alpha }
}

/// The `n` most probable topics of `theta`.
pub fn top_topics(theta: &DocTopicDistribution, n: usize) -> TopTopics {
    let mut order: Vec<usize> = (0..theta.theta.len()).collect();
    order.sort_by(|&a, &b| {
        theta.theta[b]
            .partial_cmp(&theta.theta[a])
            .expect("theta values are finite")
            .then(a.cmp(&b))
    });
    order.truncate(n);
    TopTopics { entries: order.into_iter().map(|i| (i, theta.theta[i])).collect() }
}

/// Corpus-weighted cosine similarity between question and answer topic
/// distributions, restricted to the question's dominant topics.
///
/// Both vectors use the question's top-topic index set. If either weighted
/// vector is all zero the similarity is defined as 0.
pub fn topic_similarity(
    q_theta: &DocTopicDistribution,
    a_theta: &DocTopicDistribution,
    alpha: &CorpusTopicWeights,
    q_top: &TopTopics,
) -> f64 {
    let mut dot = 0.0;
    let mut q_norm_sq = 0.0;
    let mut a_norm_sq = 0.0;
    for &(topic, _) in &q_top.entries {
        let q = alpha.alpha[topic] * q_theta.theta[topic];
        let a = alpha.alpha[topic] * a_theta.theta[topic];
        dot += q * a;
        q_norm_sq += q * q;
        a_norm_sq += a * a;
    }
    if q_norm_sq == 0.0 || a_norm_sq == 0.0 {
        return 0.0;
    }
    dot / (q_norm_sq.sqrt() * a_norm_sq.sqrt())
}

/// Entropy of the question's weighted dominant-topic probabilities:
/// −Σ (α_i·θ_i)·ln(α_i·θ_i), with 0·ln 0 = 0.
pub fn topic_entropy(
    q_theta: &DocTopicDistribution,
    alpha: &CorpusTopicWeights,
    q_top: &TopTopics,
) -> f64 {
    let mut entropy = 0.0;
    for &(topic, _) in &q_top.entries {
        let p = alpha.alpha[topic] * q_theta.theta[topic];
        if p > 0.0 {
            entropy -= p * p.ln();
        }
    }
    entropy
}
