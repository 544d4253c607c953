//! Collapsed Gibbs sampling for LDA.
//!
//! Each token carries a topic assignment; one sweep resamples every token
//! from p(z = k) ∝ (n_dk + α)·(n_kw + β)/(n_k + V·β) with the token's own
//! count removed first. All randomness comes from a seeded stream cipher
//! RNG, so a (corpus, parameters, seed) triple always yields the same
//! model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Corpus, TopicModel, TopicsError};

/// Gibbs sampler state; create with [`LdaSampler::new`], advance with
/// [`LdaSampler::sweep`], and freeze into a [`TopicModel`] with
/// [`LdaSampler::into_model`].
pub struct LdaSampler {
    k: usize,
    vocab_size: usize,
    hyper_alpha: f64,
    hyper_beta: f64,
    seed: u64,
    sweeps_done: usize,
    docs: Vec<Vec<u32>>,
    assignments: Vec<Vec<u32>>,
    /// D × K, row-major by document.
    doc_topic: Vec<u32>,
    /// K × V, row-major by topic.
    topic_word: Vec<u32>,
    topic_totals: Vec<u32>,
    rng: ChaCha8Rng,
    weights: Vec<f64>,
}

impl LdaSampler {
    pub fn new(
        corpus: &Corpus,
        k: usize,
        hyper_alpha: f64,
        hyper_beta: f64,
        seed: u64,
    ) -> Result<LdaSampler, TopicsError> {
        if corpus.n_docs() == 0 {
            return Err(TopicsError::EmptyCorpus);
        }
        if corpus.vocab_size() == 0 {
            return Err(TopicsError::EmptyVocabulary);
        }
        if k == 0 {
            return Err(TopicsError::InvalidParams { reason: "k must be at least 1".into() });
        }
        let total_tokens = corpus.total_tokens();
        if k > total_tokens {
            return Err(TopicsError::TooManyTopics { k, tokens: total_tokens });
        }
        if !(hyper_alpha > 0.0) || !(hyper_beta > 0.0) {
            return Err(TopicsError::InvalidParams {
                reason: "hyperparameters must be positive".into(),
            });
        }

        let vocab_size = corpus.vocab_size();
        let docs: Vec<Vec<u32>> = (0..corpus.n_docs()).map(|d| corpus.document(d).to_vec()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sampler = LdaSampler {
            k,
            vocab_size,
            hyper_alpha,
            hyper_beta,
            seed,
            sweeps_done: 0,
            assignments: Vec::with_capacity(docs.len()),
            doc_topic: vec![0; docs.len() * k],
            topic_word: vec![0; k * vocab_size],
            topic_totals: vec![0; k],
            docs: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            weights: vec![0.0; k],
        };
        for (d, doc) in docs.iter().enumerate() {
            let mut doc_assignments = Vec::with_capacity(doc.len());
            for &word in doc {
                let topic = rng.gen_range(0..k as u32);
                doc_assignments.push(topic);
                sampler.doc_topic[d * k + topic as usize] += 1;
                sampler.topic_word[topic as usize * vocab_size + word as usize] += 1;
                sampler.topic_totals[topic as usize] += 1;
            }
            sampler.assignments.push(doc_assignments);
        }
        sampler.docs = docs;
        sampler.rng = rng;
        Ok(sampler)
    }

    /// Resample every token's topic once.
    pub fn sweep(&mut self) {
        let v_beta = self.vocab_size as f64 * self.hyper_beta;
        for d in 0..self.docs.len() {
            let doc_row = d * self.k;
            for i in 0..self.docs[d].len() {
                let word = self.docs[d][i] as usize;
                let old = self.assignments[d][i] as usize;

                self.doc_topic[doc_row + old] -= 1;
                self.topic_word[old * self.vocab_size + word] -= 1;
                self.topic_totals[old] -= 1;

                let mut total = 0.0;
                for t in 0..self.k {
                    let w = (f64::from(self.doc_topic[doc_row + t]) + self.hyper_alpha)
                        * (f64::from(self.topic_word[t * self.vocab_size + word])
                            + self.hyper_beta)
                        / (f64::from(self.topic_totals[t]) + v_beta);
                    self.weights[t] = w;
                    total += w;
                }
                let mut draw = self.rng.gen::<f64>() * total;
                let mut new = self.k - 1;
                for (t, &w) in self.weights.iter().enumerate() {
                    draw -= w;
                    if draw < 0.0 {
                        new = t;
                        break;
                    }
                }

                self.assignments[d][i] = new as u32;
                self.doc_topic[doc_row + new] += 1;
                self.topic_word[new * self.vocab_size + word] += 1;
                self.topic_totals[new] += 1;
            }
        }
        self.sweeps_done += 1;
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn doc_len(&self, doc: usize) -> usize {
        self.docs[doc].len()
    }

    pub fn doc_topic_count(&self, doc: usize, topic: usize) -> u32 {
        self.doc_topic[doc * self.k + topic]
    }

    pub fn topic_word_count(&self, topic: usize, word: usize) -> u32 {
        self.topic_word[topic * self.vocab_size + word]
    }

    pub fn topic_total(&self, topic: usize) -> u32 {
        self.topic_totals[topic]
    }

    /// Count-conservation check: document rows sum to document lengths,
    /// topic-word rows sum to topic totals, and topic totals sum to the
    /// corpus token count.
    pub fn conservation_ok(&self) -> bool {
        for (d, doc) in self.docs.iter().enumerate() {
            let row_sum: u64 =
                (0..self.k).map(|t| u64::from(self.doc_topic[d * self.k + t])).sum();
            if row_sum != doc.len() as u64 {
                return false;
            }
        }
        let mut grand_total = 0u64;
        for t in 0..self.k {
            let row_sum: u64 = self.topic_word[t * self.vocab_size..(t + 1) * self.vocab_size]
                .iter()
                .map(|&c| u64::from(c))
                .sum();
            if row_sum != u64::from(self.topic_totals[t]) {
                return false;
            }
            grand_total += row_sum;
        }
        grand_total == self.docs.iter().map(|d| d.len() as u64).sum::<u64>()
    }

    /// Freeze the sampler into an immutable model.
    pub fn into_model(self) -> TopicModel {
        TopicModel::from_counts(
            self.k,
            self.vocab_size,
            self.hyper_alpha,
            self.hyper_beta,
            self.seed,
            self.sweeps_done,
            self.topic_word,
            self.doc_topic,
        )
        .expect("sampler state is dimensionally consistent")
    }
}

/// Run `iterations` full Gibbs sweeps and return the trained model.
pub fn train_lda(
    corpus: &Corpus,
    k: usize,
    hyper_alpha: f64,
    hyper_beta: f64,
    iterations: usize,
    seed: u64,
) -> Result<TopicModel, TopicsError> {
    if iterations == 0 {
        return Err(TopicsError::InvalidParams {
            reason: "iterations must be at least 1".into(),
        });
    }
    let mut sampler = LdaSampler::new(corpus, k, hyper_alpha, hyper_beta, seed)?;
    for _ in 0..iterations {
        sampler.sweep();
    }
    Ok(sampler.into_model())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topics::{corpus_alpha, default_hyper_alpha, doc_theta, AlphaMode};

    /// Two disjoint ten-word vocabularies; documents draw from exactly one.
    fn two_topic_corpus(n_docs: usize, doc_len: usize) -> Corpus {
        let pool_a: Vec<String> = (0..10).map(|i| format!("alpha{i}")).collect();
        let pool_b: Vec<String> = (0..10).map(|i| format!("beta{i}")).collect();
        let docs: Vec<Vec<String>> = (0..n_docs)
            .map(|d| {
                let pool = if d % 2 == 0 { &pool_a } else { &pool_b };
                (0..doc_len).map(|j| pool[(d * 7 + j * 3) % 10].clone()).collect()
            })
            .collect();
        Corpus::from_token_docs(&docs)
    }

    fn small_corpus() -> Corpus {
        two_topic_corpus(10, 8)
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let corpus = small_corpus();
        let a = train_lda(&corpus, 3, default_hyper_alpha(3), 0.01, 30, 11).unwrap();
        let b = train_lda(&corpus, 3, default_hyper_alpha(3), 0.01, 30, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_topic_thetas_are_one() {
        let corpus = small_corpus();
        let model = train_lda(&corpus, 1, 50.0, 0.01, 5, 3).unwrap();
        for d in 0..model.n_docs() {
            assert_eq!(doc_theta(&model, d).theta, vec![1.0]);
        }
        assert_eq!(corpus_alpha(&model, AlphaMode::Marginal).alpha, vec![1.0]);
    }

    #[test]
    fn counts_conserved_after_every_sweep() {
        let corpus = small_corpus();
        let mut sampler = LdaSampler::new(&corpus, 4, default_hyper_alpha(4), 0.01, 9).unwrap();
        assert!(sampler.conservation_ok());
        for _ in 0..20 {
            sampler.sweep();
            assert!(sampler.conservation_ok());
        }
    }

    #[test]
    fn distributions_sum_to_one_after_training() {
        let corpus = small_corpus();
        let model = train_lda(&corpus, 4, default_hyper_alpha(4), 0.01, 25, 2).unwrap();
        for d in 0..model.n_docs() {
            let sum: f64 = doc_theta(&model, d).theta.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
        let sum: f64 = corpus_alpha(&model, AlphaMode::Marginal).alpha.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn disjoint_vocabularies_separate() {
        let corpus = two_topic_corpus(40, 20);
        let model = train_lda(&corpus, 2, default_hyper_alpha(2), 0.01, 150, 42).unwrap();
        // Purity: fraction of each topic's mass on its majority word group.
        let mut pure = 0u64;
        let mut total = 0u64;
        for t in 0..2 {
            let mut mass_a = 0u64;
            let mut mass_b = 0u64;
            for w in 0..corpus.vocab_size() {
                let count = u64::from(model.topic_word_count(t, w));
                if corpus.token(w as u32).starts_with("alpha") {
                    mass_a += count;
                } else {
                    mass_b += count;
                }
            }
            pure += mass_a.max(mass_b);
            total += mass_a + mass_b;
        }
        let purity = pure as f64 / total as f64;
        assert!(purity >= 0.9, "purity {purity}");
    }

    #[test]
    fn parameter_validation() {
        let corpus = small_corpus();
        assert!(matches!(
            LdaSampler::new(&corpus, 0, 1.0, 0.01, 1),
            Err(TopicsError::InvalidParams { .. })
        ));
        assert!(matches!(
            LdaSampler::new(&corpus, 10_000, 1.0, 0.01, 1),
            Err(TopicsError::TooManyTopics { .. })
        ));
        assert!(matches!(
            LdaSampler::new(&corpus, 2, 0.0, 0.01, 1),
            Err(TopicsError::InvalidParams { .. })
        ));
        assert!(matches!(
            train_lda(&corpus, 2, 1.0, 0.01, 0, 1),
            Err(TopicsError::InvalidParams { .. })
        ));
        let empty: Vec<Vec<String>> = Vec::new();
        let empty_corpus = Corpus::from_token_docs(&empty);
        assert!(matches!(
            LdaSampler::new(&empty_corpus, 2, 1.0, 0.01, 1),
            Err(TopicsError::EmptyCorpus)
        ));
        let blank_docs: Vec<Vec<String>> = vec![Vec::new(), Vec::new()];
        let blank_corpus = Corpus::from_token_docs(&blank_docs);
        assert!(matches!(
            LdaSampler::new(&blank_corpus, 2, 1.0, 0.01, 1),
            Err(TopicsError::EmptyVocabulary)
        ));
    }
}
