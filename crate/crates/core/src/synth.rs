//! Deterministic synthetic dump generator for benchmarks and tests.
//!
//! The generator emits Posts/Users rows shaped like a real dump: each
//! target question has 10–14 answers (so it survives selection) and an
//! asker with a handful of older, sparsely-answered questions that build
//! the asker's history without entering the dataset themselves.
//!
//! The two classes are separated along the directions the metrics are
//! supposed to pick up:
//!
//! | metric          | unresolved                  | resolved            |
//! |-----------------|-----------------------------|---------------------|
//! | rejection ratio | history accepted w.p. 0.25  | accepted w.p. 0.75  |
//! | access delay    | ~45 days (lognormal)        | ~3 days             |
//! | votes           | N(2, 4)                     | N(12, 6)            |
//! | reputation      | ~150 (lognormal)            | ~1500               |
//! | topic mixing    | words from 4–5 pools        | 1–2 pools           |
//!
//! Everything is drawn from one seeded ChaCha8 stream, so a seed fixes
//! the files byte for byte.

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::ingest::{Label, PostRow, PostType, UserRow};

/// Word pools; one per synthetic topic. All entries survive topic
/// normalization (lowercase, length ≥ 2, no stopwords, no pure numbers).
pub const TOPIC_POOLS: [[&str; 12]; 6] = [
    [
        "parser", "token", "lexer", "grammar", "syntax", "ast", "node", "stream", "buffer",
        "symbol", "scope", "literal",
    ],
    [
        "socket", "packet", "network", "protocol", "latency", "connection", "timeout",
        "retry", "header", "payload", "firewall", "port",
    ],
    [
        "matrix", "vector", "gradient", "tensor", "kernel", "batch", "epoch", "training",
        "weights", "loss", "sigmoid", "dataset",
    ],
    [
        "query", "index", "transaction", "schema", "column", "rowset", "join", "cursor",
        "commit", "rollback", "trigger", "view",
    ],
    [
        "thread", "mutex", "lock", "atomic", "channel", "scheduler", "async", "runtime",
        "task", "deadlock", "barrier", "semaphore",
    ],
    [
        "widget", "layout", "render", "canvas", "event", "click", "browser", "style",
        "animation", "frame", "viewport", "cursorpos",
    ],
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub n_questions: usize,
    /// Fraction of questions left without an accepted answer.
    pub unresolved_fraction: f64,
    pub seed: u64,
    /// Snapshot date the dump pretends to be taken at.
    pub analysis_date: NaiveDateTime,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_questions: 100,
            unresolved_fraction: 0.5,
            seed: 0,
            analysis_date: NaiveDate::from_ymd_opt(2015, 2, 18)
                .unwrap()
                .and_hms_opt(0, 0, 0)
                .unwrap(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub posts: Vec<PostRow>,
    pub users: Vec<UserRow>,
    /// Ground truth for the questions meant to survive selection.
    pub expected: Vec<(u64, Label)>,
}

struct IdAllocator {
    next: u64,
}

impl IdAllocator {
    fn take(&mut self) -> u64 {
        let id = self.next;
        self.next += 1;
        id
    }
}

fn sample_days(rng: &mut ChaCha8Rng, median: f64, sigma: f64) -> i64 {
    let dist = LogNormal::new(median.ln(), sigma).expect("valid lognormal");
    dist.sample(rng).round().max(0.0) as i64
}

fn sample_votes(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> i64 {
    let dist = Normal::new(mean, sd).expect("valid normal");
    (dist.sample(rng).round() as i64).max(-5)
}

fn sample_reputation(rng: &mut ChaCha8Rng, median: f64) -> u64 {
    let dist = LogNormal::new(median.ln(), 0.5).expect("valid lognormal");
    (dist.sample(rng).round() as u64).max(1)
}

/// Draw `n` words, each from a pool index picked uniformly in `pools`.
fn draw_words(rng: &mut ChaCha8Rng, pools: &[usize], n: usize) -> String {
    let mut words = Vec::with_capacity(n);
    for _ in 0..n {
        let pool = &TOPIC_POOLS[pools[rng.gen_range(0..pools.len())]];
        words.push(pool[rng.gen_range(0..pool.len())]);
    }
    words.join(" ")
}

fn code_block(rng: &mut ChaCha8Rng) -> String {
    let names = ["buf", "cfg", "items", "total", "state"];
    let calls = ["read", "merge", "resolve", "scan", "flush"];
    let lines = rng.gen_range(3..=6);
    let mut out = String::from("<pre><code>");
    for line in 0..lines {
        let name = names[rng.gen_range(0..names.len())];
        let call = calls[rng.gen_range(0..calls.len())];
        if line == 0 {
            out.push_str("// reduced example\n");
        }
        out.push_str(&format!(
            "let {name}{line} = {call}({name}, {});\n",
            rng.gen_range(0..100)
        ));
    }
    out.push_str("</code></pre>");
    out
}

fn question_body(rng: &mut ChaCha8Rng, pools: &[usize], with_code: bool) -> String {
    let n_words = rng.gen_range(30..=60);
    let words = draw_words(rng, pools, n_words);
    let mut body = format!("<p>{words}</p>");
    if with_code {
        body.push_str(&code_block(rng));
    }
    body
}

fn answer_body(rng: &mut ChaCha8Rng, pools: &[usize], n_words: usize) -> String {
    format!("<p>{}</p>", draw_words(rng, pools, n_words))
}

/// Pick `count` distinct pool indices.
fn pick_pools(rng: &mut ChaCha8Rng, primary: usize, count: usize) -> Vec<usize> {
    let mut pools = vec![primary];
    while pools.len() < count {
        let candidate = rng.gen_range(0..TOPIC_POOLS.len());
        if !pools.contains(&candidate) {
            pools.push(candidate);
        }
    }
    pools
}

pub fn generate(config: &SynthConfig) -> SynthOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut ids = IdAllocator { next: 1 };
    let mut posts = Vec::new();
    let mut users = Vec::new();
    let mut expected = Vec::with_capacity(config.n_questions);

    let n_unresolved =
        (config.n_questions as f64 * config.unresolved_fraction).round() as usize;

    for index in 0..config.n_questions {
        let unresolved = index < n_unresolved;
        let label = if unresolved { Label::Unresolved } else { Label::Resolved };
        let user_id = 10_000 + index as u64;

        // Asker profile, separated per class.
        let (lad_median, rep_median, accept_prob) =
            if unresolved { (45.0, 150.0, 0.25) } else { (3.0, 1500.0, 0.75) };
        let lad_days = sample_days(&mut rng, lad_median, 0.7);
        users.push(UserRow {
            id: user_id,
            reputation: sample_reputation(&mut rng, rep_median),
            last_access_date: config.analysis_date - Duration::days(lad_days),
        });

        // The target question: old enough and answered often enough to be
        // retained.
        let question_id = ids.take();
        let age_days = rng.gen_range(200..=400);
        let created = config.analysis_date - Duration::days(age_days);
        let primary = index % TOPIC_POOLS.len();
        let pool_count = if unresolved { rng.gen_range(4..=5) } else { rng.gen_range(1..=2) };
        let pools = pick_pools(&mut rng, primary, pool_count);
        let with_code = rng.gen_bool(0.4);
        let body = question_body(&mut rng, &pools, with_code);
        let votes = if unresolved {
            sample_votes(&mut rng, 2.0, 4.0)
        } else {
            sample_votes(&mut rng, 12.0, 6.0)
        };

        let n_answers = rng.gen_range(10..=14);
        let mut answers = Vec::with_capacity(n_answers);
        for _ in 0..n_answers {
            let answer_pools: Vec<usize> = if unresolved {
                vec![rng.gen_range(0..TOPIC_POOLS.len())]
            } else {
                vec![primary]
            };
            let created_offset = rng.gen_range(1..=3);
            let score = rng.gen_range(-2..=8);
            let n_words = rng.gen_range(10..=20);
            answers.push(PostRow {
                id: ids.take(),
                post_type: PostType::Answer,
                parent_id: Some(question_id),
                accepted_answer_id: None,
                creation_date: created + Duration::days(created_offset),
                score,
                body: answer_body(&mut rng, &answer_pools, n_words),
                owner_user_id: None,
                answer_count: None,
            });
        }
        // Resolved questions accept their best answer, so the acceptance
        // label and the "best answer" document always agree.
        let accepted = if unresolved { None } else { best_of(&answers) };

        posts.push(PostRow {
            id: question_id,
            post_type: PostType::Question,
            parent_id: None,
            accepted_answer_id: accepted,
            creation_date: created,
            score: votes,
            body,
            owner_user_id: Some(user_id),
            answer_count: Some(n_answers as u64),
        });
        posts.extend(answers);
        expected.push((question_id, label));

        // History questions: answered, too thin to be retained, accepted
        // with the class's probability. They exist to give the asker a
        // rejection ratio.
        let n_history = rng.gen_range(2..=6);
        for _ in 0..n_history {
            let history_id = ids.take();
            let history_created =
                config.analysis_date - Duration::days(rng.gen_range(30..=500));
            let n_answers = rng.gen_range(1..=2);
            let mut history_answers = Vec::with_capacity(n_answers);
            for _ in 0..n_answers {
                let score = rng.gen_range(0..=3);
                history_answers.push(PostRow {
                    id: ids.take(),
                    post_type: PostType::Answer,
                    parent_id: Some(history_id),
                    accepted_answer_id: None,
                    creation_date: history_created + Duration::days(1),
                    score,
                    body: answer_body(&mut rng, &[primary], 8),
                    owner_user_id: None,
                    answer_count: None,
                });
            }
            let accepted = if rng.gen_bool(accept_prob) {
                best_of(&history_answers)
            } else {
                None
            };
            posts.push(PostRow {
                id: history_id,
                post_type: PostType::Question,
                parent_id: None,
                accepted_answer_id: accepted,
                creation_date: history_created,
                score: rng.gen_range(0..=4),
                body: answer_body(&mut rng, &[primary], 12),
                owner_user_id: Some(user_id),
                answer_count: Some(n_answers as u64),
            });
            posts.extend(history_answers);
        }
    }

    SynthOutput { posts, users, expected }
}

/// The answer an accepting asker marks: highest score, ties broken by
/// earliest creation date and then lowest id — the same rule the thread
/// linker uses to name the best answer, so accepted == best by construction.
fn best_of(answers: &[PostRow]) -> Option<u64> {
    answers
        .iter()
        .min_by(|a, b| {
            b.score
                .cmp(&a.score)
                .then(a.creation_date.cmp(&b.creation_date))
                .then(a.id.cmp(&b.id))
        })
        .map(|a| a.id)
}
