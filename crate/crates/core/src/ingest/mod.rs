//! Dump ingestion: parse Posts/Users files, link answers to questions and
//! owners, and apply the dataset selection rules.
//!
//! The pipeline is `parse_posts`/`parse_users` (see [`xml`]), then
//! [`link_threads`], then [`apply_selection`], and finally the dataset file
//! written by [`dataset`]. Row-level problems in the dumps are tallied and
//! reported, never fatal; structural problems (malformed XML, impossible
//! dates) abort with a precise error.

pub mod dataset;
pub mod xml;

use std::collections::{BTreeMap, HashMap};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::HistoryEntry;

pub use dataset::{
    assemble_records, build_header, read_dataset, write_dataset, AnswerRecord, DatasetCounts,
    DatasetError, DatasetHeader, ThreadRecord,
};
pub use xml::{parse_posts, parse_users, posts_to_xml, users_to_xml, ParseOutcome, RowError};

/// Whether a post row is a question or an answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PostType {
    Question,
    Answer,
}

/// One post from a Posts dump. Other post types (wiki, moderation) are
/// skipped at parse time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostRow {
    pub id: u64,
    pub post_type: PostType,
    /// Owning question id; answers only.
    pub parent_id: Option<u64>,
    /// Accepted answer id; questions only.
    pub accepted_answer_id: Option<u64>,
    pub creation_date: NaiveDateTime,
    pub score: i64,
    pub body: String,
    pub owner_user_id: Option<u64>,
    /// The dump's own answer tally; informational — linking recounts.
    pub answer_count: Option<u64>,
}

/// One user from a Users dump.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserRow {
    pub id: u64,
    pub reputation: u64,
    pub last_access_date: NaiveDateTime,
}

/// Resolution state of a question: `Resolved` means the owner accepted an
/// answer that exists in the thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Resolved,
    Unresolved,
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::Resolved => write!(f, "Resolved"),
            Label::Unresolved => write!(f, "Unresolved"),
        }
    }
}

impl std::str::FromStr for Label {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Resolved" => Ok(Label::Resolved),
            "Unresolved" => Ok(Label::Unresolved),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// One question with its linked answers, owner, and resolution label.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionThread {
    pub question: PostRow,
    /// Linked answers, ascending id.
    pub answers: Vec<PostRow>,
    /// The owner's user row, when the dump has one.
    pub owner: Option<UserRow>,
    pub label: Label,
    /// Highest-scored answer (ties: earliest creation, then lowest id);
    /// `None` only while the thread has no answers.
    pub best_answer_id: Option<u64>,
}

impl QuestionThread {
    pub fn best_answer(&self) -> Option<&PostRow> {
        let id = self.best_answer_id?;
        self.answers.iter().find(|a| a.id == id)
    }
}

/// Dataset selection rules: question age and answer-count thresholds,
/// evaluated against a fixed analysis date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionCriteria {
    /// Minimum question age in days ("six months" fixed as 183).
    pub min_age_days: u32,
    pub min_answers: u32,
    pub analysis_date: NaiveDateTime,
}

impl SelectionCriteria {
    pub const DEFAULT_MIN_AGE_DAYS: u32 = 183;
    pub const DEFAULT_MIN_ANSWERS: u32 = 10;

    pub fn new(analysis_date: NaiveDateTime) -> Self {
        SelectionCriteria {
            min_age_days: Self::DEFAULT_MIN_AGE_DAYS,
            min_answers: Self::DEFAULT_MIN_ANSWERS,
            analysis_date,
        }
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        if self.min_answers < 1 {
            return Err(IngestError::InvalidCriteria {
                reason: "min_answers must be at least 1".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("invalid selection criteria: {reason}")]
    InvalidCriteria { reason: String },
    #[error(
        "question {question_id} created {creation_date}, after the analysis date {analysis_date}"
    )]
    FutureDatedQuestion {
        question_id: u64,
        creation_date: NaiveDateTime,
        analysis_date: NaiveDateTime,
    },
}

/// Tallies from answer-question-owner linking.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkReport {
    pub questions: usize,
    pub answers_linked: usize,
    /// Answers whose parent question is not in the dump.
    pub dangling_answers: usize,
    /// Questions whose accepted answer id matched no linked answer; their
    /// labels were forced to Unresolved.
    pub forced_unresolved: Vec<u64>,
}

/// Group answers under their questions, resolve owners, and derive labels
/// and best answers.
///
/// Every question yields a thread, even with zero answers (selection
/// filters those later). Output is ordered by ascending question id and is
/// independent of input order.
pub fn link_threads(posts: Vec<PostRow>, users: &[UserRow]) -> (Vec<QuestionThread>, LinkReport) {
    let user_by_id: HashMap<u64, &UserRow> = users.iter().map(|u| (u.id, u)).collect();

    let mut questions: BTreeMap<u64, PostRow> = BTreeMap::new();
    let mut answers_by_parent: HashMap<u64, Vec<PostRow>> = HashMap::new();
    let mut answers: Vec<PostRow> = Vec::new();
    for post in posts {
        match post.post_type {
            PostType::Question => {
                questions.insert(post.id, post);
            }
            PostType::Answer => answers.push(post),
        }
    }

    let mut report = LinkReport {
        questions: questions.len(),
        ..LinkReport::default()
    };
    for answer in answers {
        match answer.parent_id {
            Some(parent) if questions.contains_key(&parent) => {
                answers_by_parent.entry(parent).or_default().push(answer);
            }
            _ => report.dangling_answers += 1,
        }
    }

    let mut threads = Vec::with_capacity(questions.len());
    for (qid, question) in questions {
        let mut answers = answers_by_parent.remove(&qid).unwrap_or_default();
        answers.sort_by_key(|a| a.id);
        report.answers_linked += answers.len();

        let best_answer_id = best_answer_id(&answers);
        let label = match question.accepted_answer_id {
            Some(accepted) if answers.iter().any(|a| a.id == accepted) => Label::Resolved,
            Some(_) => {
                report.forced_unresolved.push(qid);
                Label::Unresolved
            }
            None => Label::Unresolved,
        };
        let owner = question
            .owner_user_id
            .and_then(|id| user_by_id.get(&id))
            .map(|u| (*u).clone());
        threads.push(QuestionThread {
            question,
            answers,
            owner,
            label,
            best_answer_id,
        });
    }
    (threads, report)
}

/// Highest score wins; ties go to the earliest creation date, then the
/// lowest id. Pure in (scores, dates, ids) — answer order is irrelevant.
fn best_answer_id(answers: &[PostRow]) -> Option<u64> {
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

/// Tallies from dataset selection.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub input_threads: usize,
    pub retained: usize,
    pub resolved: usize,
    pub unresolved: usize,
    pub dropped_too_young: usize,
    pub dropped_too_few_answers: usize,
    /// Threads excluded because the owner is unknown (no owner id on the
    /// question, or no matching user row); user metrics would be undefined.
    pub dropped_missing_owner: usize,
}

/// Keep threads old enough and answered enough, per `criteria`; order the
/// result by ascending question id.
pub fn apply_selection(
    threads: &[QuestionThread],
    criteria: &SelectionCriteria,
) -> Result<(Vec<QuestionThread>, SelectionReport), IngestError> {
    criteria.validate()?;
    for thread in threads {
        if thread.question.creation_date > criteria.analysis_date {
            return Err(IngestError::FutureDatedQuestion {
                question_id: thread.question.id,
                creation_date: thread.question.creation_date,
                analysis_date: criteria.analysis_date,
            });
        }
    }

    let mut report = SelectionReport {
        input_threads: threads.len(),
        ..SelectionReport::default()
    };
    let mut retained: Vec<QuestionThread> = Vec::new();
    for thread in threads {
        let age_days =
            (criteria.analysis_date - thread.question.creation_date).num_seconds() / 86_400;
        if age_days < i64::from(criteria.min_age_days) {
            report.dropped_too_young += 1;
            continue;
        }
        if (thread.answers.len() as u64) < u64::from(criteria.min_answers) {
            report.dropped_too_few_answers += 1;
            continue;
        }
        if thread.owner.is_none() {
            report.dropped_missing_owner += 1;
            continue;
        }
        match thread.label {
            Label::Resolved => report.resolved += 1,
            Label::Unresolved => report.unresolved += 1,
        }
        retained.push(thread.clone());
    }
    retained.sort_by_key(|t| t.question.id);
    report.retained = retained.len();
    Ok((retained, report))
}

/// Asking history per owner id over all threads (not just retained ones):
/// the rejection-ratio metric needs the owner's full record in the dump.
pub fn owner_histories(threads: &[QuestionThread]) -> HashMap<u64, Vec<HistoryEntry>> {
    let mut histories: HashMap<u64, Vec<HistoryEntry>> = HashMap::new();
    for thread in threads {
        let Some(owner_id) = thread.question.owner_user_id else {
            continue;
        };
        histories.entry(owner_id).or_default().push(HistoryEntry {
            question_id: thread.question.id,
            answered: !thread.answers.is_empty(),
            resolved: thread.label == Label::Resolved,
        });
    }
    for history in histories.values_mut() {
        history.sort_by_key(|e| e.question_id);
    }
    histories
}
