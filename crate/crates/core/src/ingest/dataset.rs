//! The dataset file: one JSON record per line, a header first and then one
//! record per retained question thread.
//!
//! Each record is tagged with a `record` field (`header` or `thread`).
//! Thread records carry everything featurization needs — question body,
//! best-answer body, owner profile with full asking history — so later
//! stages never re-read the dumps.

use std::io::{BufRead, Write};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::UserProfile;

use super::{Label, LinkReport, QuestionThread, SelectionCriteria, SelectionReport};

/// Current dataset file version.
pub const DATASET_VERSION: u32 = 1;

/// Ingest tallies carried in the header for the run summary.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetCounts {
    pub questions_seen: usize,
    pub retained: usize,
    pub resolved: usize,
    pub unresolved: usize,
    pub dropped_too_young: usize,
    pub dropped_too_few_answers: usize,
    pub dropped_missing_owner: usize,
    pub dangling_answers: usize,
    pub forced_unresolved: usize,
    pub post_row_errors: usize,
    pub user_row_errors: usize,
}

/// First line of a dataset file: criteria and tallies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub version: u32,
    pub criteria: SelectionCriteria,
    pub counts: DatasetCounts,
}

/// The best answer of a retained thread.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub id: u64,
    pub score: i64,
    pub creation_date: NaiveDateTime,
    pub body: String,
}

/// One retained question thread, self-contained for featurization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreadRecord {
    pub question_id: u64,
    pub label: Label,
    pub creation_date: NaiveDateTime,
    pub score: i64,
    pub answer_count: usize,
    pub accepted_answer_id: Option<u64>,
    pub body: String,
    pub best_answer: AnswerRecord,
    pub owner: UserProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum DatasetLine {
    Header(DatasetHeader),
    Thread(ThreadRecord),
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("dataset line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("dataset file is empty")]
    Empty,
    #[error("dataset line {line}: expected a {expected} record")]
    WrongRecord { line: usize, expected: &'static str },
    #[error("dataset version {found} unsupported (expected {DATASET_VERSION})")]
    Version { found: u32 },
    #[error("thread {question_id} is missing its owner profile")]
    MissingOwner { question_id: u64 },
    #[error("thread {question_id} has no answers, so no best answer")]
    NoBestAnswer { question_id: u64 },
}

/// Turn retained threads into dataset records.
///
/// `histories` maps owner id to asking history over the whole dump (see
/// [`super::owner_histories`]); an owner with no entry gets an empty
/// history. Threads must come from [`super::apply_selection`], so each has
/// an owner and at least one answer.
pub fn assemble_records(
    threads: &[QuestionThread],
    histories: &std::collections::HashMap<u64, Vec<crate::metrics::HistoryEntry>>,
) -> Result<Vec<ThreadRecord>, DatasetError> {
    threads
        .iter()
        .map(|thread| {
            let qid = thread.question.id;
            let owner = thread
                .owner
                .as_ref()
                .ok_or(DatasetError::MissingOwner { question_id: qid })?;
            let best = thread
                .best_answer()
                .ok_or(DatasetError::NoBestAnswer { question_id: qid })?;
            Ok(ThreadRecord {
                question_id: qid,
                label: thread.label,
                creation_date: thread.question.creation_date,
                score: thread.question.score,
                answer_count: thread.answers.len(),
                accepted_answer_id: thread.question.accepted_answer_id,
                body: thread.question.body.clone(),
                best_answer: AnswerRecord {
                    id: best.id,
                    score: best.score,
                    creation_date: best.creation_date,
                    body: best.body.clone(),
                },
                owner: UserProfile {
                    user_id: owner.id,
                    reputation: owner.reputation,
                    last_access_date: owner.last_access_date,
                    question_history: histories.get(&owner.id).cloned().unwrap_or_default(),
                },
            })
        })
        .collect()
}

/// Combine the per-stage tallies into the header.
pub fn build_header(
    criteria: &SelectionCriteria,
    link: &LinkReport,
    selection: &SelectionReport,
    post_row_errors: usize,
    user_row_errors: usize,
) -> DatasetHeader {
    DatasetHeader {
        version: DATASET_VERSION,
        criteria: *criteria,
        counts: DatasetCounts {
            questions_seen: link.questions,
            retained: selection.retained,
            resolved: selection.resolved,
            unresolved: selection.unresolved,
            dropped_too_young: selection.dropped_too_young,
            dropped_too_few_answers: selection.dropped_too_few_answers,
            dropped_missing_owner: selection.dropped_missing_owner,
            dangling_answers: link.dangling_answers,
            forced_unresolved: link.forced_unresolved.len(),
            post_row_errors,
            user_row_errors,
        },
    }
}

pub fn write_dataset<W: Write>(
    mut writer: W,
    header: &DatasetHeader,
    threads: &[ThreadRecord],
) -> Result<(), DatasetError> {
    let line = serde_json::to_string(&DatasetLine::Header(header.clone()))
        .map_err(|source| DatasetError::Json { line: 1, source })?;
    writeln!(writer, "{line}")?;
    for (idx, thread) in threads.iter().enumerate() {
        let line = serde_json::to_string(&DatasetLine::Thread(thread.clone()))
            .map_err(|source| DatasetError::Json { line: idx + 2, source })?;
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

pub fn read_dataset<R: BufRead>(
    reader: R,
) -> Result<(DatasetHeader, Vec<ThreadRecord>), DatasetError> {
    let mut header: Option<DatasetHeader> = None;
    let mut threads = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DatasetLine = serde_json::from_str(&line)
            .map_err(|source| DatasetError::Json { line: idx + 1, source })?;
        match (record, header.is_some()) {
            (DatasetLine::Header(h), false) => {
                if h.version != DATASET_VERSION {
                    return Err(DatasetError::Version { found: h.version });
                }
                header = Some(h);
            }
            (DatasetLine::Header(_), true) => {
                return Err(DatasetError::WrongRecord { line: idx + 1, expected: "thread" });
            }
            (DatasetLine::Thread(t), true) => threads.push(t),
            (DatasetLine::Thread(_), false) => {
                return Err(DatasetError::WrongRecord { line: idx + 1, expected: "header" });
            }
        }
    }
    let header = header.ok_or(DatasetError::Empty)?;
    Ok((header, threads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::HistoryEntry;
    use chrono::NaiveDate;

    fn date(y: i32, m: u32, d: u32) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(y, m, d).unwrap().and_hms_opt(0, 0, 0).unwrap()
    }

    fn sample_header() -> DatasetHeader {
        DatasetHeader {
            version: DATASET_VERSION,
            criteria: SelectionCriteria::new(date(2015, 2, 18)),
            counts: DatasetCounts {
                questions_seen: 3,
                retained: 1,
                unresolved: 1,
                ..DatasetCounts::default()
            },
        }
    }

    fn sample_thread() -> ThreadRecord {
        ThreadRecord {
            question_id: 7,
            label: Label::Unresolved,
            creation_date: date(2014, 3, 1),
            score: 4,
            answer_count: 2,
            accepted_answer_id: None,
            body: "<p>how?</p>".into(),
            best_answer: AnswerRecord {
                id: 8,
                score: 9,
                creation_date: date(2014, 3, 2),
                body: "<p>like this</p>".into(),
            },
            owner: UserProfile {
                user_id: 42,
                reputation: 120,
                last_access_date: date(2015, 2, 1),
                question_history: vec![HistoryEntry {
                    question_id: 7,
                    answered: true,
                    resolved: false,
                }],
            },
        }
    }

    #[test]
    fn roundtrip_preserves_everything() {
        let header = sample_header();
        let threads = vec![sample_thread()];
        let mut buf = Vec::new();
        write_dataset(&mut buf, &header, &threads).unwrap();
        let (h, t) = read_dataset(buf.as_slice()).unwrap();
        assert_eq!(h, header);
        assert_eq!(t, threads);
    }

    #[test]
    fn header_must_come_first() {
        let thread_line =
            serde_json::to_string(&DatasetLine::Thread(sample_thread())).unwrap();
        let err = read_dataset(thread_line.as_bytes()).unwrap_err();
        assert!(matches!(err, DatasetError::WrongRecord { line: 1, expected: "header" }));
    }

    #[test]
    fn empty_file_rejected() {
        let err = read_dataset("".as_bytes()).unwrap_err();
        assert!(matches!(err, DatasetError::Empty));
    }

    #[test]
    fn unknown_version_rejected() {
        let mut header = sample_header();
        header.version = 999;
        let line = serde_json::to_string(&DatasetLine::Header(header)).unwrap();
        let err = read_dataset(line.as_bytes()).unwrap_err();
        assert!(matches!(err, DatasetError::Version { found: 999 }));
    }

    #[test]
    fn garbage_line_reports_line_number() {
        let header_line =
            serde_json::to_string(&DatasetLine::Header(sample_header())).unwrap();
        let text = format!("{header_line}\nnot json");
        let err = read_dataset(text.as_bytes()).unwrap_err();
        assert!(matches!(err, DatasetError::Json { line: 2, .. }));
    }

    #[test]
    fn assemble_pulls_history_from_map() {
        use super::super::{link_threads, PostRow, PostType, UserRow};
        let q = PostRow {
            id: 1,
            post_type: PostType::Question,
            parent_id: None,
            accepted_answer_id: None,
            creation_date: date(2014, 1, 1),
            score: 2,
            body: "<p>q</p>".into(),
            owner_user_id: Some(10),
            answer_count: None,
        };
        let a = PostRow {
            id: 2,
            post_type: PostType::Answer,
            parent_id: Some(1),
            accepted_answer_id: None,
            creation_date: date(2014, 1, 2),
            score: 1,
            body: "<p>a</p>".into(),
            owner_user_id: Some(11),
            answer_count: None,
        };
        let users = [UserRow { id: 10, reputation: 55, last_access_date: date(2015, 1, 1) }];
        let (threads, _) = link_threads(vec![q, a], &users);
        let histories = super::super::owner_histories(&threads);
        let records = assemble_records(&threads, &histories).unwrap();
        assert_eq!(records[0].owner.user_id, 10);
        assert_eq!(records[0].owner.question_history.len(), 1);
        assert!(records[0].owner.question_history[0].answered);
        assert_eq!(records[0].best_answer.id, 2);
    }
}
