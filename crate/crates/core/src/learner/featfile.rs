//! Reading and writing the per-question feature table.
//!
//! The table is a CSV with a fixed header. One row per retained question,
//! already imputed and transformed — the learner consumes it as-is.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Label;

/// Column order of the feature table.
pub const FEATURE_CSV_HEADER: [&str; 7] =
    ["question_id", "te", "arr", "lad_log", "votes", "rep_log", "label"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub question_id: u64,
    /// Topic entropy of the question body.
    pub te: f64,
    /// Answer rejection ratio of the asker.
    pub arr: f64,
    /// log(1 + days since the asker's last access).
    pub lad_log: f64,
    /// Raw question score.
    pub votes: i64,
    /// log(1 + asker reputation).
    pub rep_log: f64,
    pub label: Label,
}

#[derive(Debug, Error)]
pub enum FeatFileError {
    #[error("feature file I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("feature file is malformed: {0}")]
    Csv(#[from] csv::Error),
    #[error("feature file header mismatch: expected {expected:?}, found {found:?}")]
    Header { expected: Vec<String>, found: Vec<String> },
}

pub fn write_feature_csv<W: Write>(
    writer: W,
    records: &[FeatureRecord],
) -> Result<(), FeatFileError> {
    let mut out = csv::Writer::from_writer(writer);
    for record in records {
        out.serialize(record)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_feature_csv<R: Read>(reader: R) -> Result<Vec<FeatureRecord>, FeatFileError> {
    let mut input = csv::Reader::from_reader(reader);
    let found: Vec<String> = input.headers()?.iter().map(str::to_owned).collect();
    let expected: Vec<String> = FEATURE_CSV_HEADER.iter().map(|s| s.to_string()).collect();
    if found != expected {
        return Err(FeatFileError::Header { expected, found });
    }
    let mut records = Vec::new();
    for row in input.deserialize() {
        records.push(row?);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<FeatureRecord> {
        vec![
            FeatureRecord {
                question_id: 11,
                te: 1.25,
                arr: 0.5,
                lad_log: 3.912023005428146,
                votes: -2,
                rep_log: 7.0,
                label: Label::Unresolved,
            },
            FeatureRecord {
                question_id: 42,
                te: 0.0,
                arr: 1.0,
                lad_log: 0.0,
                votes: 15,
                rep_log: 9.21044036697651,
                label: Label::Resolved,
            },
        ]
    }

    #[test]
    fn roundtrip_preserves_records() {
        let records = sample();
        let mut buf = Vec::new();
        write_feature_csv(&mut buf, &records).unwrap();
        let back = read_feature_csv(buf.as_slice()).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn header_is_stable() {
        let mut buf = Vec::new();
        write_feature_csv(&mut buf, &sample()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(first, "question_id,te,arr,lad_log,votes,rep_log,label");
    }

    #[test]
    fn labels_round_trip_as_words() {
        let mut buf = Vec::new();
        write_feature_csv(&mut buf, &sample()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("Unresolved"));
        assert!(text.contains("Resolved"));
    }

    #[test]
    fn wrong_header_is_rejected() {
        let bad = "question_id,entropy,arr,lad_log,votes,rep_log,label\n1,0,0,0,0,0,Resolved\n";
        match read_feature_csv(bad.as_bytes()) {
            Err(FeatFileError::Header { found, .. }) => {
                assert_eq!(found[1], "entropy");
            }
            other => panic!("expected header error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_row_is_an_error() {
        let bad =
            "question_id,te,arr,lad_log,votes,rep_log,label\n1,not-a-number,0,0,0,0,Resolved\n";
        assert!(matches!(read_feature_csv(bad.as_bytes()), Err(FeatFileError::Csv(_))));
    }

    #[test]
    fn writes_are_deterministic() {
        let records = sample();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_feature_csv(&mut a, &records).unwrap();
        write_feature_csv(&mut b, &records).unwrap();
        assert_eq!(a, b);
    }
}
