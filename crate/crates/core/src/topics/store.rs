//! Plain-text persistence for trained topic models.
//!
//! The format is line-oriented: a header with the run parameters, then the
//! two count matrices as sparse `index index count` triples. Floats are
//! written with Rust's shortest round-trip formatting, so a save/load cycle
//! reproduces the model bit for bit.
//!
//! ```text
//! lda-model v1
//! k 2
//! vocab 5
//! docs 4
//! hyper_alpha 25
//! hyper_beta 0.01
//! seed 42
//! iterations 1000
//! topic_word 3        <- number of triples that follow
//! 0 1 7
//! ...
//! doc_topic 2
//! 0 0 5
//! ...
//! ```

use std::io::{BufRead, Write};

use thiserror::Error;

use super::TopicModel;

const MAGIC: &str = "lda-model v1";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("model file I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file line {line}: {reason}")]
    Format { line: usize, reason: String },
}

fn format_err(line: usize, reason: impl Into<String>) -> StoreError {
    StoreError::Format { line, reason: reason.into() }
}

pub fn save_model<W: Write>(mut writer: W, model: &TopicModel) -> Result<(), StoreError> {
    writeln!(writer, "{MAGIC}")?;
    writeln!(writer, "k {}", model.k)?;
    writeln!(writer, "vocab {}", model.vocab_size)?;
    writeln!(writer, "docs {}", model.n_docs())?;
    writeln!(writer, "hyper_alpha {}", model.hyper_alpha)?;
    writeln!(writer, "hyper_beta {}", model.hyper_beta)?;
    writeln!(writer, "seed {}", model.seed)?;
    writeln!(writer, "iterations {}", model.iterations)?;

    let triples: Vec<(usize, usize, u32)> = model.nonzero_topic_word().collect();
    writeln!(writer, "topic_word {}", triples.len())?;
    for (topic, word, count) in triples {
        writeln!(writer, "{topic} {word} {count}")?;
    }
    let triples: Vec<(usize, usize, u32)> = model.nonzero_doc_topic().collect();
    writeln!(writer, "doc_topic {}", triples.len())?;
    for (doc, topic, count) in triples {
        writeln!(writer, "{doc} {topic} {count}")?;
    }
    Ok(())
}

/// Line source that tracks its position for error messages.
struct Lines<R: BufRead> {
    reader: R,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String, StoreError> {
        let mut line = String::new();
        let read = self.reader.read_line(&mut line)?;
        if read == 0 {
            return Err(format_err(self.number + 1, "unexpected end of file"));
        }
        self.number += 1;
        Ok(line.trim_end_matches(['\n', '\r']).to_string())
    }

    /// Read a `name value` header line and parse the value.
    fn field<T: std::str::FromStr>(&mut self, name: &str) -> Result<T, StoreError> {
        let line = self.next()?;
        let value = line
            .strip_prefix(name)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| format_err(self.number, format!("expected `{name} <value>`")))?;
        value
            .parse()
            .map_err(|_| format_err(self.number, format!("bad value for {name}: {value:?}")))
    }
}

pub fn load_model<R: BufRead>(reader: R) -> Result<TopicModel, StoreError> {
    let mut lines = Lines { reader, number: 0 };
    let magic = lines.next()?;
    if magic != MAGIC {
        return Err(format_err(1, format!("not a model file (got {magic:?})")));
    }
    let k: usize = lines.field("k")?;
    let vocab_size: usize = lines.field("vocab")?;
    let n_docs: usize = lines.field("docs")?;
    let hyper_alpha: f64 = lines.field("hyper_alpha")?;
    let hyper_beta: f64 = lines.field("hyper_beta")?;
    let seed: u64 = lines.field("seed")?;
    let iterations: usize = lines.field("iterations")?;

    let mut topic_word = vec![0u32; k * vocab_size];
    let nnz: usize = lines.field("topic_word")?;
    for _ in 0..nnz {
        let (topic, word, count) = triple(&mut lines)?;
        if topic >= k || word >= vocab_size {
            return Err(format_err(
                lines.number,
                format!("topic_word index ({topic}, {word}) out of range"),
            ));
        }
        topic_word[topic * vocab_size + word] = count;
    }

    let mut doc_topic = vec![0u32; n_docs * k];
    let nnz: usize = lines.field("doc_topic")?;
    for _ in 0..nnz {
        let (doc, topic, count) = triple(&mut lines)?;
        if doc >= n_docs || topic >= k {
            return Err(format_err(
                lines.number,
                format!("doc_topic index ({doc}, {topic}) out of range"),
            ));
        }
        doc_topic[doc * k + topic] = count;
    }

    TopicModel::from_counts(
        k,
        vocab_size,
        hyper_alpha,
        hyper_beta,
        seed,
        iterations,
        topic_word,
        doc_topic,
    )
    .map_err(|e| format_err(lines.number, e.to_string()))
}

fn triple<R: BufRead>(lines: &mut Lines<R>) -> Result<(usize, usize, u32), StoreError> {
    let line = lines.next()?;
    let mut parts = line.split_ascii_whitespace();
    let parse = |s: Option<&str>, lines: &Lines<R>| {
        s.and_then(|v| v.parse::<u64>().ok())
            .ok_or_else(|| format_err(lines.number, format!("expected `a b count`, got {line:?}")))
    };
    let a = parse(parts.next(), lines)? as usize;
    let b = parse(parts.next(), lines)? as usize;
    let c = parse(parts.next(), lines)? as u32;
    Ok((a, b, c))
}
