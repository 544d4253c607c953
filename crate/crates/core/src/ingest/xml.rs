//! Stack Exchange dump XML: streaming readers for Posts/Users files and
//! writers for producing synthetic dumps in the same shape.
//!
//! A dump is a single root element containing one `row` element per record
//! with CamelCase attributes (`Id`, `PostTypeId`, `CreationDate`, ...).
//! Structural problems are fatal and carry a byte offset; a bad row (missing
//! or unparseable required attribute) is skipped and tallied so a large dump
//! with a few damaged rows still ingests.

use std::fmt::Write as _;
use std::io::BufRead;

use chrono::NaiveDateTime;
use quick_xml::events::Event;
use quick_xml::Reader;
use thiserror::Error;

use super::{PostRow, PostType, UserRow};

/// Timestamp layout used by dump attributes, with optional fractional
/// seconds (`2008-07-31T21:42:52.667`).
const DATE_FORMAT: &str = "%Y-%m-%dT%H:%M:%S%.f";

#[derive(Debug, Error)]
pub enum XmlError {
    #[error("malformed XML near byte {offset}: {source}")]
    Syntax {
        offset: u64,
        #[source]
        source: quick_xml::Error,
    },
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
}

/// One skipped row: where it ended and why it was unusable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub offset: u64,
    pub reason: String,
}

/// Rows that parsed plus the tally of rows that did not.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseOutcome<T> {
    pub rows: Vec<T>,
    pub row_errors: Vec<RowError>,
}

/// Attribute name/value pairs of one `row` element, XML-unescaped.
struct RawRow {
    attrs: Vec<(String, String)>,
}

impl RawRow {
    fn get(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    fn required(&self, name: &str) -> Result<&str, String> {
        self.get(name)
            .ok_or_else(|| format!("missing required attribute {name}"))
    }

    fn parse_u64(&self, name: &str) -> Result<u64, String> {
        self.required(name)?
            .parse()
            .map_err(|_| format!("attribute {name} is not a non-negative integer"))
    }

    fn parse_opt_u64(&self, name: &str) -> Result<Option<u64>, String> {
        self.get(name)
            .map(|v| {
                v.parse()
                    .map_err(|_| format!("attribute {name} is not a non-negative integer"))
            })
            .transpose()
    }

    fn parse_date(&self, name: &str) -> Result<NaiveDateTime, String> {
        let raw = self.required(name)?;
        NaiveDateTime::parse_from_str(raw, DATE_FORMAT)
            .map_err(|_| format!("attribute {name} is not a timestamp: {raw:?}"))
    }
}

/// Pull every `row` element out of a dump, feeding each through `build`;
/// rows where `build` fails are recorded and skipped, `build`'s `None`
/// results are silently ignored (uninteresting row kinds).
fn parse_rows<R: BufRead, T>(
    reader: R,
    build: impl Fn(&RawRow) -> Result<Option<T>, String>,
) -> Result<ParseOutcome<T>, XmlError> {
    let mut xml = Reader::from_reader(reader);
    let mut buf = Vec::new();
    let mut rows = Vec::new();
    let mut row_errors = Vec::new();
    loop {
        let event = xml.read_event_into(&mut buf).map_err(|source| XmlError::Syntax {
            offset: xml.buffer_position(),
            source,
        })?;
        match event {
            Event::Empty(ref e) | Event::Start(ref e) if e.name().as_ref() == b"row" => {
                let offset = xml.buffer_position();
                let mut attrs = Vec::new();
                let mut attr_problem: Option<String> = None;
                for attr in e.attributes() {
                    let attr = match attr {
                        Ok(a) => a,
                        Err(err) => {
                            attr_problem = Some(format!("malformed attribute: {err}"));
                            break;
                        }
                    };
                    let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
                    match attr.unescape_value() {
                        Ok(value) => attrs.push((key, value.into_owned())),
                        Err(err) => {
                            attr_problem = Some(format!("attribute {key} unescape failed: {err}"));
                            break;
                        }
                    }
                }
                let raw = RawRow { attrs };
                let outcome = match attr_problem {
                    Some(reason) => Err(reason),
                    None => build(&raw),
                };
                match outcome {
                    Ok(Some(row)) => rows.push(row),
                    Ok(None) => {}
                    Err(reason) => row_errors.push(RowError { offset, reason }),
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    Ok(ParseOutcome { rows, row_errors })
}

/// Parse a Posts dump. Rows with `PostTypeId` other than 1 (question) or 2
/// (answer) are skipped without error.
pub fn parse_posts<R: BufRead>(reader: R) -> Result<ParseOutcome<PostRow>, XmlError> {
    parse_rows(reader, |raw| {
        let post_type = match raw.required("PostTypeId")? {
            "1" => PostType::Question,
            "2" => PostType::Answer,
            _ => return Ok(None),
        };
        Ok(Some(PostRow {
            id: raw.parse_u64("Id")?,
            post_type,
            parent_id: raw.parse_opt_u64("ParentId")?,
            accepted_answer_id: raw.parse_opt_u64("AcceptedAnswerId")?,
            creation_date: raw.parse_date("CreationDate")?,
            score: raw
                .get("Score")
                .map(|v| v.parse().map_err(|_| "attribute Score is not an integer".to_string()))
                .transpose()?
                .unwrap_or(0),
            body: raw.get("Body").unwrap_or("").to_string(),
            owner_user_id: raw.parse_opt_u64("OwnerUserId")?,
            answer_count: raw.parse_opt_u64("AnswerCount")?,
        }))
    })
}

/// Parse a Users dump; requires `Id`, `Reputation`, and `LastAccessDate`.
pub fn parse_users<R: BufRead>(reader: R) -> Result<ParseOutcome<UserRow>, XmlError> {
    parse_rows(reader, |raw| {
        Ok(Some(UserRow {
            id: raw.parse_u64("Id")?,
            reputation: raw.parse_u64("Reputation")?,
            last_access_date: raw.parse_date("LastAccessDate")?,
        }))
    })
}

fn escape_attr(out: &mut String, value: &str) {
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            _ => out.push(c),
        }
    }
}

fn push_attr(out: &mut String, name: &str, value: &str) {
    out.push(' ');
    out.push_str(name);
    out.push_str("=\"");
    escape_attr(out, value);
    out.push('"');
}

fn format_date(date: NaiveDateTime) -> String {
    date.format(DATE_FORMAT).to_string()
}

/// Render posts as a dump file; `parse_posts` reads the result back to the
/// same rows.
pub fn posts_to_xml(posts: &[PostRow]) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<posts>\n");
    for post in posts {
        out.push_str("  <row");
        push_attr(&mut out, "Id", &post.id.to_string());
        let type_id = match post.post_type {
            PostType::Question => "1",
            PostType::Answer => "2",
        };
        push_attr(&mut out, "PostTypeId", type_id);
        if let Some(parent) = post.parent_id {
            push_attr(&mut out, "ParentId", &parent.to_string());
        }
        if let Some(accepted) = post.accepted_answer_id {
            push_attr(&mut out, "AcceptedAnswerId", &accepted.to_string());
        }
        push_attr(&mut out, "CreationDate", &format_date(post.creation_date));
        push_attr(&mut out, "Score", &post.score.to_string());
        push_attr(&mut out, "Body", &post.body);
        if let Some(owner) = post.owner_user_id {
            push_attr(&mut out, "OwnerUserId", &owner.to_string());
        }
        if let Some(count) = post.answer_count {
            push_attr(&mut out, "AnswerCount", &count.to_string());
        }
        out.push_str(" />\n");
    }
    out.push_str("</posts>\n");
    out
}

/// Render users as a dump file; inverse of `parse_users`.
pub fn users_to_xml(users: &[UserRow]) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<users>\n");
    for user in users {
        out.push_str("  <row");
        push_attr(&mut out, "Id", &user.id.to_string());
        push_attr(&mut out, "Reputation", &user.reputation.to_string());
        let _ = write!(out, " LastAccessDate=\"{}\"", format_date(user.last_access_date));
        out.push_str(" />\n");
    }
    out.push_str("</users>\n");
    out
}
