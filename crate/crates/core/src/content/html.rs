//! Forgiving HTML segmentation.
//!
//! Post bodies are mostly well-formed HTML fragments, but the scanner never
//! fails: an unterminated tag or block simply falls through to prose, so the
//! worst case for a mangled body is that all of it is treated as prose.

use super::ContentSegments;

/// Block-level tags whose close (or self-close, for `br`) ends a prose run.
const BLOCK_TAGS: &[&str] = &[
    "p", "div", "li", "ul", "ol", "h1", "h2", "h3", "h4", "h5", "h6", "blockquote", "table", "tr",
    "td", "th",
];

/// Split an HTML body into code blocks and prose.
///
/// `<pre><code>…</code></pre>` contents become code blocks, as do bare
/// `<code>` spans containing a newline. Single-line inline `<code>` spans
/// are kept in the prose as their literal text. All remaining text is
/// tag-stripped and entity-decoded.
pub fn segment_html(body: &str) -> ContentSegments {
    let mut code_blocks = Vec::new();
    let mut prose = String::new();
    let bytes = body.as_bytes();
    let mut i = 0;

    while i < bytes.len() {
        if bytes[i] == b'<' {
            if let Some(tag) = Tag::parse(body, i) {
                if tag.name == "!--" {
                    // Comment: skip to the terminator, or to the end if unterminated.
                    i = match body[i..].find("-->") {
                        Some(rel) => i + rel + 3,
                        None => bytes.len(),
                    };
                    continue;
                }
                if !tag.closing && tag.name == "pre" {
                    if let Some((block, next)) = extract_pre(body, tag.end) {
                        if let Some(code) = block {
                            code_blocks.push(code);
                        }
                        prose.push('\n');
                        i = next;
                        continue;
                    }
                    // No closing </pre>: drop the tag and scan its content as prose.
                    i = tag.end;
                    continue;
                }
                if !tag.closing && tag.name == "code" {
                    if let Some((inner, next)) = inner_until(body, tag.end, "</code") {
                        let decoded = decode_entities(inner);
                        if decoded.contains('\n') {
                            code_blocks.push(decoded);
                        } else {
                            prose.push_str(&decoded);
                        }
                        i = next;
                        continue;
                    }
                    i = tag.end;
                    continue;
                }
                if tag.name == "br" || (tag.closing && BLOCK_TAGS.contains(&tag.name.as_str())) {
                    prose.push('\n');
                }
                i = tag.end;
                continue;
            }
            // Not a tag: keep the '<' as literal text and move on.
            prose.push('<');
            i += 1;
            continue;
        }
        let text_end = body[i..].find('<').map(|rel| i + rel).unwrap_or(bytes.len());
        prose.push_str(&decode_entities(&body[i..text_end]));
        i = text_end;
    }

    let trimmed = prose.trim();
    ContentSegments {
        code_blocks,
        prose: trimmed.to_string(),
    }
}

struct Tag {
    name: String,
    closing: bool,
    /// Byte offset just past the terminating '>'.
    end: usize,
}

impl Tag {
    fn parse(body: &str, start: usize) -> Option<Tag> {
        debug_assert_eq!(body.as_bytes()[start], b'<');
        if body[start..].starts_with("<!--") {
            return Some(Tag {
                name: "!--".into(),
                closing: false,
                end: start + 4,
            });
        }
        let close = body[start..].find('>')?;
        let inner = &body[start + 1..start + close];
        let (closing, rest) = match inner.strip_prefix('/') {
            Some(rest) => (true, rest),
            None => (false, inner),
        };
        // A real tag starts with a letter; anything else ("< 3", "<->") is
        // literal text.
        if !rest.starts_with(|c: char| c.is_ascii_alphabetic()) {
            return None;
        }
        let name: String = rest
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Some(Tag {
            name,
            closing,
            end: start + close + 1,
        })
    }
}

/// Slice from `start` up to the next case-insensitive occurrence of
/// `pattern` (a tag prefix like `"</code"`), returning the inner slice and
/// the offset just past the pattern's closing '>'.
fn inner_until<'a>(body: &'a str, start: usize, pattern: &str) -> Option<(&'a str, usize)> {
    let lower = body[start..].to_ascii_lowercase();
    let rel = lower.find(pattern)?;
    let tag_end = body[start + rel..].find('>')? + start + rel + 1;
    Some((&body[start..start + rel], tag_end))
}

/// Consume a `<pre>` element starting just past its opening tag.
///
/// Returns the decoded code block, if the element wraps a `<code>` span, and
/// the offset just past `</pre>`. Text inside `<pre>` but outside `<code>`
/// is discarded; a `<pre>` without `<code>` yields no code block.
fn extract_pre(body: &str, start: usize) -> Option<(Option<String>, usize)> {
    let (pre_inner, next) = inner_until(body, start, "</pre")?;
    let lower = pre_inner.to_ascii_lowercase();
    let code_open = match lower.find("<code") {
        Some(pos) => pos,
        None => return Some((None, next)),
    };
    let content_start = pre_inner[code_open..].find('>')? + code_open + 1;
    let content_end = match lower[content_start..].find("</code") {
        Some(rel) => content_start + rel,
        None => pre_inner.len(),
    };
    let code = decode_entities(&pre_inner[content_start..content_end]);
    Some((Some(code), next))
}

/// Decode the HTML entities that occur in practice in dump bodies: the five
/// XML-predefined names, `&nbsp;`, and numeric references. Unrecognized
/// entities are left as literal text.
pub fn decode_entities(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        let semi = match rest[..rest.len().min(12)].find(';') {
            Some(s) => s,
            None => {
                out.push('&');
                rest = &rest[1..];
                continue;
            }
        };
        let name = &rest[1..semi];
        let decoded = match name {
            "amp" => Some('&'),
            "lt" => Some('<'),
            "gt" => Some('>'),
            "quot" => Some('"'),
            "apos" => Some('\''),
            "nbsp" => Some(' '),
            _ => {
                if let Some(num) = name.strip_prefix("#x").or_else(|| name.strip_prefix("#X")) {
                    u32::from_str_radix(num, 16).ok().and_then(char::from_u32)
                } else if let Some(num) = name.strip_prefix('#') {
                    num.parse::<u32>().ok().and_then(char::from_u32)
                } else {
                    None
                }
            }
        };
        match decoded {
            Some(c) => {
                out.push(c);
                rest = &rest[semi + 1..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}
