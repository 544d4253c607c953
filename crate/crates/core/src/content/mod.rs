//! Post content analysis: HTML segmentation and text tokenization.
//!
//! Post bodies arrive as HTML. [`segment_html`] splits a body into code
//! blocks and prose; the tokenizers in [`text`] turn prose into the
//! sentence/word/syllable counts the readability formulas consume and the
//! normalized token streams the topic model consumes.

mod html;
mod text;

pub use html::{decode_entities, segment_html};
pub use text::{
    count_syllables, normalize_for_topics, split_sentences, stopwords, text_stats, tokenize_words,
};

/// A post body split into code and prose.
///
/// Code inside `<pre><code>` blocks and multi-line bare `<code>` spans lands
/// in `code_blocks`; everything else is tag-stripped, entity-decoded prose.
/// Single-line inline `<code>` spans stay in the prose as literal text since
/// they function as words in their sentences.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContentSegments {
    pub code_blocks: Vec<String>,
    pub prose: String,
}

/// Aggregate token counts for a prose string.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TextStats {
    pub sentences: usize,
    pub words: usize,
    pub syllables: usize,
    /// Words with three or more syllables.
    pub complex_words: usize,
    /// Alphabetic characters across all words.
    pub letters: usize,
    /// Alphanumeric characters across all words.
    pub chars: usize,
}
