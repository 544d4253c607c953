//! Readability metrics for question content.
//!
//! Text readability is the average of five standard grade-level formulas
//! computed from [`TextStats`]. Code readability is a logistic surrogate
//! over surface features of the code blocks: the trained third-party tool
//! the score imitates is not redistributable, so the feature vector and the
//! scorer weights are exposed and replaceable (see
//! [`ScorerWeights::parse`]). A formula whose inputs are degenerate (no
//! words, no sentences) returns `None` and the caller applies its
//! missing-value policy.

use std::collections::HashSet;
use std::sync::OnceLock;

use thiserror::Error;

use crate::content::TextStats;

/// Flesch-Kincaid grade level: `0.39*(W/S) + 11.8*(Syl/W) - 15.59`.
pub fn flesch_kincaid(stats: &TextStats) -> Option<f64> {
    if stats.words == 0 || stats.sentences == 0 {
        return None;
    }
    let w = stats.words as f64;
    let s = stats.sentences as f64;
    let syl = stats.syllables as f64;
    Some(0.39 * (w / s) + 11.8 * (syl / w) - 15.59)
}

/// Gunning fog score: `0.4 * ((W/S) + 100*(complex/W))`.
pub fn gunning_fog(stats: &TextStats) -> Option<f64> {
    if stats.words == 0 || stats.sentences == 0 {
        return None;
    }
    let w = stats.words as f64;
    let s = stats.sentences as f64;
    let complex = stats.complex_words as f64;
    Some(0.4 * ((w / s) + 100.0 * (complex / w)))
}

/// Coleman-Liau index: `0.0588*L - 0.296*S - 15.8` with `L` letters per 100
/// words and `S` sentences per 100 words.
pub fn coleman_liau(stats: &TextStats) -> Option<f64> {
    if stats.words == 0 {
        return None;
    }
    let w = stats.words as f64;
    let l = 100.0 * stats.letters as f64 / w;
    let s = 100.0 * stats.sentences as f64 / w;
    Some(0.0588 * l - 0.296 * s - 15.8)
}

/// SMOG index: `1.0430*sqrt(complex*30/sentences) + 3.1291`.
pub fn smog(stats: &TextStats) -> Option<f64> {
    if stats.sentences == 0 {
        return None;
    }
    let complex = stats.complex_words as f64;
    let s = stats.sentences as f64;
    Some(1.0430 * (complex * 30.0 / s).sqrt() + 3.1291)
}

/// Automated readability index: `4.71*(chars/W) + 0.5*(W/S) - 21.43`.
pub fn ari(stats: &TextStats) -> Option<f64> {
    if stats.words == 0 || stats.sentences == 0 {
        return None;
    }
    let w = stats.words as f64;
    let s = stats.sentences as f64;
    let chars = stats.chars as f64;
    Some(4.71 * (chars / w) + 0.5 * (w / s) - 21.43)
}

/// Arithmetic mean over the formulas that produced a grade; `None` when all
/// five were undefined.
pub fn average_grade(grades: &[Option<f64>; 5]) -> Option<f64> {
    let defined: Vec<f64> = grades.iter().flatten().copied().collect();
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

/// All five grades plus their average for one document.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TextReadability {
    pub flesch_kincaid: Option<f64>,
    pub gunning_fog: Option<f64>,
    pub coleman_liau: Option<f64>,
    pub smog: Option<f64>,
    pub ari: Option<f64>,
    pub average: Option<f64>,
}

pub fn text_readability(stats: &TextStats) -> TextReadability {
    let grades = [
        flesch_kincaid(stats),
        gunning_fog(stats),
        coleman_liau(stats),
        smog(stats),
        ari(stats),
    ];
    TextReadability {
        flesch_kincaid: grades[0],
        gunning_fog: grades[1],
        coleman_liau: grades[2],
        smog: grades[3],
        ari: grades[4],
        average: average_grade(&grades),
    }
}

/// Number of surface features in [`CodeFeatureVector`].
pub const CODE_FEATURE_COUNT: usize = 10;

/// Feature names in vector order; these are also the weight-file keys.
pub const CODE_FEATURE_NAMES: [&str; CODE_FEATURE_COUNT] = [
    "avg_line_length",
    "max_line_length",
    "avg_identifier_length",
    "identifiers_per_line",
    "keywords_per_line",
    "numbers_per_line",
    "comments_per_line",
    "blank_line_fraction",
    "avg_indentation",
    "branching_tokens_per_line",
];

/// Surface features of a question's code blocks, lexed language-agnostically.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CodeFeatureVector {
    pub avg_line_length: f64,
    pub max_line_length: f64,
    pub avg_identifier_length: f64,
    pub identifiers_per_line: f64,
    pub keywords_per_line: f64,
    pub numbers_per_line: f64,
    pub comments_per_line: f64,
    pub blank_line_fraction: f64,
    pub avg_indentation: f64,
    pub branching_tokens_per_line: f64,
    /// Set when there was no code at all; the features are then all zero.
    pub empty: bool,
}

impl CodeFeatureVector {
    pub fn as_array(&self) -> [f64; CODE_FEATURE_COUNT] {
        [
            self.avg_line_length,
            self.max_line_length,
            self.avg_identifier_length,
            self.identifiers_per_line,
            self.keywords_per_line,
            self.numbers_per_line,
            self.comments_per_line,
            self.blank_line_fraction,
            self.avg_indentation,
            self.branching_tokens_per_line,
        ]
    }
}

/// Tokens that count as branching constructs.
const BRANCHING_TOKENS: &[&str] = &["if", "for", "while", "switch", "case", "catch"];

static KEYWORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();

/// The shipped multi-language keyword list used by the code lexer.
pub fn code_keywords() -> &'static HashSet<&'static str> {
    KEYWORDS.get_or_init(|| {
        include_str!("../resources/code_keywords.txt")
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect()
    })
}

/// Compute surface features over the concatenation of the code blocks.
///
/// The lexer is language-agnostic: identifiers are letter-initial
/// alphanumeric runs not in the keyword list, numbers are digit-initial
/// runs, and a line counts as commented when it carries `//`, `/*`, or a
/// leading `#`, `*` or `--`.
pub fn code_features(code_blocks: &[String]) -> CodeFeatureVector {
    let code = code_blocks.join("\n");
    if code.trim().is_empty() {
        return CodeFeatureVector {
            empty: true,
            ..CodeFeatureVector::default()
        };
    }

    let lines: Vec<&str> = code.split('\n').collect();
    let keywords = code_keywords();
    let n_lines = lines.len() as f64;

    let mut total_len = 0usize;
    let mut max_len = 0usize;
    let mut blank = 0usize;
    let mut comment_lines = 0usize;
    let mut indent_total = 0usize;
    let mut non_blank = 0usize;
    let mut identifiers = 0usize;
    let mut identifier_chars = 0usize;
    let mut keyword_count = 0usize;
    let mut numbers = 0usize;
    let mut branching = 0usize;

    for line in &lines {
        let len = line.chars().count();
        total_len += len;
        max_len = max_len.max(len);
        let trimmed = line.trim();
        if trimmed.is_empty() {
            blank += 1;
            continue;
        }
        non_blank += 1;
        indent_total += line
            .chars()
            .take_while(|c| *c == ' ' || *c == '\t')
            .map(|c| if c == '\t' { 4 } else { 1 })
            .sum::<usize>();
        if line.contains("//")
            || line.contains("/*")
            || trimmed.starts_with('#')
            || trimmed.starts_with('*')
            || trimmed.starts_with("--")
        {
            comment_lines += 1;
        }
        for token in lex_alnum_runs(line) {
            if token.starts_with(|c: char| c.is_ascii_digit()) {
                numbers += 1;
            } else {
                let lower = token.to_ascii_lowercase();
                if BRANCHING_TOKENS.contains(&lower.as_str()) {
                    branching += 1;
                }
                if keywords.contains(lower.as_str()) {
                    keyword_count += 1;
                } else {
                    identifiers += 1;
                    identifier_chars += token.chars().count();
                }
            }
        }
    }

    CodeFeatureVector {
        avg_line_length: total_len as f64 / n_lines,
        max_line_length: max_len as f64,
        avg_identifier_length: if identifiers > 0 {
            identifier_chars as f64 / identifiers as f64
        } else {
            0.0
        },
        identifiers_per_line: identifiers as f64 / n_lines,
        keywords_per_line: keyword_count as f64 / n_lines,
        numbers_per_line: numbers as f64 / n_lines,
        comments_per_line: comment_lines as f64 / n_lines,
        blank_line_fraction: blank as f64 / n_lines,
        avg_indentation: if non_blank > 0 {
            indent_total as f64 / non_blank as f64
        } else {
            0.0
        },
        branching_tokens_per_line: branching as f64 / n_lines,
        empty: false,
    }
}

/// Maximal alphanumeric runs in a line.
fn lex_alnum_runs(line: &str) -> Vec<&str> {
    let mut runs = Vec::new();
    let mut start: Option<usize> = None;
    for (pos, c) in line.char_indices() {
        if c.is_alphanumeric() {
            start.get_or_insert(pos);
        } else if let Some(s) = start.take() {
            runs.push(&line[s..pos]);
        }
    }
    if let Some(s) = start {
        runs.push(&line[s..]);
    }
    runs
}

/// Scorer parameters: a bias plus one weight per code feature.
#[derive(Debug, Clone, PartialEq)]
pub struct ScorerWeights {
    pub bias: f64,
    pub weights: [f64; CODE_FEATURE_COUNT],
}

#[derive(Debug, Error)]
pub enum WeightsError {
    #[error("weights line {line} is not `key = value`: {text:?}")]
    Malformed { line: usize, text: String },
    #[error("unknown weight key {key:?} on line {line}")]
    UnknownKey { key: String, line: usize },
    #[error("bad numeric value for {key:?} on line {line}")]
    BadValue { key: String, line: usize },
    #[error("weight key {key:?} missing from config")]
    MissingKey { key: String },
    #[error("feature vector has {got} entries, scorer expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },
}

impl ScorerWeights {
    /// Parse the documented `key = value` text format. Lines starting with
    /// `#` and blank lines are ignored; every feature key plus `bias` must
    /// appear exactly once.
    pub fn parse(text: &str) -> Result<ScorerWeights, WeightsError> {
        let mut bias: Option<f64> = None;
        let mut weights: [Option<f64>; CODE_FEATURE_COUNT] = [None; CODE_FEATURE_COUNT];
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| WeightsError::Malformed {
                line: idx + 1,
                text: raw.to_string(),
            })?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| WeightsError::BadValue {
                key: key.to_string(),
                line: idx + 1,
            })?;
            if key == "bias" {
                bias = Some(value);
            } else if let Some(pos) = CODE_FEATURE_NAMES.iter().position(|n| *n == key) {
                weights[pos] = Some(value);
            } else {
                return Err(WeightsError::UnknownKey {
                    key: key.to_string(),
                    line: idx + 1,
                });
            }
        }
        let bias = bias.ok_or_else(|| WeightsError::MissingKey { key: "bias".into() })?;
        let mut out = [0.0; CODE_FEATURE_COUNT];
        for (pos, w) in weights.iter().enumerate() {
            out[pos] = w.ok_or_else(|| WeightsError::MissingKey {
                key: CODE_FEATURE_NAMES[pos].to_string(),
            })?;
        }
        Ok(ScorerWeights { bias, weights: out })
    }

    /// The shipped default weights.
    pub fn default_weights() -> ScorerWeights {
        ScorerWeights::parse(include_str!("../resources/cr_weights.conf"))
            .expect("shipped weights file parses")
    }
}

/// Logistic code readability score over z-scored features, in (0, 1).
pub fn code_readability(z_features: &[f64], weights: &ScorerWeights) -> Result<f64, WeightsError> {
    if z_features.len() != CODE_FEATURE_COUNT {
        return Err(WeightsError::DimensionMismatch {
            got: z_features.len(),
            expected: CODE_FEATURE_COUNT,
        });
    }
    let linear: f64 = weights.bias
        + z_features
            .iter()
            .zip(weights.weights.iter())
            .map(|(z, w)| z * w)
            .sum::<f64>();
    Ok(sigmoid(linear))
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Z-score each feature column over a set of code feature vectors.
///
/// A column with zero variance maps to all-zero z values; with fewer than
/// two vectors every column is constant, so a lone document scores from the
/// bias alone.
pub fn zscore_code_features(vectors: &[CodeFeatureVector]) -> Vec<[f64; CODE_FEATURE_COUNT]> {
    let n = vectors.len();
    if n == 0 {
        return Vec::new();
    }
    let mut mean = [0.0; CODE_FEATURE_COUNT];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v.as_array()) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut var = [0.0; CODE_FEATURE_COUNT];
    for v in vectors {
        for ((s, x), m) in var.iter_mut().zip(v.as_array()).zip(mean) {
            *s += (x - m) * (x - m);
        }
    }
    let std: Vec<f64> = var.iter().map(|s| (s / n as f64).sqrt()).collect();
    vectors
        .iter()
        .map(|v| {
            let mut z = [0.0; CODE_FEATURE_COUNT];
            for (i, x) in v.as_array().into_iter().enumerate() {
                z[i] = if std[i] > 1e-12 { (x - mean[i]) / std[i] } else { 0.0 };
            }
            z
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(
        sentences: usize,
        words: usize,
        syllables: usize,
        complex_words: usize,
        letters: usize,
        chars: usize,
    ) -> TextStats {
        TextStats {
            sentences,
            words,
            syllables,
            complex_words,
            letters,
            chars,
        }
    }

    #[test]
    fn flesch_kincaid_golden() {
        let g = flesch_kincaid(&stats(1, 9, 11, 0, 0, 0)).unwrap();
        assert!((g - 2.3422).abs() < 1e-4, "{g}");
        let g = flesch_kincaid(&stats(1, 10, 15, 0, 0, 0)).unwrap();
        assert!((g - 6.01).abs() < 1e-9, "{g}");
        assert!(flesch_kincaid(&stats(1, 0, 0, 0, 0, 0)).is_none());
    }

    #[test]
    fn gunning_fog_golden() {
        let g = gunning_fog(&stats(10, 100, 0, 10, 0, 0)).unwrap();
        assert!((g - 8.0).abs() < 1e-9);
        let g = gunning_fog(&stats(5, 5, 0, 0, 0, 0)).unwrap();
        assert!((g - 0.4).abs() < 1e-9);
        assert!(gunning_fog(&stats(1, 0, 0, 0, 0, 0)).is_none());
    }

    #[test]
    fn coleman_liau_golden() {
        let g = coleman_liau(&stats(5, 100, 0, 0, 450, 0)).unwrap();
        assert!((g - 9.18).abs() < 1e-9, "{g}");
        assert!(coleman_liau(&stats(0, 0, 0, 0, 0, 0)).is_none());
        let g = coleman_liau(&stats(0, 1, 0, 0, 0, 0)).unwrap();
        assert!((g + 15.8).abs() < 1e-9);
    }

    #[test]
    fn smog_golden() {
        let g = smog(&stats(30, 0, 0, 30, 0, 0)).unwrap();
        assert!((g - 8.8418).abs() < 1e-4, "{g}");
        let g = smog(&stats(30, 0, 0, 0, 0, 0)).unwrap();
        assert!((g - 3.1291).abs() < 1e-9);
        assert!(smog(&stats(0, 10, 0, 5, 0, 0)).is_none());
    }

    #[test]
    fn ari_golden() {
        let g = ari(&stats(1, 9, 0, 0, 0, 35)).unwrap();
        assert!((g - 1.3867).abs() < 1e-4, "{g}");
        let g = ari(&stats(1, 1, 0, 0, 0, 0)).unwrap();
        assert!((g + 20.93).abs() < 1e-9, "{g}");
        assert!(ari(&stats(1, 0, 0, 0, 0, 0)).is_none());
    }

    #[test]
    fn average_grade_rules() {
        let avg = average_grade(&[Some(2.0), Some(4.0), Some(6.0), Some(8.0), Some(10.0)]);
        assert_eq!(avg, Some(6.0));
        let avg = average_grade(&[Some(2.0), Some(4.0), Some(6.0), Some(8.0), None]);
        assert_eq!(avg, Some(5.0));
        assert_eq!(average_grade(&[None; 5]), None);
    }

    #[test]
    fn grades_scale_invariant() {
        // Every formula is a ratio, so doubling all counts together leaves
        // each grade unchanged.
        let a = stats(3, 40, 60, 7, 180, 190);
        let b = stats(6, 80, 120, 14, 360, 380);
        for (f, name) in [
            (flesch_kincaid as fn(&TextStats) -> Option<f64>, "fk"),
            (gunning_fog, "gf"),
            (coleman_liau, "cl"),
            (smog, "smog"),
            (ari, "ari"),
        ] {
            let ga = f(&a).unwrap();
            let gb = f(&b).unwrap();
            assert!((ga - gb).abs() < 1e-9, "{name}: {ga} vs {gb}");
        }
    }

    #[test]
    fn code_features_single_line() {
        let v = code_features(&["x=1;".to_string()]);
        assert!((v.avg_line_length - 4.0).abs() < 1e-12);
        assert!((v.identifiers_per_line - 1.0).abs() < 1e-12);
        assert!((v.numbers_per_line - 1.0).abs() < 1e-12);
        assert!(!v.empty);
    }

    #[test]
    fn code_features_empty() {
        let v = code_features(&[]);
        assert!(v.empty);
        assert_eq!(v.as_array(), [0.0; CODE_FEATURE_COUNT]);
    }

    #[test]
    fn code_features_blank_fraction() {
        let v = code_features(&["x=1;\n".to_string()]);
        assert!((v.blank_line_fraction - 0.5).abs() < 1e-12);
    }

    #[test]
    fn code_features_keywords_and_branching() {
        let v = code_features(&["if (x) { return y; }".to_string()]);
        // `if` and `return` are keywords; `x` and `y` are identifiers.
        assert!((v.keywords_per_line - 2.0).abs() < 1e-12);
        assert!((v.identifiers_per_line - 2.0).abs() < 1e-12);
        assert!((v.branching_tokens_per_line - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scorer_at_zero_is_half() {
        let weights = ScorerWeights {
            bias: 0.0,
            weights: [0.3; CODE_FEATURE_COUNT],
        };
        let score = code_readability(&[0.0; CODE_FEATURE_COUNT], &weights).unwrap();
        assert!((score - 0.5).abs() < 1e-12);
    }

    #[test]
    fn scorer_stays_in_open_interval() {
        let weights = ScorerWeights {
            bias: 500.0,
            weights: [100.0; CODE_FEATURE_COUNT],
        };
        let hi = code_readability(&[10.0; CODE_FEATURE_COUNT], &weights).unwrap();
        let lo = code_readability(&[-10.0; CODE_FEATURE_COUNT], &weights).unwrap();
        assert!(hi > 0.0 && hi <= 1.0);
        assert!(lo >= 0.0 && lo < 1.0);
    }

    #[test]
    fn scorer_hand_oracle() {
        // Independent evaluation of sigma(bias + w.z) for a small fixture.
        let weights = ScorerWeights::default_weights();
        let z = [0.5, -1.0, 0.2, 0.0, 1.0, -0.5, 2.0, 0.1, 0.3, -0.2];
        let mut linear = weights.bias;
        for i in 0..CODE_FEATURE_COUNT {
            linear += weights.weights[i] * z[i];
        }
        let expected = 1.0 / (1.0 + (-linear).exp());
        let got = code_readability(&z, &weights).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn scorer_dimension_mismatch() {
        let weights = ScorerWeights::default_weights();
        assert!(matches!(
            code_readability(&[0.0; 3], &weights),
            Err(WeightsError::DimensionMismatch { got: 3, .. })
        ));
    }

    #[test]
    fn weights_parse_errors() {
        assert!(matches!(
            ScorerWeights::parse("bias = 0.0\nbogus = 1.0"),
            Err(WeightsError::UnknownKey { .. })
        ));
        assert!(matches!(
            ScorerWeights::parse("bias = 0.0"),
            Err(WeightsError::MissingKey { .. })
        ));
        assert!(matches!(
            ScorerWeights::parse("bias = zero"),
            Err(WeightsError::BadValue { .. })
        ));
    }

    #[test]
    fn default_weight_directions() {
        let w = ScorerWeights::default_weights();
        let idx = |name: &str| CODE_FEATURE_NAMES.iter().position(|n| *n == name).unwrap();
        assert!(w.weights[idx("avg_line_length")] < 0.0);
        assert!(w.weights[idx("max_line_length")] < 0.0);
        assert!(w.weights[idx("avg_indentation")] > 0.0);
    }

    #[test]
    fn zscore_constant_column_is_zero() {
        let v = CodeFeatureVector {
            avg_line_length: 4.0,
            ..CodeFeatureVector::default()
        };
        let z = zscore_code_features(&[v, v]);
        assert_eq!(z, vec![[0.0; CODE_FEATURE_COUNT]; 2]);
    }

    #[test]
    fn zscore_centers_and_scales() {
        let mut a = CodeFeatureVector::default();
        a.avg_line_length = 2.0;
        let mut b = CodeFeatureVector::default();
        b.avg_line_length = 6.0;
        let z = zscore_code_features(&[a, b]);
        assert!((z[0][0] + 1.0).abs() < 1e-12);
        assert!((z[1][0] - 1.0).abs() < 1e-12);
    }
}
