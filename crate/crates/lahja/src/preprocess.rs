//! Text normalization, light affix segmentation, and tokenization for
//! dialectal Arabic.
//!
//! The pipeline is: whitespace split, drop tokens with no Arabic letter,
//! normalize each survivor, then optionally split tokens into prefix, stem,
//! and suffix using small closed affix tables.

use serde::{Deserialize, Serialize};

use crate::error::{LahjaError, Result};
use std::str::FromStr;

/// Orthographic normalization switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizationConfig {
    /// Remove the short-vowel and shadda/sukun marks (U+064B..U+0652) and
    /// the superscript alef (U+0670).
    pub strip_diacritics: bool,
    /// Remove tatweel (U+0640), the kashida used for visual stretching.
    pub strip_tatweel: bool,
    /// Fold hamzated and madda alef forms (أ إ آ) to bare alef (ا).
    pub fold_alef: bool,
    /// Collapse any run of one codepoint longer than two down to two,
    /// e.g. ههههه becomes هه.
    pub collapse_elongation: bool,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        NormalizationConfig {
            strip_diacritics: true,
            strip_tatweel: true,
            fold_alef: false,
            collapse_elongation: false,
        }
    }
}

/// How `tokenize` emits tokens after normalization.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenizeMode {
    #[default]
    Whitespace,
    Segmented,
}

impl FromStr for TokenizeMode {
    type Err = LahjaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "whitespace" => Ok(TokenizeMode::Whitespace),
            "segmented" => Ok(TokenizeMode::Segmented),
            other => Err(LahjaError::InvalidInput(format!(
                "unknown tokenize mode {other:?} (expected whitespace or segmented)"
            ))),
        }
    }
}

/// Full preprocessing configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub normalization: NormalizationConfig,
    pub mode: TokenizeMode,
}

/// True when `c` falls in the Arabic or Arabic Supplement Unicode blocks.
pub fn is_arabic_char(c: char) -> bool {
    ('\u{0600}'..='\u{06FF}').contains(&c) || ('\u{0750}'..='\u{077F}').contains(&c)
}

fn has_arabic_letter(token: &str) -> bool {
    token.chars().any(|c| is_arabic_char(c) && c.is_alphabetic())
}

/// Keep only tokens containing at least one Arabic letter. Latin words,
/// digit runs, and punctuation-only tokens all drop out here.
pub fn filter_non_arabic(tokens: Vec<String>) -> Vec<String> {
    tokens.into_iter().filter(|t| has_arabic_letter(t)).collect()
}

fn is_diacritic(c: char) -> bool {
    ('\u{064B}'..='\u{0652}').contains(&c) || c == '\u{0670}'
}

/// Apply the enabled normalization steps to `text`.
pub fn normalize(text: &str, config: &NormalizationConfig) -> String {
    let mut out = String::with_capacity(text.len());
    let mut run_char = '\0';
    let mut run_len = 0usize;
    for c in text.chars() {
        if config.strip_diacritics && is_diacritic(c) {
            continue;
        }
        if config.strip_tatweel && c == '\u{0640}' {
            continue;
        }
        let c = if config.fold_alef && matches!(c, 'أ' | 'إ' | 'آ') {
            'ا'
        } else {
            c
        };
        if config.collapse_elongation {
            if c == run_char {
                run_len += 1;
                if run_len > 2 {
                    continue;
                }
            } else {
                run_char = c;
                run_len = 1;
            }
        }
        out.push(c);
    }
    out
}

// Affix tables ordered longest first so the first hit is the longest match.
const PREFIXES: [&str; 8] = ["وال", "ال", "لل", "و", "ف", "ب", "ك", "ل"];
const SUFFIXES: [&str; 12] = [
    "ها", "هم", "هن", "كم", "كن", "نا", "ون", "ين", "ات", "ة", "ه", "ي",
];

/// A word split into at most one prefix, a stem, and at most one suffix.
/// Absent affixes are empty strings; the three parts concatenate back to
/// the original word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentedWord {
    pub prefix: String,
    pub stem: String,
    pub suffix: String,
}

impl SegmentedWord {
    /// Non-empty parts in surface order.
    pub fn parts(&self) -> impl Iterator<Item = &str> {
        [self.prefix.as_str(), self.stem.as_str(), self.suffix.as_str()]
            .into_iter()
            .filter(|p| !p.is_empty())
    }
}

/// Strip the longest listed prefix and then the longest listed suffix,
/// refusing any strip that would leave a stem shorter than two codepoints.
pub fn segment_word(word: &str) -> SegmentedWord {
    let mut prefix = "";
    let mut rest = word;
    for p in PREFIXES {
        if let Some(r) = word.strip_prefix(p) {
            if r.chars().count() >= 2 {
                prefix = p;
                rest = r;
                break;
            }
        }
    }
    let mut suffix = "";
    let mut stem = rest;
    for s in SUFFIXES {
        if let Some(r) = rest.strip_suffix(s) {
            if r.chars().count() >= 2 {
                suffix = s;
                stem = r;
                break;
            }
        }
    }
    SegmentedWord {
        prefix: prefix.to_string(),
        stem: stem.to_string(),
        suffix: suffix.to_string(),
    }
}

/// Run the full pipeline on raw text and return the token stream.
pub fn tokenize(text: &str, config: &PreprocessConfig) -> Vec<String> {
    let mut out = Vec::new();
    for raw in text.split_whitespace() {
        if !has_arabic_letter(raw) {
            continue;
        }
        let norm = normalize(raw, &config.normalization);
        if norm.is_empty() {
            continue;
        }
        match config.mode {
            TokenizeMode::Whitespace => out.push(norm),
            TokenizeMode::Segmented => {
                let seg = segment_word(&norm);
                out.extend(seg.parts().map(str::to_string));
            }
        }
    }
    out
}
