//! Dialect and emotion label sets.
//!
//! Both enums have a fixed canonical (alphabetical) ordering that is used
//! for tie-breaking everywhere: `derive(Ord)` on the declaration order below
//! matches the alphabetical order of the codes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::LahjaError;

/// Arabic dialect codes: the five SMADC dialects plus MSA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DialectLabel {
    #[serde(rename = "EGY")]
    Egy,
    #[serde(rename = "GLF")]
    Glf,
    #[serde(rename = "IRQ")]
    Irq,
    #[serde(rename = "LEV")]
    Lev,
    #[serde(rename = "MSA")]
    Msa,
    #[serde(rename = "NOR")]
    Nor,
}

impl DialectLabel {
    /// All six codes in canonical order.
    pub const ALL: [DialectLabel; 6] = [
        DialectLabel::Egy,
        DialectLabel::Glf,
        DialectLabel::Irq,
        DialectLabel::Lev,
        DialectLabel::Msa,
        DialectLabel::Nor,
    ];

    /// The five SMADC dialects in voting-table column order.
    pub const VOTING_ORDER: [DialectLabel; 5] = [
        DialectLabel::Nor,
        DialectLabel::Egy,
        DialectLabel::Irq,
        DialectLabel::Lev,
        DialectLabel::Glf,
    ];

    pub fn code(self) -> &'static str {
        match self {
            DialectLabel::Egy => "EGY",
            DialectLabel::Glf => "GLF",
            DialectLabel::Irq => "IRQ",
            DialectLabel::Lev => "LEV",
            DialectLabel::Msa => "MSA",
            DialectLabel::Nor => "NOR",
        }
    }
}

impl fmt::Display for DialectLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for DialectLabel {
    type Err = LahjaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DialectLabel::ALL
            .into_iter()
            .find(|d| d.code() == s)
            .ok_or_else(|| LahjaError::Label {
                token: s.to_string(),
            })
    }
}

/// The six Ekman emotions, in canonical (alphabetical) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionLabel {
    Anger,
    Disgust,
    Fear,
    Joy,
    Sadness,
    Surprise,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; 6] = [
        EmotionLabel::Anger,
        EmotionLabel::Disgust,
        EmotionLabel::Fear,
        EmotionLabel::Joy,
        EmotionLabel::Sadness,
        EmotionLabel::Surprise,
    ];

    pub fn code(self) -> &'static str {
        match self {
            EmotionLabel::Anger => "anger",
            EmotionLabel::Disgust => "disgust",
            EmotionLabel::Fear => "fear",
            EmotionLabel::Joy => "joy",
            EmotionLabel::Sadness => "sadness",
            EmotionLabel::Surprise => "surprise",
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for EmotionLabel {
    type Err = LahjaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EmotionLabel::ALL
            .into_iter()
            .find(|e| e.code() == s)
            .ok_or_else(|| LahjaError::Label {
                token: s.to_string(),
            })
    }
}

/// A classification target label: dialect or emotion.
///
/// Classifiers and confusion matrices are generic over this so the same
/// machinery serves both stages of the pipeline.
pub trait ClassLabel:
    Copy + Eq + Ord + std::hash::Hash + fmt::Debug + fmt::Display + FromStr<Err = LahjaError> + 'static
{
    /// The full label universe in canonical order.
    fn universe() -> &'static [Self];

    fn code_str(&self) -> &'static str;
}

impl ClassLabel for DialectLabel {
    fn universe() -> &'static [Self] {
        &DialectLabel::ALL
    }

    fn code_str(&self) -> &'static str {
        self.code()
    }
}

impl ClassLabel for EmotionLabel {
    fn universe() -> &'static [Self] {
        &EmotionLabel::ALL
    }

    fn code_str(&self) -> &'static str {
        self.code()
    }
}
