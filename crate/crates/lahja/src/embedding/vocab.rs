//! Frequency-filtered vocabulary with stable index assignment.

use std::collections::HashMap;

use crate::error::{LahjaError, Result};

/// Bijection between surviving words and dense indices, plus corpus
/// frequencies. Indices run in descending frequency, ties broken
/// lexicographically, so vocabulary order is reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    freqs: Vec<u64>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Count tokens across all sequences and keep words with frequency
    /// at least `min_count`.
    pub fn build(sentences: &[Vec<String>], min_count: u64) -> Result<Self> {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for sentence in sentences {
            for token in sentence {
                *counts.entry(token.as_str()).or_insert(0) += 1;
            }
        }
        let mut kept: Vec<(&str, u64)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count)
            .collect();
        if kept.is_empty() {
            return Err(LahjaError::EmptyVocabulary);
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(Self::from_sorted(
            kept.into_iter()
                .map(|(w, c)| (w.to_string(), c))
                .collect(),
        ))
    }

    /// Assemble a vocabulary from (word, frequency) pairs already in index
    /// order. Used by model deserialization and test fixtures.
    pub fn from_sorted(pairs: Vec<(String, u64)>) -> Self {
        let index = pairs
            .iter()
            .enumerate()
            .map(|(i, (w, _))| (w.clone(), i as u32))
            .collect();
        let (words, freqs) = pairs.into_iter().unzip();
        Vocabulary {
            words,
            freqs,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn word(&self, idx: u32) -> &str {
        &self.words[idx as usize]
    }

    pub fn freq(&self, idx: u32) -> u64 {
        self.freqs[idx as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.words
            .iter()
            .map(String::as_str)
            .zip(self.freqs.iter().copied())
    }
}
