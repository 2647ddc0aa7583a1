//! Labeled document collections: ingestion, validation, splitting, persistence.
//!
//! On disk a corpus is either TSV (five tab-separated columns `id`, `text`,
//! `dialect`, `emotion`, `source`; empty string means absent; no quoting) or
//! JSONL (one object per line with the same keys). Iteration order always
//! equals file order.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LahjaError, Result};
use crate::labels::{DialectLabel, EmotionLabel};

/// One text unit with optional dialect and emotion labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dialect: Option<DialectLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emotion: Option<EmotionLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

/// Corpus file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Tsv,
    Jsonl,
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::Tsv => "tsv",
            CorpusFormat::Jsonl => "jsonl",
        })
    }
}

impl FromStr for CorpusFormat {
    type Err = LahjaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(CorpusFormat::Tsv),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(LahjaError::InvalidInput(format!(
                "unknown corpus format {other:?} (expected tsv or jsonl)"
            ))),
        }
    }
}

/// An ordered collection of documents with unique ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    pub provenance: String,
}

impl Corpus {
    pub fn new(provenance: impl Into<String>) -> Self {
        Corpus {
            documents: Vec::new(),
            provenance: provenance.into(),
        }
    }

    /// Append a document, rejecting duplicate ids.
    pub fn push(&mut self, doc: Document) -> Result<()> {
        if let Some(pos) = self.documents.iter().position(|d| d.id == doc.id) {
            return Err(LahjaError::DuplicateId {
                id: doc.id,
                first_line: pos + 1,
                second_line: self.documents.len() + 1,
            });
        }
        self.documents.push(doc);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.documents.iter()
    }
}

/// Parse one corpus line in the given format.
///
/// `line_number` (1-based) is used only for error messages.
pub fn parse_document_line(
    line: &str,
    format: CorpusFormat,
    line_number: usize,
) -> Result<Document> {
    let doc = match format {
        CorpusFormat::Tsv => {
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 5 {
                return Err(LahjaError::parse(
                    line_number,
                    format!("expected 5 tab-separated columns, found {}", cols.len()),
                ));
            }
            let opt = |s: &str| {
                if s.is_empty() {
                    None
                } else {
                    Some(s.to_string())
                }
            };
            Document {
                id: cols[0].to_string(),
                text: cols[1].to_string(),
                dialect: opt(cols[2]).map(|s| s.parse()).transpose()?,
                emotion: opt(cols[3]).map(|s| s.parse()).transpose()?,
                source: opt(cols[4]),
            }
        }
        CorpusFormat::Jsonl => serde_json::from_str::<Document>(line).map_err(|e| {
            // Surface bad label tokens as label errors, not generic JSON errors.
            if let Ok(value) = serde_json::from_str::<serde_json::Value>(line) {
                for key in ["dialect", "emotion"] {
                    if let Some(serde_json::Value::String(tok)) = value.get(key) {
                        let bad = match key {
                            "dialect" => tok.parse::<DialectLabel>().is_err(),
                            _ => tok.parse::<EmotionLabel>().is_err(),
                        };
                        if bad {
                            return LahjaError::Label { token: tok.clone() };
                        }
                    }
                }
            }
            LahjaError::parse(line_number, format!("invalid JSON object: {e}"))
        })?,
    };
    if doc.text.trim().is_empty() {
        return Err(LahjaError::parse(line_number, "empty text"));
    }
    Ok(doc)
}

/// Load a corpus from a file, validating ids and text on the way in.
pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| LahjaError::io(path, e))?;
    let mut corpus = Corpus::new(path.display().to_string());
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in content.lines().enumerate() {
        let line_number = idx + 1;
        if line.is_empty() {
            continue;
        }
        let doc = parse_document_line(line, format, line_number)?;
        if let Some(&first_line) = seen.get(&doc.id) {
            return Err(LahjaError::DuplicateId {
                id: doc.id,
                first_line,
                second_line: line_number,
            });
        }
        seen.insert(doc.id.clone(), line_number);
        corpus.documents.push(doc);
    }
    if corpus.is_empty() {
        log::warn!("loaded empty corpus from {}", path.display());
    } else {
        log::info!("loaded {} documents from {}", corpus.len(), path.display());
    }
    Ok(corpus)
}

/// Write a corpus to a file in the given format.
pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>, format: CorpusFormat) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for doc in corpus.iter() {
        match format {
            CorpusFormat::Tsv => {
                for field in [&doc.id, &doc.text] {
                    if field.contains('\t') || field.contains('\n') {
                        return Err(LahjaError::InvalidInput(format!(
                            "document {:?} contains a tab or newline and cannot be written as TSV",
                            doc.id
                        )));
                    }
                }
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}",
                    doc.id,
                    doc.text,
                    doc.dialect.map(|d| d.code()).unwrap_or(""),
                    doc.emotion.map(|e| e.code()).unwrap_or(""),
                    doc.source.as_deref().unwrap_or("")
                )
                .expect("write to Vec cannot fail");
            }
            CorpusFormat::Jsonl => {
                let json = serde_json::to_string(doc)
                    .map_err(|e| LahjaError::InvalidInput(format!("serialize {:?}: {e}", doc.id)))?;
                writeln!(out, "{json}").expect("write to Vec cannot fail");
            }
        }
    }
    fs::write(path, out).map_err(|e| LahjaError::io(path, e))
}

/// Which label, if any, a split is stratified on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StratifyOn {
    Dialect,
    Emotion,
    None,
}

/// Train/validation/test split specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub valid_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
    pub stratify_on: StratifyOn,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            valid_fraction: 0.1,
            test_fraction: 0.1,
            seed: 0,
            stratify_on: StratifyOn::None,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let fractions = [
            self.train_fraction,
            self.valid_fraction,
            self.test_fraction,
        ];
        if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(LahjaError::Config(
                "split fractions must lie in [0, 1]".into(),
            ));
        }
        let sum: f64 = fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(LahjaError::Config(format!(
                "split fractions must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

/// Split a corpus into (train, valid, test).
///
/// Documents are shuffled with a seeded RNG within each stratum, then counts
/// are assigned by largest-remainder rounding (remainder preference train,
/// valid, test), so the partition is exact and per-stratum fractions are
/// honored to within one document. Output corpora preserve input order.
pub fn split_corpus(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus, Corpus)> {
    spec.validate()?;
    if corpus.is_empty() {
        return Err(LahjaError::InvalidInput("cannot split an empty corpus".into()));
    }

    // Stratum key per document; a single empty stratum when not stratifying.
    let mut strata: Vec<(String, Vec<usize>)> = Vec::new();
    let mut key_index: HashMap<String, usize> = HashMap::new();
    for (i, doc) in corpus.iter().enumerate() {
        let key = match spec.stratify_on {
            StratifyOn::None => String::new(),
            StratifyOn::Dialect => doc
                .dialect
                .ok_or_else(|| LahjaError::MissingLabel {
                    id: doc.id.clone(),
                    field: "dialect",
                })?
                .code()
                .to_string(),
            StratifyOn::Emotion => doc
                .emotion
                .ok_or_else(|| LahjaError::MissingLabel {
                    id: doc.id.clone(),
                    field: "emotion",
                })?
                .code()
                .to_string(),
        };
        let slot = *key_index.entry(key.clone()).or_insert_with(|| {
            strata.push((key, Vec::new()));
            strata.len() - 1
        });
        strata[slot].1.push(i);
    }
    strata.sort_by(|a, b| a.0.cmp(&b.0));

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut assignment = vec![2u8; corpus.len()]; // 0 train, 1 valid, 2 test
    for (_, indices) in &mut strata {
        indices.shuffle(&mut rng);
        let counts = largest_remainder(
            indices.len(),
            [spec.train_fraction, spec.valid_fraction, spec.test_fraction],
        );
        for (slot, &idx) in indices.iter().enumerate() {
            assignment[idx] = if slot < counts[0] {
                0
            } else if slot < counts[0] + counts[1] {
                1
            } else {
                2
            };
        }
    }

    let mut parts = [
        Corpus::new(format!("{} [train]", corpus.provenance)),
        Corpus::new(format!("{} [valid]", corpus.provenance)),
        Corpus::new(format!("{} [test]", corpus.provenance)),
    ];
    for (i, doc) in corpus.iter().enumerate() {
        parts[assignment[i] as usize].documents.push(doc.clone());
    }
    let [train, valid, test] = parts;
    Ok((train, valid, test))
}

/// Largest-remainder apportionment of `n` items over three fractions.
/// Ties between remainders resolve in slot order (train, valid, test).
fn largest_remainder(n: usize, fractions: [f64; 3]) -> [usize; 3] {
    let quotas: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &slot in order.iter().take(n - assigned) {
        counts[slot] += 1;
    }
    [counts[0], counts[1], counts[2]]
}
