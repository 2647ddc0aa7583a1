//! Emotion seed lexicons, dialect-specific lexicon induction, and
//! lexicon-based emotion labeling.
//!
//! Induction runs five steps per dialect: embed the dialect corpus, take the
//! centroid of each emotion's seed words, collect the top-n nearest
//! non-seed words, expand each hit with its DBSCAN cluster-mates, and strip
//! seed words from the union. A frequency-based specificity filter and a
//! majority-vote review workflow then narrow candidates to verified entries.

mod review;
mod voting;

pub use review::{apply_review, emit_review_file};
pub use voting::{load_voting_table, save_voting_table, simple_vote, VoteOutcome, VotingTable};

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cluster::{dbscan, DbscanConfig, NOISE};
use crate::corpus::Corpus;
use crate::embedding::{cosine, SubwordEmbeddingModel};
use crate::error::{LahjaError, Result};
use crate::labels::{DialectLabel, EmotionLabel};
use crate::preprocess::{normalize, tokenize, NormalizationConfig, PreprocessConfig};

/// Seed mapping from emotions to words, in the shape of the Arabic Emotion
/// Lexicon. A word may serve several emotions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SeedLexicon {
    entries: BTreeMap<EmotionLabel, BTreeSet<String>>,
}

impl SeedLexicon {
    pub fn insert(&mut self, emotion: EmotionLabel, word: impl Into<String>) {
        let word = normalize(&word.into(), &NormalizationConfig::default());
        if !word.is_empty() {
            self.entries.entry(emotion).or_default().insert(word);
        }
    }

    pub fn words(&self, emotion: EmotionLabel) -> Option<&BTreeSet<String>> {
        self.entries.get(&emotion)
    }

    pub fn emotions(&self) -> impl Iterator<Item = EmotionLabel> + '_ {
        self.entries.keys().copied()
    }

    /// Union of the words of every emotion.
    pub fn all_words(&self) -> BTreeSet<String> {
        self.entries.values().flatten().cloned().collect()
    }

    /// Total number of distinct (word, emotion) pairs.
    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Load a seed lexicon from TSV lines of `word<TAB>emotion`. Words receive
/// the default normalization; duplicates within an emotion collapse.
pub fn load_seed_lexicon(path: impl AsRef<Path>) -> Result<SeedLexicon> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| LahjaError::io(path, e))?;
    let mut lexicon = SeedLexicon::default();
    for (idx, line) in content.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 2 {
            return Err(LahjaError::parse(
                idx + 1,
                format!("expected 2 tab-separated columns, found {}", cols.len()),
            ));
        }
        let emotion: EmotionLabel = cols[1].parse()?;
        lexicon.insert(emotion, cols[0]);
    }
    if lexicon.is_empty() {
        return Err(LahjaError::InvalidInput(format!(
            "seed lexicon {} is empty",
            path.display()
        )));
    }
    Ok(lexicon)
}

pub fn save_seed_lexicon(lexicon: &SeedLexicon, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for (emotion, words) in &lexicon.entries {
        for word in words {
            out.push_str(word);
            out.push('\t');
            out.push_str(emotion.code());
            out.push('\n');
        }
    }
    fs::write(path, out).map_err(|e| LahjaError::io(path, e))
}

/// Parameters for candidate induction and the specificity filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InductionConfig {
    pub top_n: usize,
    pub specificity_ratio: f64,
    pub min_dialect_freq: u64,
    pub dbscan: DbscanConfig,
    /// When set, DBSCAN runs only over the union of all emotions' top-n
    /// words instead of the whole vocabulary.
    pub restrict_dbscan_to_neighborhood: bool,
}

impl Default for InductionConfig {
    fn default() -> Self {
        InductionConfig {
            top_n: 10,
            specificity_ratio: 2.0,
            min_dialect_freq: 2,
            dbscan: DbscanConfig::default(),
            restrict_dbscan_to_neighborhood: false,
        }
    }
}

impl InductionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.specificity_ratio < 1.0 {
            return Err(LahjaError::Config(
                "specificity_ratio must be at least 1".into(),
            ));
        }
        self.dbscan.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateOrigin {
    TopN,
    ClusterExpansion,
}

impl fmt::Display for CandidateOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CandidateOrigin::TopN => "top_n",
            CandidateOrigin::ClusterExpansion => "cluster_expansion",
        })
    }
}

impl FromStr for CandidateOrigin {
    type Err = LahjaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top_n" => Ok(CandidateOrigin::TopN),
            "cluster_expansion" => Ok(CandidateOrigin::ClusterExpansion),
            other => Err(LahjaError::InvalidInput(format!(
                "unknown candidate origin {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateStatus {
    Candidate,
    Verified,
    Rejected,
}

impl fmt::Display for CandidateStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CandidateStatus::Candidate => "candidate",
            CandidateStatus::Verified => "verified",
            CandidateStatus::Rejected => "rejected",
        })
    }
}

impl FromStr for CandidateStatus {
    type Err = LahjaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "candidate" => Ok(CandidateStatus::Candidate),
            "verified" => Ok(CandidateStatus::Verified),
            "rejected" => Ok(CandidateStatus::Rejected),
            other => Err(LahjaError::InvalidInput(format!(
                "unknown candidate status {other:?}"
            ))),
        }
    }
}

/// One induced lexicon entry awaiting or past review.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconCandidate {
    pub word: String,
    pub dialect: DialectLabel,
    pub emotion: EmotionLabel,
    pub centroid_similarity: f64,
    pub cluster_id: i32,
    pub origin: CandidateOrigin,
    pub status: CandidateStatus,
}

/// All candidates induced for one dialect, plus a provenance stamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialectLexicon {
    pub dialect: DialectLabel,
    pub candidates: Vec<LexiconCandidate>,
    pub provenance: String,
}

impl DialectLexicon {
    /// Verified words for one emotion.
    pub fn verified_words(&self, emotion: EmotionLabel) -> BTreeSet<&str> {
        self.candidates
            .iter()
            .filter(|c| c.emotion == emotion && c.status == CandidateStatus::Verified)
            .map(|c| c.word.as_str())
            .collect()
    }
}

/// A seed lexicon together with per-dialect induced lexicons, as consumed
/// by emotion labeling and classifier training.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LexiconSet {
    pub seed: SeedLexicon,
    pub by_dialect: BTreeMap<DialectLabel, DialectLexicon>,
}

fn model_fingerprint(model: &SubwordEmbeddingModel) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for b in bytes {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    for (word, freq) in model.vocab.iter() {
        eat(word.as_bytes());
        eat(&freq.to_le_bytes());
    }
    for x in &model.word_vectors {
        eat(&x.to_bits().to_le_bytes());
    }
    h
}

/// Run induction steps ii-v for every emotion of `seed` against a model
/// trained on the corpus of `dialect`.
///
/// DBSCAN is computed once (over the whole vocabulary, or over the union of
/// top-n neighborhoods when restricted) and shared by all emotions.
/// Emotions whose seed words are all out of vocabulary are skipped with a
/// warning. Candidates never include seed words.
pub fn induce_candidates(
    model: &SubwordEmbeddingModel,
    seed: &SeedLexicon,
    dialect: DialectLabel,
    config: &InductionConfig,
) -> Result<DialectLexicon> {
    config.validate()?;
    if model.vocab.is_empty() {
        return Err(LahjaError::EmptyVocabulary);
    }
    let all_seed: HashSet<String> = seed.all_words().into_iter().collect();

    // Step ii + iii per emotion; collected first so a restricted DBSCAN
    // domain can be derived from every neighborhood at once.
    let mut per_emotion: Vec<(EmotionLabel, Vec<f32>, Vec<(String, f64)>)> = Vec::new();
    for emotion in seed.emotions() {
        let words: Vec<String> = seed.words(emotion).unwrap().iter().cloned().collect();
        let centroid = match model.centroid(&words) {
            Ok(c) => c,
            Err(LahjaError::NoWordsInVocabulary { .. }) => {
                log::warn!(
                    "skipping {emotion}: none of its {} seed words are in the vocabulary",
                    words.len()
                );
                continue;
            }
            Err(e) => return Err(e),
        };
        if !centroid.skipped.is_empty() {
            log::warn!(
                "{emotion} centroid skipped {} out-of-vocabulary seed words",
                centroid.skipped.len()
            );
        }
        let top = model.top_n_nearest(&centroid.vector, config.top_n, &all_seed)?;
        per_emotion.push((emotion, centroid.vector, top));
    }

    // Step iv: one clustering, shared across emotions.
    let vectors = model.composed_vectors();
    let domain: Vec<u32> = if config.restrict_dbscan_to_neighborhood {
        let mut set = BTreeSet::new();
        for (_, _, top) in &per_emotion {
            for (word, _) in top {
                set.insert(model.vocab.get(word).expect("top-n words are in vocabulary"));
            }
        }
        set.into_iter().collect()
    } else {
        (0..model.vocab.len() as u32).collect()
    };
    let domain_slot: HashMap<u32, usize> =
        domain.iter().enumerate().map(|(s, &i)| (i, s)).collect();
    let assignment = if domain.is_empty() {
        None
    } else {
        let points: Vec<Vec<f32>> = domain.iter().map(|&i| vectors[i as usize].clone()).collect();
        Some(dbscan(&points, &config.dbscan)?)
    };
    let cluster_of = |vocab_idx: u32| -> i32 {
        match (&assignment, domain_slot.get(&vocab_idx)) {
            (Some(a), Some(&slot)) => a.labels[slot],
            _ => NOISE,
        }
    };

    // Step v: union of top-n and cluster-mates, minus all seed words.
    let mut candidates = Vec::new();
    for (emotion, centroid_vec, top) in &per_emotion {
        let mut chosen: BTreeMap<String, LexiconCandidate> = BTreeMap::new();
        for (word, similarity) in top {
            let vocab_idx = model.vocab.get(word).expect("top-n words are in vocabulary");
            let cluster = cluster_of(vocab_idx);
            chosen.insert(
                word.clone(),
                LexiconCandidate {
                    word: word.clone(),
                    dialect,
                    emotion: *emotion,
                    centroid_similarity: *similarity,
                    cluster_id: cluster,
                    origin: CandidateOrigin::TopN,
                    status: CandidateStatus::Candidate,
                },
            );
            if cluster == NOISE {
                continue;
            }
            for (slot, &mate_idx) in domain.iter().enumerate() {
                if assignment.as_ref().unwrap().labels[slot] != cluster {
                    continue;
                }
                let mate = model.vocab.word(mate_idx);
                if all_seed.contains(mate) || chosen.contains_key(mate) {
                    continue;
                }
                chosen.insert(
                    mate.to_string(),
                    LexiconCandidate {
                        word: mate.to_string(),
                        dialect,
                        emotion: *emotion,
                        centroid_similarity: cosine(centroid_vec, &vectors[mate_idx as usize]),
                        cluster_id: cluster,
                        origin: CandidateOrigin::ClusterExpansion,
                        status: CandidateStatus::Candidate,
                    },
                );
            }
        }
        let mut block: Vec<LexiconCandidate> = chosen.into_values().collect();
        block.sort_by(|a, b| {
            b.centroid_similarity
                .partial_cmp(&a.centroid_similarity)
                .expect("similarities are finite")
                .then_with(|| a.word.cmp(&b.word))
        });
        candidates.extend(block);
    }

    Ok(DialectLexicon {
        dialect,
        candidates,
        provenance: format!(
            "top_n={} ratio={} min_freq={} eps={} min_samples={} restricted={} model={:016x}",
            config.top_n,
            config.specificity_ratio,
            config.min_dialect_freq,
            config.dbscan.eps,
            config.dbscan.min_samples,
            config.restrict_dbscan_to_neighborhood,
            model_fingerprint(model)
        ),
    })
}

/// Token frequency tables per dialect, used by the specificity filter.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DialectFrequencies {
    counts: BTreeMap<DialectLabel, HashMap<String, u64>>,
    totals: BTreeMap<DialectLabel, u64>,
}

impl DialectFrequencies {
    /// Tokenize every dialect-labeled document and tally per-dialect counts.
    pub fn from_corpus(corpus: &Corpus, preprocess: &PreprocessConfig) -> Self {
        let mut out = DialectFrequencies::default();
        for doc in corpus.iter() {
            if let Some(dialect) = doc.dialect {
                out.add_tokens(dialect, &tokenize(&doc.text, preprocess));
            }
        }
        out
    }

    pub fn add_tokens(&mut self, dialect: DialectLabel, tokens: &[String]) {
        let table = self.counts.entry(dialect).or_default();
        for t in tokens {
            *table.entry(t.clone()).or_insert(0) += 1;
        }
        *self.totals.entry(dialect).or_insert(0) += tokens.len() as u64;
    }

    pub fn count(&self, dialect: DialectLabel, word: &str) -> u64 {
        self.counts
            .get(&dialect)
            .and_then(|t| t.get(word).copied())
            .unwrap_or(0)
    }

    /// Occurrences per million tokens of that dialect's corpus.
    pub fn per_million(&self, dialect: DialectLabel, word: &str) -> f64 {
        let total = self.totals.get(&dialect).copied().unwrap_or(0);
        if total == 0 {
            return 0.0;
        }
        self.count(dialect, word) as f64 * 1_000_000.0 / total as f64
    }

    pub fn dialects(&self) -> impl Iterator<Item = DialectLabel> + '_ {
        self.counts.keys().copied()
    }
}

/// Keep only candidates frequent in their own dialect and markedly more
/// frequent there than in any other dialect (per-million normalization;
/// words absent elsewhere always pass the ratio test).
pub fn specificity_filter(
    lexicons: BTreeMap<DialectLabel, DialectLexicon>,
    frequencies: &DialectFrequencies,
    config: &InductionConfig,
) -> BTreeMap<DialectLabel, DialectLexicon> {
    lexicons
        .into_iter()
        .map(|(dialect, mut lexicon)| {
            lexicon.candidates.retain(|c| {
                if frequencies.count(dialect, &c.word) < config.min_dialect_freq {
                    return false;
                }
                let own = frequencies.per_million(dialect, &c.word);
                let elsewhere = frequencies
                    .dialects()
                    .filter(|&d| d != dialect)
                    .map(|d| frequencies.per_million(d, &c.word))
                    .fold(0.0f64, f64::max);
                own >= config.specificity_ratio * elsewhere
            });
            (dialect, lexicon)
        })
        .collect()
}

/// Score each emotion by counting token occurrences in the union of its
/// seed words and the verified words of the document's dialect, then return
/// the unique argmax. Ties and all-zero scores return `None`.
pub fn label_emotion(
    tokens: &[String],
    dialect: DialectLabel,
    seed: &SeedLexicon,
    lexicons: &BTreeMap<DialectLabel, DialectLexicon>,
) -> Option<EmotionLabel> {
    let dialect_lexicon = lexicons.get(&dialect);
    let mut best: Option<(EmotionLabel, u64)> = None;
    let mut tied = false;
    for emotion in EmotionLabel::ALL {
        let seed_words = seed.words(emotion);
        let verified = dialect_lexicon.map(|l| l.verified_words(emotion));
        let score: u64 = tokens
            .iter()
            .filter(|t| {
                seed_words.is_some_and(|w| w.contains(t.as_str()))
                    || verified.as_ref().is_some_and(|w| w.contains(t.as_str()))
            })
            .count() as u64;
        match best {
            Some((_, top)) if score == top => tied = true,
            Some((_, top)) if score > top => {
                best = Some((emotion, score));
                tied = false;
            }
            None => best = Some((emotion, score)),
            _ => {}
        }
    }
    match best {
        Some((emotion, score)) if score > 0 && !tied => Some(emotion),
        _ => None,
    }
}
