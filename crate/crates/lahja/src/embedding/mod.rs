//! Subword-augmented skip-gram embeddings with negative sampling, plus the
//! vector queries the lexicon induction pipeline needs: lookup, centroid,
//! and nearest neighbors.
//!
//! A word's represented vector is the mean of its word vector and the
//! vectors of its hashed character n-grams, so unseen words still map to a
//! usable point in space.

mod io;
mod ngrams;
mod train;
mod vocab;

pub use io::{export_text, load_embedding, save_embedding};
pub use ngrams::{char_ngrams, hash_ngram};
pub use train::{
    pair_gradients, pair_loss, train_skipgram, train_skipgram_parallel,
    train_skipgram_with_report, PairGradients,
};
pub use vocab::Vocabulary;

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LahjaError, Result};

/// Training and composition hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub min_count: u64,
    pub learning_rate: f64,
    pub word_ngrams: u32,
    pub window_size: usize,
    pub epochs: u32,
    pub dimension: usize,
    pub negative_samples: usize,
    pub char_ngram_min: usize,
    pub char_ngram_max: usize,
    pub bucket_count: u64,
    pub seed: u64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            min_count: 2,
            learning_rate: 0.08,
            word_ngrams: 1,
            window_size: 6,
            epochs: 10,
            dimension: 100,
            negative_samples: 5,
            char_ngram_min: 3,
            char_ngram_max: 6,
            bucket_count: 100_000,
            seed: 0,
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_count < 1 {
            return Err(LahjaError::Config("min_count must be at least 1".into()));
        }
        if self.dimension < 1 {
            return Err(LahjaError::Config("dimension must be at least 1".into()));
        }
        if self.char_ngram_min < 1 || self.char_ngram_min > self.char_ngram_max {
            return Err(LahjaError::Config(format!(
                "char n-gram range {}..{} is invalid",
                self.char_ngram_min, self.char_ngram_max
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(LahjaError::Config(
                "learning_rate must be positive and finite".into(),
            ));
        }
        if self.word_ngrams != 1 {
            return Err(LahjaError::Config(format!(
                "word_ngrams = {} is unsupported; only 1 (single tokens) is implemented",
                self.word_ngrams
            )));
        }
        if self.window_size < 1 {
            return Err(LahjaError::Config("window_size must be at least 1".into()));
        }
        if self.bucket_count < 1 {
            return Err(LahjaError::Config("bucket_count must be at least 1".into()));
        }
        Ok(())
    }
}

/// A trained embedding: vocabulary plus word, n-gram bucket, and context
/// matrices. Immutable after training; queries are safe to run concurrently.
#[derive(Debug, Clone, PartialEq)]
pub struct SubwordEmbeddingModel {
    pub config: EmbeddingConfig,
    pub vocab: Vocabulary,
    pub(crate) word_vectors: Vec<f32>,
    pub(crate) ngram_vectors: Vec<f32>,
    pub(crate) context_vectors: Vec<f32>,
    /// Hashed n-gram bucket ids per vocabulary word, precomputed once.
    pub(crate) word_ngram_ids: Vec<Vec<u32>>,
}

/// A centroid query result: the mean vector plus any requested words that
/// were out of vocabulary and therefore skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Centroid {
    pub vector: Vec<f32>,
    pub skipped: Vec<String>,
}

fn ngram_ids_for(word: &str, config: &EmbeddingConfig) -> Vec<u32> {
    char_ngrams(word, config.char_ngram_min, config.char_ngram_max)
        .iter()
        .map(|g| hash_ngram(g, config.bucket_count) as u32)
        .collect()
}

impl SubwordEmbeddingModel {
    /// Seeded initialization: word and n-gram entries uniform in
    /// [-0.5/d, 0.5/d], context entries zero.
    pub(crate) fn init(
        config: EmbeddingConfig,
        vocab: Vocabulary,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        config.validate()?;
        let d = config.dimension;
        let bound = 0.5 / d as f32;
        let mut draw = |n: usize| -> Vec<f32> {
            (0..n).map(|_| rng.random_range(-bound..bound)).collect()
        };
        let word_vectors = draw(vocab.len() * d);
        let ngram_vectors = draw(config.bucket_count as usize * d);
        let context_vectors = vec![0.0; vocab.len() * d];
        Ok(Self::assemble(
            config,
            vocab,
            word_vectors,
            ngram_vectors,
            context_vectors,
        ))
    }

    fn assemble(
        config: EmbeddingConfig,
        vocab: Vocabulary,
        word_vectors: Vec<f32>,
        ngram_vectors: Vec<f32>,
        context_vectors: Vec<f32>,
    ) -> Self {
        let word_ngram_ids = vocab
            .words()
            .iter()
            .map(|w| ngram_ids_for(w, &config))
            .collect();
        SubwordEmbeddingModel {
            config,
            vocab,
            word_vectors,
            ngram_vectors,
            context_vectors,
            word_ngram_ids,
        }
    }

    /// Build a model from explicit matrices, validating shapes. Intended
    /// for deserialization and for tests that need exact geometry.
    pub fn from_parts(
        config: EmbeddingConfig,
        vocab: Vocabulary,
        word_vectors: Vec<f32>,
        ngram_vectors: Vec<f32>,
        context_vectors: Vec<f32>,
    ) -> Result<Self> {
        config.validate()?;
        let d = config.dimension;
        let checks = [
            ("word", word_vectors.len(), vocab.len() * d),
            (
                "ngram",
                ngram_vectors.len(),
                config.bucket_count as usize * d,
            ),
            ("context", context_vectors.len(), vocab.len() * d),
        ];
        for (name, got, want) in checks {
            if got != want {
                return Err(LahjaError::InvalidInput(format!(
                    "{name} matrix has {got} entries, expected {want}"
                )));
            }
        }
        Ok(Self::assemble(
            config,
            vocab,
            word_vectors,
            ngram_vectors,
            context_vectors,
        ))
    }

    pub fn dim(&self) -> usize {
        self.config.dimension
    }

    pub(crate) fn word_row(&self, idx: u32) -> &[f32] {
        let d = self.dim();
        &self.word_vectors[idx as usize * d..(idx as usize + 1) * d]
    }

    pub(crate) fn ngram_row(&self, bucket: u32) -> &[f32] {
        let d = self.dim();
        &self.ngram_vectors[bucket as usize * d..(bucket as usize + 1) * d]
    }

    pub(crate) fn context_row(&self, idx: u32) -> &[f32] {
        let d = self.dim();
        &self.context_vectors[idx as usize * d..(idx as usize + 1) * d]
    }

    /// Composed vector of an in-vocabulary word by index: the mean of its
    /// word vector and its n-gram bucket vectors.
    pub fn composed(&self, idx: u32) -> Vec<f32> {
        let d = self.dim();
        let mut acc = vec![0f64; d];
        add_row(&mut acc, self.word_row(idx));
        for &bucket in &self.word_ngram_ids[idx as usize] {
            add_row(&mut acc, self.ngram_row(bucket));
        }
        let denom = (1 + self.word_ngram_ids[idx as usize].len()) as f64;
        acc.iter().map(|x| (x / denom) as f32).collect()
    }

    /// Composed vector of any word. Out-of-vocabulary words are composed
    /// from their n-gram buckets alone.
    pub fn vector_of(&self, word: &str) -> Vec<f32> {
        if let Some(idx) = self.vocab.get(word) {
            return self.composed(idx);
        }
        let d = self.dim();
        let mut acc = vec![0f64; d];
        let ids = ngram_ids_for(word, &self.config);
        for &bucket in &ids {
            add_row(&mut acc, self.ngram_row(bucket));
        }
        acc.iter().map(|x| (x / ids.len() as f64) as f32).collect()
    }

    /// Composed vectors for the whole vocabulary, in index order.
    pub fn composed_vectors(&self) -> Vec<Vec<f32>> {
        (0..self.vocab.len() as u32).map(|i| self.composed(i)).collect()
    }

    /// Mean of the composed vectors of the in-vocabulary subset of `words`.
    pub fn centroid(&self, words: &[String]) -> Result<Centroid> {
        let mut acc = vec![0f64; self.dim()];
        let mut used = 0usize;
        let mut skipped = Vec::new();
        for word in words {
            match self.vocab.get(word) {
                Some(idx) => {
                    add_row(&mut acc, &self.composed(idx));
                    used += 1;
                }
                None => skipped.push(word.clone()),
            }
        }
        if used == 0 {
            return Err(LahjaError::NoWordsInVocabulary {
                context: "centroid".into(),
                words: words.to_vec(),
            });
        }
        Ok(Centroid {
            vector: acc.iter().map(|x| (x / used as f64) as f32).collect(),
            skipped,
        })
    }

    /// The `n` vocabulary words outside `exclude` most cosine-similar to
    /// `query`, descending, ties broken lexicographically.
    pub fn top_n_nearest(
        &self,
        query: &[f32],
        n: usize,
        exclude: &HashSet<String>,
    ) -> Result<Vec<(String, f64)>> {
        if query.len() != self.dim() {
            return Err(LahjaError::DimensionMismatch {
                left: query.len(),
                right: self.dim(),
            });
        }
        let qnorm = norm(query);
        if qnorm == 0.0 {
            return Err(LahjaError::ZeroNormQuery);
        }
        let mut scored: Vec<(String, f64)> = (0..self.vocab.len() as u32)
            .filter(|&i| !exclude.contains(self.vocab.word(i)))
            .map(|i| {
                let v = self.composed(i);
                (self.vocab.word(i).to_string(), cosine(query, &v))
            })
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("similarities are finite")
                .then_with(|| a.0.cmp(&b.0))
        });
        scored.truncate(n);
        Ok(scored)
    }
}

fn add_row(acc: &mut [f64], row: &[f32]) {
    for (a, x) in acc.iter_mut().zip(row) {
        *a += f64::from(*x);
    }
}

fn norm(v: &[f32]) -> f64 {
    v.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt()
}

/// Cosine similarity in double precision; zero if either vector has zero
/// norm, which keeps ranking total without NaN.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| f64::from(*x) * f64::from(*y))
        .sum();
    dot / (na * nb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Tiny model with controllable geometry: n-gram range pushed past any
    /// word length, so each word owns exactly one n-gram (its wrapped form)
    /// and, with a zero n-gram matrix, composes to word_vector / 2.
    pub(super) fn fixture_model(words: &[(&str, [f32; 2])]) -> SubwordEmbeddingModel {
        let config = EmbeddingConfig {
            dimension: 2,
            char_ngram_min: 50,
            char_ngram_max: 50,
            bucket_count: 16,
            min_count: 1,
            ..EmbeddingConfig::default()
        };
        let vocab =
            Vocabulary::from_sorted(words.iter().map(|(w, _)| (w.to_string(), 1)).collect());
        let mut word_vectors = Vec::new();
        for (_, v) in words {
            // Store 2x the target point so the composed mean lands on it.
            word_vectors.extend(v.iter().map(|x| 2.0 * x));
        }
        let ngram_vectors = vec![0.0; 16 * 2];
        let context_vectors = vec![0.0; words.len() * 2];
        SubwordEmbeddingModel::from_parts(config, vocab, word_vectors, ngram_vectors, context_vectors)
            .unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(EmbeddingConfig::default().validate().is_ok());
        for bad in [
            EmbeddingConfig {
                min_count: 0,
                ..EmbeddingConfig::default()
            },
            EmbeddingConfig {
                dimension: 0,
                ..EmbeddingConfig::default()
            },
            EmbeddingConfig {
                char_ngram_min: 7,
                char_ngram_max: 6,
                ..EmbeddingConfig::default()
            },
            EmbeddingConfig {
                learning_rate: 0.0,
                ..EmbeddingConfig::default()
            },
            EmbeddingConfig {
                word_ngrams: 2,
                ..EmbeddingConfig::default()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn composed_is_mean_of_word_and_ngram_vectors() {
        let model = fixture_model(&[("اب", [1.0, 0.0])]);
        assert_eq!(model.vector_of("اب"), vec![1.0, 0.0]);
        assert_eq!(model.word_ngram_ids[0].len(), 1);
    }

    #[test]
    fn oov_composes_from_ngrams_only() {
        let model = fixture_model(&[("اب", [1.0, 0.0])]);
        // One shared bucket matrix entry, all zero in this fixture.
        assert_eq!(model.vector_of("جد"), vec![0.0, 0.0]);
    }

    #[test]
    fn vector_of_is_deterministic() {
        let model = fixture_model(&[("اب", [0.3, 0.7]), ("جد", [0.1, 0.9])]);
        assert_eq!(model.vector_of("اب"), model.vector_of("اب"));
    }

    #[test]
    fn centroid_of_singleton_and_mean() {
        let model = fixture_model(&[("اب", [1.0, 1.0]), ("جد", [3.0, 3.0])]);
        let c = model.centroid(&["اب".into()]).unwrap();
        assert_eq!(c.vector, model.vector_of("اب"));
        let c = model.centroid(&["اب".into(), "جد".into()]).unwrap();
        assert_eq!(c.vector, vec![2.0, 2.0]);
        assert!(c.skipped.is_empty());
    }

    #[test]
    fn centroid_of_opposite_vectors_is_zero() {
        let model = fixture_model(&[("اب", [1.0, -2.0]), ("جد", [-1.0, 2.0])]);
        let c = model.centroid(&["اب".into(), "جد".into()]).unwrap();
        assert_eq!(c.vector, vec![0.0, 0.0]);
    }

    #[test]
    fn centroid_skips_oov_and_rejects_all_oov() {
        let model = fixture_model(&[("اب", [1.0, 0.0])]);
        let c = model.centroid(&["اب".into(), "غائب".into()]).unwrap();
        assert_eq!(c.skipped, ["غائب"]);
        let err = model.centroid(&["غائب".into()]).unwrap_err();
        assert!(matches!(err, LahjaError::NoWordsInVocabulary { .. }));
    }

    #[test]
    fn nearest_excludes_and_ranks() {
        let model = fixture_model(&[
            ("اب", [1.0, 0.0]),
            ("جد", [0.0, 1.0]),
            ("هو", [0.9, 0.1]),
        ]);
        let exclude: HashSet<String> = ["اب".to_string()].into();
        let hits = model.top_n_nearest(&[1.0, 0.0], 1, &exclude).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].0, "هو");
    }

    #[test]
    fn nearest_edge_cases() {
        let model = fixture_model(&[("اب", [1.0, 0.0]), ("جد", [0.0, 1.0])]);
        assert!(model
            .top_n_nearest(&[1.0, 0.0], 0, &HashSet::new())
            .unwrap()
            .is_empty());
        let all: HashSet<String> = ["اب", "جد"].iter().map(|s| s.to_string()).collect();
        assert!(model.top_n_nearest(&[1.0, 0.0], 5, &all).unwrap().is_empty());
        assert!(matches!(
            model.top_n_nearest(&[0.0, 0.0], 1, &HashSet::new()),
            Err(LahjaError::ZeroNormQuery)
        ));
        assert!(matches!(
            model.top_n_nearest(&[1.0], 1, &HashSet::new()),
            Err(LahjaError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn nearest_breaks_ties_lexicographically() {
        let model = fixture_model(&[("ب", [1.0, 0.0]), ("ا", [1.0, 0.0]), ("ج", [2.0, 0.0])]);
        let hits = model.top_n_nearest(&[1.0, 0.0], 3, &HashSet::new()).unwrap();
        let words: Vec<&str> = hits.iter().map(|(w, _)| w.as_str()).collect();
        assert_eq!(words, ["ا", "ب", "ج"]);
    }

    #[test]
    fn nearest_matches_brute_force_on_random_models() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..5 {
            let n_words = 200 + trial * 160; // up to 840
            let d = 8;
            let config = EmbeddingConfig {
                dimension: d,
                bucket_count: 64,
                min_count: 1,
                ..EmbeddingConfig::default()
            };
            let vocab = Vocabulary::from_sorted(
                (0..n_words).map(|i| (format!("و{i}"), 1)).collect(),
            );
            let mut rand_mat = |n: usize| -> Vec<f32> {
                (0..n).map(|_| rng.random_range(-1.0f32..1.0)).collect()
            };
            let model = SubwordEmbeddingModel::from_parts(
                config,
                vocab,
                rand_mat(n_words * d),
                rand_mat(64 * d),
                vec![0.0; n_words * d],
            )
            .unwrap();
            let query: Vec<f32> = (0..d).map(|_| rng.random_range(-1.0f32..1.0)).collect();

            let fast = model.top_n_nearest(&query, 10, &HashSet::new()).unwrap();

            let mut brute: Vec<(String, f64)> = (0..n_words as u32)
                .map(|i| {
                    (
                        model.vocab.word(i).to_string(),
                        cosine(&query, &model.composed(i)),
                    )
                })
                .collect();
            brute.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
            brute.truncate(10);
            assert_eq!(fast, brute);
        }
    }
}
