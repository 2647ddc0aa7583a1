//! Skip-gram training with negative sampling.
//!
//! The per-pair loss and gradients live in small pure functions over f64
//! slices; the training loops feed them rows of the f32 matrices. That keeps
//! the arithmetic testable against finite differences without reference to
//! any model plumbing.

use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EmbeddingConfig, SubwordEmbeddingModel, Vocabulary};
use crate::error::Result;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Negative-sampling loss for one (target, context, negatives) step:
/// −log σ(u_c·v_t) − Σ_n log σ(−u_n·v_t), where `target` is the composed
/// target vector v_t.
pub fn pair_loss(target: &[f64], context: &[f64], negatives: &[Vec<f64>]) -> f64 {
    let mut loss = -log_sigmoid(dot(context, target));
    for neg in negatives {
        loss -= log_sigmoid(-dot(neg, target));
    }
    loss
}

/// Gradients of [`pair_loss`] with respect to each of its arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGradients {
    pub target: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn pair_gradients(target: &[f64], context: &[f64], negatives: &[Vec<f64>]) -> PairGradients {
    let d = target.len();
    let pos_err = sigmoid(dot(context, target)) - 1.0;
    let mut target_grad: Vec<f64> = (0..d).map(|i| pos_err * context[i]).collect();
    let context_grad: Vec<f64> = target.iter().map(|t| pos_err * t).collect();
    let mut negative_grads = Vec::with_capacity(negatives.len());
    for neg in negatives {
        let neg_err = sigmoid(dot(neg, target));
        for i in 0..d {
            target_grad[i] += neg_err * neg[i];
        }
        negative_grads.push(target.iter().map(|t| neg_err * t).collect());
    }
    PairGradients {
        target: target_grad,
        context: context_grad,
        negatives: negative_grads,
    }
}

/// Sampler over the vocabulary's unigram distribution raised to 0.75,
/// via inverse CDF on a cumulative table.
struct NegativeTable {
    cumulative: Vec<f64>,
    total: f64,
}

impl NegativeTable {
    fn new(vocab: &Vocabulary) -> Self {
        let mut cumulative = Vec::with_capacity(vocab.len());
        let mut acc = 0.0;
        for i in 0..vocab.len() as u32 {
            acc += (vocab.freq(i) as f64).powf(0.75);
            cumulative.push(acc);
        }
        NegativeTable {
            cumulative,
            total: acc,
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> u32 {
        let u = rng.random_range(0.0..self.total);
        self.cumulative.partition_point(|&c| c <= u) as u32
    }

    /// Up to `count` negatives, none equal to `exclude`. With a single-word
    /// vocabulary no negative exists and the list is empty.
    fn draw(&self, count: usize, exclude: u32, rng: &mut impl Rng) -> Vec<u32> {
        let mut out = Vec::with_capacity(count);
        if self.cumulative.len() > 1 {
            while out.len() < count {
                let cand = self.sample(rng);
                if cand != exclude {
                    out.push(cand);
                }
            }
        }
        out
    }
}

fn encode(sentences: &[Vec<String>], vocab: &Vocabulary) -> Vec<Vec<u32>> {
    sentences
        .iter()
        .map(|s| s.iter().filter_map(|t| vocab.get(t)).collect::<Vec<u32>>())
        .filter(|s| s.len() >= 2)
        .collect()
}

fn pair_count(len: usize, window: usize) -> u64 {
    let mut n = 0u64;
    for t in 0..len {
        let lo = t.saturating_sub(window);
        let hi = (t + window).min(len - 1);
        n += (hi - lo) as u64;
    }
    n
}

fn compose_f64(model: &SubwordEmbeddingModel, idx: u32) -> Vec<f64> {
    let mut acc: Vec<f64> = model.word_row(idx).iter().map(|x| f64::from(*x)).collect();
    for &bucket in &model.word_ngram_ids[idx as usize] {
        for (a, x) in acc.iter_mut().zip(model.ngram_row(bucket)) {
            *a += f64::from(*x);
        }
    }
    let denom = (1 + model.word_ngram_ids[idx as usize].len()) as f64;
    acc.iter_mut().for_each(|a| *a /= denom);
    acc
}

fn apply_into(row: &mut [f32], grad: &[f64], lr: f64, scale: f64) {
    for (x, g) in row.iter_mut().zip(grad) {
        *x = (f64::from(*x) - lr * scale * g) as f32;
    }
}

/// Deterministic single-threaded training. Identical seed and corpus give a
/// bit-identical model.
pub fn train_skipgram(
    sentences: &[Vec<String>],
    config: &EmbeddingConfig,
) -> Result<SubwordEmbeddingModel> {
    train_skipgram_with_report(sentences, config).map(|(model, _)| model)
}

/// As [`train_skipgram`], but also returns the mean pair loss of each epoch,
/// measured before each update.
pub fn train_skipgram_with_report(
    sentences: &[Vec<String>],
    config: &EmbeddingConfig,
) -> Result<(SubwordEmbeddingModel, Vec<f64>)> {
    config.validate()?;
    let vocab = Vocabulary::build(sentences, config.min_count)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = SubwordEmbeddingModel::init(config.clone(), vocab, &mut rng)?;
    let encoded = encode(sentences, &model.vocab);
    let pairs_per_epoch: u64 = encoded
        .iter()
        .map(|s| pair_count(s.len(), config.window_size))
        .sum();
    let total_steps = pairs_per_epoch * u64::from(config.epochs);
    if total_steps == 0 {
        return Ok((model, Vec::new()));
    }
    let table = NegativeTable::new(&model.vocab);
    let d = config.dimension;
    let mut report = Vec::with_capacity(config.epochs as usize);
    let mut step = 0u64;
    for _ in 0..config.epochs {
        let mut epoch_loss = 0.0;
        for sentence in &encoded {
            for t in 0..sentence.len() {
                let target = sentence[t];
                let lo = t.saturating_sub(config.window_size);
                let hi = (t + config.window_size).min(sentence.len() - 1);
                for c in lo..=hi {
                    if c == t {
                        continue;
                    }
                    let context = sentence[c];
                    let lr = config.learning_rate * (1.0 - step as f64 / total_steps as f64);
                    let negatives = table.draw(config.negative_samples, context, &mut rng);

                    let composed = compose_f64(&model, target);
                    let context_vec: Vec<f64> =
                        model.context_row(context).iter().map(|x| f64::from(*x)).collect();
                    let neg_vecs: Vec<Vec<f64>> = negatives
                        .iter()
                        .map(|&n| model.context_row(n).iter().map(|x| f64::from(*x)).collect())
                        .collect();

                    epoch_loss += pair_loss(&composed, &context_vec, &neg_vecs);
                    let grads = pair_gradients(&composed, &context_vec, &neg_vecs);

                    // The composed vector is a mean over 1 + #ngrams rows, so
                    // each contributing row receives the target gradient
                    // scaled by that same factor.
                    let share = 1.0 / (1 + model.word_ngram_ids[target as usize].len()) as f64;
                    let ti = target as usize * d;
                    apply_into(
                        &mut model.word_vectors[ti..ti + d],
                        &grads.target,
                        lr,
                        share,
                    );
                    let buckets = model.word_ngram_ids[target as usize].clone();
                    for bucket in buckets {
                        let bi = bucket as usize * d;
                        apply_into(
                            &mut model.ngram_vectors[bi..bi + d],
                            &grads.target,
                            lr,
                            share,
                        );
                    }
                    let ci = context as usize * d;
                    apply_into(&mut model.context_vectors[ci..ci + d], &grads.context, lr, 1.0);
                    for (j, &n) in negatives.iter().enumerate() {
                        let ni = n as usize * d;
                        apply_into(
                            &mut model.context_vectors[ni..ni + d],
                            &grads.negatives[j],
                            lr,
                            1.0,
                        );
                    }
                    step += 1;
                }
            }
        }
        report.push(epoch_loss / pairs_per_epoch as f64);
    }
    Ok((model, report))
}

fn load_row_f64(atoms: &[AtomicU32], row: usize, d: usize) -> Vec<f64> {
    (0..d)
        .map(|i| f64::from(f32::from_bits(atoms[row * d + i].load(Ordering::Relaxed))))
        .collect()
}

fn apply_row_atomic(atoms: &[AtomicU32], row: usize, d: usize, grad: &[f64], lr: f64, scale: f64) {
    for i in 0..d {
        let slot = &atoms[row * d + i];
        let old = f64::from(f32::from_bits(slot.load(Ordering::Relaxed)));
        let new = (old - lr * scale * grad[i]) as f32;
        slot.store(new.to_bits(), Ordering::Relaxed);
    }
}

/// Lock-free parallel training: threads update the shared matrices without
/// synchronization, so lost updates are possible and results vary run to
/// run. Only statistical quality is guaranteed; use [`train_skipgram`] when
/// reproducibility matters.
pub fn train_skipgram_parallel(
    sentences: &[Vec<String>],
    config: &EmbeddingConfig,
    threads: usize,
) -> Result<SubwordEmbeddingModel> {
    if threads <= 1 {
        return train_skipgram(sentences, config);
    }
    config.validate()?;
    let vocab = Vocabulary::build(sentences, config.min_count)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = SubwordEmbeddingModel::init(config.clone(), vocab, &mut rng)?;
    let encoded = encode(sentences, &model.vocab);
    let pairs_per_epoch: u64 = encoded
        .iter()
        .map(|s| pair_count(s.len(), config.window_size))
        .sum();
    let total_steps = pairs_per_epoch * u64::from(config.epochs);
    if total_steps == 0 {
        return Ok(model);
    }
    let table = NegativeTable::new(&model.vocab);
    let d = config.dimension;

    let to_atoms = |v: &[f32]| -> Vec<AtomicU32> {
        v.iter().map(|x| AtomicU32::new(x.to_bits())).collect()
    };
    let word_atoms = to_atoms(&model.word_vectors);
    let ngram_atoms = to_atoms(&model.ngram_vectors);
    let context_atoms = to_atoms(&model.context_vectors);
    let step = AtomicU64::new(0);

    let chunk_size = encoded.len().div_ceil(threads);
    std::thread::scope(|scope| {
        for (tid, chunk) in encoded.chunks(chunk_size.max(1)).enumerate() {
            let (word_atoms, ngram_atoms, context_atoms) =
                (&word_atoms, &ngram_atoms, &context_atoms);
            let (table, step, model) = (&table, &step, &model);
            scope.spawn(move || {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    config
                        .seed
                        .wrapping_add((tid as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)),
                );
                for _ in 0..config.epochs {
                    for sentence in chunk {
                        for t in 0..sentence.len() {
                            let target = sentence[t];
                            let lo = t.saturating_sub(config.window_size);
                            let hi = (t + config.window_size).min(sentence.len() - 1);
                            for c in lo..=hi {
                                if c == t {
                                    continue;
                                }
                                let context = sentence[c];
                                let now = step.fetch_add(1, Ordering::Relaxed);
                                let lr = config.learning_rate
                                    * (1.0 - now as f64 / total_steps as f64).max(0.0);
                                let negatives =
                                    table.draw(config.negative_samples, context, &mut rng);

                                let ngram_ids = &model.word_ngram_ids[target as usize];
                                let mut composed = load_row_f64(word_atoms, target as usize, d);
                                for &bucket in ngram_ids {
                                    let row = load_row_f64(ngram_atoms, bucket as usize, d);
                                    for (a, x) in composed.iter_mut().zip(&row) {
                                        *a += x;
                                    }
                                }
                                let denom = (1 + ngram_ids.len()) as f64;
                                composed.iter_mut().for_each(|a| *a /= denom);

                                let context_vec = load_row_f64(context_atoms, context as usize, d);
                                let neg_vecs: Vec<Vec<f64>> = negatives
                                    .iter()
                                    .map(|&n| load_row_f64(context_atoms, n as usize, d))
                                    .collect();
                                let grads = pair_gradients(&composed, &context_vec, &neg_vecs);

                                let share = 1.0 / denom;
                                apply_row_atomic(
                                    word_atoms,
                                    target as usize,
                                    d,
                                    &grads.target,
                                    lr,
                                    share,
                                );
                                for &bucket in ngram_ids {
                                    apply_row_atomic(
                                        ngram_atoms,
                                        bucket as usize,
                                        d,
                                        &grads.target,
                                        lr,
                                        share,
                                    );
                                }
                                apply_row_atomic(
                                    context_atoms,
                                    context as usize,
                                    d,
                                    &grads.context,
                                    lr,
                                    1.0,
                                );
                                for (j, &n) in negatives.iter().enumerate() {
                                    apply_row_atomic(
                                        context_atoms,
                                        n as usize,
                                        d,
                                        &grads.negatives[j],
                                        lr,
                                        1.0,
                                    );
                                }
                            }
                        }
                    }
                }
            });
        }
    });

    let from_atoms = |atoms: Vec<AtomicU32>| -> Vec<f32> {
        atoms
            .into_iter()
            .map(|a| f32::from_bits(a.into_inner()))
            .collect()
    };
    model.word_vectors = from_atoms(word_atoms);
    model.ngram_vectors = from_atoms(ngram_atoms);
    model.context_vectors = from_atoms(context_atoms);
    Ok(model)
}
