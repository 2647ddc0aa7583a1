//! Binary persistence for embedding models, plus a read-only text export.
//!
//! Layout: magic `LAHJEMB1`, config block, vocabulary block (length-prefixed
//! UTF-8 with frequencies), then the word, n-gram, and context matrices as
//! row-major little-endian f32.

use std::fs;
use std::io::Cursor;
use std::io::Write;
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{EmbeddingConfig, SubwordEmbeddingModel, Vocabulary};
use crate::error::{LahjaError, Result};

const MAGIC: &[u8; 8] = b"LAHJEMB1";

pub fn save_embedding(model: &SubwordEmbeddingModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out: Vec<u8> = Vec::new();
    out.extend_from_slice(MAGIC);

    let c = &model.config;
    out.write_u64::<LittleEndian>(c.min_count).unwrap();
    out.write_u32::<LittleEndian>(c.word_ngrams).unwrap();
    out.write_u64::<LittleEndian>(c.window_size as u64).unwrap();
    out.write_u32::<LittleEndian>(c.epochs).unwrap();
    out.write_u64::<LittleEndian>(c.dimension as u64).unwrap();
    out.write_u64::<LittleEndian>(c.negative_samples as u64).unwrap();
    out.write_u64::<LittleEndian>(c.char_ngram_min as u64).unwrap();
    out.write_u64::<LittleEndian>(c.char_ngram_max as u64).unwrap();
    out.write_u64::<LittleEndian>(c.bucket_count).unwrap();
    out.write_u64::<LittleEndian>(c.seed).unwrap();
    out.write_f64::<LittleEndian>(c.learning_rate).unwrap();

    out.write_u32::<LittleEndian>(model.vocab.len() as u32).unwrap();
    for (word, freq) in model.vocab.iter() {
        out.write_u32::<LittleEndian>(word.len() as u32).unwrap();
        out.extend_from_slice(word.as_bytes());
        out.write_u64::<LittleEndian>(freq).unwrap();
    }

    for matrix in [
        &model.word_vectors,
        &model.ngram_vectors,
        &model.context_vectors,
    ] {
        for &x in matrix.iter() {
            out.write_f32::<LittleEndian>(x).unwrap();
        }
    }

    fs::write(path, out).map_err(|e| LahjaError::io(path, e))
}

fn ru32(cur: &mut Cursor<&[u8]>) -> Result<u32> {
    let offset = cur.position();
    cur.read_u32::<LittleEndian>()
        .map_err(|_| LahjaError::Truncated { offset })
}

fn ru64(cur: &mut Cursor<&[u8]>) -> Result<u64> {
    let offset = cur.position();
    cur.read_u64::<LittleEndian>()
        .map_err(|_| LahjaError::Truncated { offset })
}

fn rf64(cur: &mut Cursor<&[u8]>) -> Result<f64> {
    let offset = cur.position();
    cur.read_f64::<LittleEndian>()
        .map_err(|_| LahjaError::Truncated { offset })
}

fn read_matrix(cur: &mut Cursor<&[u8]>, rows: usize, dim: usize) -> Result<Vec<f32>> {
    let entries = rows
        .checked_mul(dim)
        .ok_or_else(|| LahjaError::Format("matrix size overflows".into()))?;
    let mut out = Vec::with_capacity(entries);
    for _ in 0..entries {
        let offset = cur.position();
        out.push(
            cur.read_f32::<LittleEndian>()
                .map_err(|_| LahjaError::Truncated { offset })?,
        );
    }
    Ok(out)
}

pub fn load_embedding(path: impl AsRef<Path>) -> Result<SubwordEmbeddingModel> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|e| LahjaError::io(path, e))?;
    let mut cur = Cursor::new(data.as_slice());

    let mut magic = [0u8; 8];
    {
        let offset = cur.position();
        std::io::Read::read_exact(&mut cur, &mut magic)
            .map_err(|_| LahjaError::Truncated { offset })?;
    }
    if &magic != MAGIC {
        return Err(LahjaError::Format(format!(
            "wrong magic bytes {:?}, expected {:?}",
            String::from_utf8_lossy(&magic),
            String::from_utf8_lossy(MAGIC)
        )));
    }

    let config = EmbeddingConfig {
        min_count: ru64(&mut cur)?,
        word_ngrams: ru32(&mut cur)?,
        window_size: ru64(&mut cur)? as usize,
        epochs: ru32(&mut cur)?,
        dimension: ru64(&mut cur)? as usize,
        negative_samples: ru64(&mut cur)? as usize,
        char_ngram_min: ru64(&mut cur)? as usize,
        char_ngram_max: ru64(&mut cur)? as usize,
        bucket_count: ru64(&mut cur)?,
        seed: ru64(&mut cur)?,
        learning_rate: rf64(&mut cur)?,
    };

    let vocab_len = ru32(&mut cur)? as usize;
    let mut pairs = Vec::with_capacity(vocab_len);
    for _ in 0..vocab_len {
        let byte_len = ru32(&mut cur)? as usize;
        let offset = cur.position();
        let mut buf = vec![0u8; byte_len];
        std::io::Read::read_exact(&mut cur, &mut buf)
            .map_err(|_| LahjaError::Truncated { offset })?;
        let word = String::from_utf8(buf)
            .map_err(|e| LahjaError::Format(format!("vocabulary entry is not UTF-8: {e}")))?;
        let freq = ru64(&mut cur)?;
        pairs.push((word, freq));
    }
    let vocab = Vocabulary::from_sorted(pairs);

    let word_vectors = read_matrix(&mut cur, vocab.len(), config.dimension)?;
    let ngram_vectors = read_matrix(&mut cur, config.bucket_count as usize, config.dimension)?;
    let context_vectors = read_matrix(&mut cur, vocab.len(), config.dimension)?;

    if (cur.position() as usize) < data.len() {
        return Err(LahjaError::Format(format!(
            "{} trailing bytes after model payload",
            data.len() - cur.position() as usize
        )));
    }

    SubwordEmbeddingModel::from_parts(config, vocab, word_vectors, ngram_vectors, context_vectors)
}

/// Write the vocabulary's composed vectors as text: a `|V| dim` header line,
/// then one `word x1 .. xd` line per word in index order.
pub fn export_text(model: &SubwordEmbeddingModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    writeln!(out, "{} {}", model.vocab.len(), model.dim()).unwrap();
    for idx in 0..model.vocab.len() as u32 {
        let mut line = model.vocab.word(idx).to_string();
        for x in model.composed(idx) {
            line.push(' ');
            line.push_str(&x.to_string());
        }
        writeln!(out, "{line}").unwrap();
    }
    fs::write(path, out).map_err(|e| LahjaError::io(path, e))
}
