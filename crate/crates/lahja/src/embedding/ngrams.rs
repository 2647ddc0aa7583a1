//! Character n-gram extraction and bucket hashing for subword vectors.

/// Enumerate the character n-grams of `word` after wrapping it in the
/// boundary markers `<` and `>`.
///
/// N-grams are emitted shortest length first, left to right within each
/// length; the wrapped word itself is appended when no n-gram already
/// equals it. Duplicate interior n-grams are kept.
pub fn char_ngrams(word: &str, min_n: usize, max_n: usize) -> Vec<String> {
    let wrapped: Vec<char> = std::iter::once('<')
        .chain(word.chars())
        .chain(std::iter::once('>'))
        .collect();
    let mut out = Vec::new();
    for n in min_n..=max_n.min(wrapped.len()) {
        for start in 0..=(wrapped.len() - n) {
            out.push(wrapped[start..start + n].iter().collect());
        }
    }
    let whole: String = wrapped.iter().collect();
    if !out.contains(&whole) {
        out.push(whole);
    }
    out
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over the n-gram's UTF-8 bytes, reduced modulo `bucket_count`.
/// Stable across runs and platforms.
pub fn hash_ngram(ngram: &str, bucket_count: u64) -> u64 {
    let mut h = FNV_OFFSET;
    for b in ngram.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h % bucket_count
}
