//! Vocabulary with min-count filtering and frequency statistics.

use std::collections::HashMap;

use super::{CorpusError, Document};

/// Word → (index, count) mapping over the retained vocabulary. Indices are
/// contiguous from 0 in descending count order (ties broken lexicographically),
/// so they are stable across runs for a fixed corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    total_tokens: u64,
    min_count: u32,
}

impl Vocabulary {
    /// Number of retained words (V).
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, index: usize) -> &str {
        &self.words[index]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts[index]
    }

    /// Sum of counts over retained words.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn min_count(&self) -> u32 {
        self.min_count
    }

    /// Relative corpus frequency f(w) of the word at `index`.
    pub fn frequency(&self, index: usize) -> f64 {
        self.counts[index] as f64 / self.total_tokens as f64
    }
}

/// Counts every token occurrence in the corpus, drops words seen fewer than
/// `min_count` times, and assigns indices by descending count, then
/// lexicographically.
pub fn build_vocabulary<'a, I>(corpus: I, min_count: u32) -> Result<Vocabulary, CorpusError>
where
    I: IntoIterator<Item = &'a Document>,
{
    assert!(min_count >= 1, "min_count must be at least 1");
    let mut counts: HashMap<String, u64> = HashMap::new();
    for doc in corpus {
        for token in &doc.tokens {
            *counts.entry(token.clone()).or_insert(0) += 1;
        }
    }
    let mut entries: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|&(_, count)| count >= u64::from(min_count))
        .collect();
    if entries.is_empty() {
        return Err(CorpusError::EmptyCorpus(min_count));
    }
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut words = Vec::with_capacity(entries.len());
    let mut word_counts = Vec::with_capacity(entries.len());
    let mut index = HashMap::with_capacity(entries.len());
    let mut total_tokens = 0u64;
    for (i, (word, count)) in entries.into_iter().enumerate() {
        index.insert(word.clone(), i);
        words.push(word);
        word_counts.push(count);
        total_tokens += count;
    }
    Ok(Vocabulary {
        words,
        counts: word_counts,
        index,
        total_tokens,
        min_count,
    })
}

/// Probability of keeping one occurrence of a word under frequent-word
/// subsampling: min(1, sqrt(t / f(w))) with f(w) = word_count/total_tokens.
pub fn subsample_keep_probability(word_count: u64, total_tokens: u64, threshold: f64) -> f64 {
    debug_assert!(word_count >= 1);
    debug_assert!(total_tokens >= word_count);
    debug_assert!(threshold > 0.0);
    let frequency = word_count as f64 / total_tokens as f64;
    (threshold / frequency).sqrt().min(1.0)
}
