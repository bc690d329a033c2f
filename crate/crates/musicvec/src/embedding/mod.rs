//! Immutable embedding store: cosine similarity, nearest-neighbor queries,
//! and word2vec-compatible serialization.
//!
//! Vectors are held in interop precision (f32); all similarity arithmetic
//! runs in f64 with precomputed norms. Queries use the model's input vectors
//! only — output vectors live in full checkpoints but not here.

mod io;

pub use io::{load, load_with, save, EmbeddingFormat};

use std::collections::{BTreeSet, HashMap};

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("unknown word {0:?}")]
    UnknownWord(String),
    #[error("duplicate word {0:?}")]
    DuplicateWord(String),
    #[error("word {0:?} is empty or contains whitespace and cannot be stored")]
    InvalidWord(String),
    #[error("vector data holds {values} values, expected {words} words x {dim} dimensions")]
    DimensionMismatch {
        words: usize,
        dim: usize,
        values: usize,
    },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("malformed record {record}: {message}")]
    MalformedRecord { record: usize, message: String },
    #[error("truncated file: {0}")]
    TruncatedFile(String),
    #[error("cannot infer embedding format from {0:?} (expected a .txt or .bin path)")]
    UnknownFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A read-only V×D embedding matrix with its vocabulary. Norms are
/// precomputed at construction; the store never mutates afterwards, so it is
/// safe to share across any number of reader threads.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    words: Vec<String>,
    dim: usize,
    vectors: Vec<f32>,
    norms: Vec<f64>,
    index: HashMap<String, usize>,
}

impl EmbeddingStore {
    /// Builds a store from a flat row-major matrix. Words must be unique,
    /// non-empty, and whitespace-free (whitespace would corrupt the
    /// serialization formats), and `vectors` must hold exactly
    /// `words.len() * dim` values.
    pub fn new(
        words: Vec<String>,
        dim: usize,
        vectors: Vec<f32>,
    ) -> Result<EmbeddingStore, EmbeddingError> {
        if vectors.len() != words.len() * dim {
            return Err(EmbeddingError::DimensionMismatch {
                words: words.len(),
                dim,
                values: vectors.len(),
            });
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, word) in words.iter().enumerate() {
            if word.is_empty() || word.chars().any(char::is_whitespace) {
                return Err(EmbeddingError::InvalidWord(word.clone()));
            }
            if index.insert(word.clone(), i).is_some() {
                return Err(EmbeddingError::DuplicateWord(word.clone()));
            }
        }
        let norms = vectors
            .chunks(dim.max(1))
            .take(words.len())
            .map(|row| row.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt())
            .collect();
        Ok(EmbeddingStore {
            words,
            dim,
            vectors,
            norms,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn vector(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vector_of(&self, word: &str) -> Option<&[f32]> {
        self.index_of(word).map(|i| self.vector(i))
    }

    pub fn norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    /// Cosine similarity by vocabulary index, in [−1, 1]; 0 when either
    /// vector has zero norm. Exactly symmetric in its arguments.
    pub fn cosine_by_index(&self, i: usize, j: usize) -> f64 {
        let denominator = self.norms[i] * self.norms[j];
        if denominator == 0.0 {
            return 0.0;
        }
        let dot: f64 = self
            .vector(i)
            .iter()
            .zip(self.vector(j))
            .map(|(&a, &b)| f64::from(a) * f64::from(b))
            .sum();
        (dot / denominator).clamp(-1.0, 1.0)
    }

    /// Cosine similarity between two stored words.
    pub fn cosine(&self, a: &str, b: &str) -> Result<f64, EmbeddingError> {
        let i = self.require(a)?;
        let j = self.require(b)?;
        Ok(self.cosine_by_index(i, j))
    }

    /// Top-`k` nearest words to `query` by descending cosine, with ties
    /// broken by ascending vocabulary index. The query itself is excluded.
    /// When `restrict` is given, only those words form the candidate pool
    /// (entries missing from the vocabulary are skipped, duplicates count
    /// once). Returns fewer than `k` entries when the pool is smaller.
    pub fn most_similar(
        &self,
        query: &str,
        k: usize,
        restrict: Option<&[String]>,
    ) -> Result<Vec<(String, f64)>, EmbeddingError> {
        let q = self.require(query)?;
        let candidates: Vec<usize> = match restrict {
            None => (0..self.len()).filter(|&i| i != q).collect(),
            Some(words) => words
                .iter()
                .filter_map(|w| self.index_of(w))
                .filter(|&i| i != q)
                .collect::<BTreeSet<usize>>()
                .into_iter()
                .collect(),
        };
        let mut scored: Vec<(usize, f64)> = candidates
            .into_iter()
            .map(|i| (i, self.cosine_by_index(q, i)))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored.truncate(k);
        Ok(scored
            .into_iter()
            .map(|(i, sim)| (self.words[i].clone(), sim))
            .collect())
    }

    fn require(&self, word: &str) -> Result<usize, EmbeddingError> {
        self.index_of(word)
            .ok_or_else(|| EmbeddingError::UnknownWord(word.to_string()))
    }
}
