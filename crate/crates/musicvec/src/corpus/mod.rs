//! Corpus construction: tokenization, track-cluster documents, shuffle
//! augmentation, corpus merging, and vocabulary building.
//!
//! A music track is represented as one "cluster" document holding its
//! normalized tags, tokenized review text, and the artist/track IDs as plain
//! vocabulary tokens. Context windows never cross document boundaries, so the
//! cluster is the co-occurrence unit.

mod io;
mod vocab;

pub use io::{
    count_unique_ids, read_general_corpus, read_processed_corpus, read_track_records,
    write_processed_corpus, CorpusStats,
};
pub use vocab::{build_vocabulary, subsample_keep_probability, Vocabulary};

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::seed;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("tag is empty or whitespace-only")]
    EmptyTag,
    #[error("only track-cluster documents can be shuffle-augmented")]
    WrongKind,
    #[error("no word survives the min_count={0} filter")]
    EmptyCorpus(u32),
    #[error("invalid track record: {0}")]
    InvalidRecord(String),
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Where a document came from; only track clusters may be shuffle-augmented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DocumentKind {
    GeneralText,
    TrackCluster,
}

/// One training document: an ordered token sequence bounded for context
/// windows. Tokens are non-empty and contain no whitespace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub tokens: Vec<String>,
    pub kind: DocumentKind,
}

impl Document {
    pub fn general(tokens: Vec<String>) -> Self {
        Document {
            tokens,
            kind: DocumentKind::GeneralText,
        }
    }

    pub fn cluster(tokens: Vec<String>) -> Self {
        Document {
            tokens,
            kind: DocumentKind::TrackCluster,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// One music track's raw annotation data: the unit from which a cluster
/// document is built. IDs are treated as ordinary vocabulary tokens, so they
/// must be non-empty, whitespace-free, and distinct from each other.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackClusterRecord {
    pub track_id: String,
    pub artist_id: String,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default)]
    pub reviews: Vec<String>,
}

impl TrackClusterRecord {
    pub fn new(
        track_id: impl Into<String>,
        artist_id: impl Into<String>,
        tags: Vec<String>,
        reviews: Vec<String>,
    ) -> Result<Self, CorpusError> {
        let record = TrackClusterRecord {
            track_id: track_id.into(),
            artist_id: artist_id.into(),
            tags,
            reviews,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        for (field, value) in [("track_id", &self.track_id), ("artist_id", &self.artist_id)] {
            if value.is_empty() {
                return Err(CorpusError::InvalidRecord(format!("{field} is empty")));
            }
            if value.chars().any(char::is_whitespace) {
                return Err(CorpusError::InvalidRecord(format!(
                    "{field} {value:?} contains whitespace"
                )));
            }
        }
        if self.track_id == self.artist_id {
            return Err(CorpusError::InvalidRecord(format!(
                "track_id and artist_id are both {:?}",
                self.track_id
            )));
        }
        if self.tags.iter().any(|t| t.trim().is_empty()) {
            return Err(CorpusError::InvalidRecord(format!(
                "track {:?} has an empty tag",
                self.track_id
            )));
        }
        Ok(())
    }
}

/// Corpus-pipeline settings shared by the ingestion and training stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    /// Words occurring fewer times than this are dropped from the vocabulary.
    pub min_count: u32,
    /// Frequent-word subsampling threshold `t` in (0, 1]; disabled when None.
    pub subsample_threshold: Option<f64>,
    /// Shuffled copies added per track-cluster document (0 = original only).
    pub augment_copies: u32,
    pub rng_seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            min_count: 5,
            subsample_threshold: None,
            augment_copies: 5,
            rng_seed: 42,
        }
    }
}

/// Splits raw text into lowercase tokens. Unicode letters and digits are
/// token characters; apostrophes and ampersands are kept only between two
/// token characters (`don't`, `r&b`); everything else separates tokens.
/// Total: any input (including empty) is accepted.
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    let chars: Vec<char> = lowered.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let joins = (c == '\'' || c == '&')
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if c.is_alphanumeric() || joins {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Normalizes a tag into a single token: trims, lowercases, and joins
/// internal whitespace runs with one underscore ("Club Dance" → "club_dance").
pub fn normalize_tag(tag: &str) -> Result<String, CorpusError> {
    let trimmed = tag.trim();
    if trimmed.is_empty() {
        return Err(CorpusError::EmptyTag);
    }
    let lowered = trimmed.to_lowercase();
    Ok(lowered.split_whitespace().collect::<Vec<_>>().join("_"))
}

/// Builds the cluster document for one track: normalized tags in input order
/// (first occurrence wins), then tokenized reviews in input order, then the
/// artist and track IDs, each exactly once.
pub fn build_cluster_document(record: &TrackClusterRecord) -> Document {
    let mut tokens = Vec::new();
    let mut seen_tags = HashSet::new();
    for tag in &record.tags {
        // Empty tags are rejected by validate(); skip defensively here so the
        // construction stays total.
        if let Ok(normalized) = normalize_tag(tag) {
            if seen_tags.insert(normalized.clone()) {
                tokens.push(normalized);
            }
        }
    }
    for review in &record.reviews {
        tokens.extend(tokenize(review));
    }
    tokens.push(record.artist_id.clone());
    tokens.push(record.track_id.clone());
    Document::cluster(tokens)
}

/// Returns the original document followed by `copies` uniform permutations of
/// its tokens. Word order inside a cluster carries no meaning, so permuting it
/// manufactures extra co-occurrence evidence. Deterministic per
/// (doc, copies, seed); general-text documents are never shuffled.
pub fn shuffle_augment(
    doc: &Document,
    copies: u32,
    seed: u64,
) -> Result<Vec<Document>, CorpusError> {
    if doc.kind != DocumentKind::TrackCluster {
        return Err(CorpusError::WrongKind);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(copies as usize + 1);
    out.push(doc.clone());
    for _ in 0..copies {
        let mut tokens = doc.tokens.clone();
        tokens.shuffle(&mut rng);
        out.push(Document::cluster(tokens));
    }
    Ok(out)
}

/// Applies [`shuffle_augment`] to every track-cluster document in a corpus,
/// deriving an independent seed per document; general text passes through.
pub fn augment_corpus(docs: &[Document], copies: u32, seed: u64) -> Vec<Document> {
    let mut out = Vec::with_capacity(docs.len());
    for (i, doc) in docs.iter().enumerate() {
        match doc.kind {
            DocumentKind::TrackCluster => {
                let expanded = shuffle_augment(doc, copies, seed::mix(seed, i as u64))
                    .expect("kind checked above");
                out.extend(expanded);
            }
            DocumentKind::GeneralText => out.push(doc.clone()),
        }
    }
    out
}

/// Which corpora feed training; mirrors the corpus-combination experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusMix {
    GeneralOnly,
    MusicOnly,
    Both,
}

/// Merges the general and music corpora into one training stream.
/// `Both` concatenates general first, then music.
pub fn merge_corpora(
    general: Vec<Document>,
    music: Vec<Document>,
    mode: CorpusMix,
) -> Vec<Document> {
    match mode {
        CorpusMix::GeneralOnly => general,
        CorpusMix::MusicOnly => music,
        CorpusMix::Both => {
            let mut all = general;
            all.extend(music);
            all
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn doc(tokens: &[&str]) -> Document {
        Document::cluster(tokens.iter().map(|t| t.to_string()).collect())
    }

    #[test]
    fn tokenize_lowercases_and_splits_on_punctuation() {
        assert_eq!(
            tokenize("Electronic Dance Music!"),
            vec!["electronic", "dance", "music"]
        );
    }

    #[test]
    fn tokenize_empty_input_yields_no_tokens() {
        assert_eq!(tokenize(""), Vec::<String>::new());
        assert_eq!(tokenize("  \t\n ... !!"), Vec::<String>::new());
    }

    #[test]
    fn tokenize_keeps_intra_word_ampersand_and_apostrophe() {
        assert_eq!(tokenize("club-dance R&B"), vec!["club", "dance", "r&b"]);
        assert_eq!(tokenize("don't stop"), vec!["don't", "stop"]);
        // Leading/trailing joiners separate instead.
        assert_eq!(tokenize("'ello & goodbye&"), vec!["ello", "goodbye"]);
        assert_eq!(tokenize("r&&b a''b"), vec!["r", "b", "a", "b"]);
    }

    #[test]
    fn tokenize_handles_unicode_words_and_digits() {
        assert_eq!(tokenize("Müsic 99 東京"), vec!["müsic", "99", "東京"]);
    }

    #[test]
    fn tokenize_is_idempotent_on_its_own_output() {
        for text in [
            "Electronic Dance Music!",
            "club-dance R&B",
            "don't stop 99 東京 Müsic",
            "İstanbul'da",
        ] {
            let once = tokenize(text);
            let again = tokenize(&once.join(" "));
            assert_eq!(once, again, "re-tokenizing output of {text:?}");
        }
    }

    #[test]
    fn normalize_tag_collapses_whitespace_to_underscores() {
        assert_eq!(normalize_tag("Club Dance").unwrap(), "club_dance");
        assert_eq!(normalize_tag("House").unwrap(), "house");
        assert_eq!(normalize_tag("  Late   Night  ").unwrap(), "late_night");
    }

    #[test]
    fn normalize_tag_rejects_empty_tags() {
        assert!(matches!(normalize_tag(""), Err(CorpusError::EmptyTag)));
        assert!(matches!(normalize_tag("   \t"), Err(CorpusError::EmptyTag)));
    }

    #[test]
    fn cluster_document_orders_tags_reviews_then_ids() {
        let record = TrackClusterRecord::new(
            "TR001",
            "AR001",
            vec!["House".into()],
            vec!["great beat".into()],
        )
        .unwrap();
        let document = build_cluster_document(&record);
        assert_eq!(document.kind, DocumentKind::TrackCluster);
        assert_eq!(document.tokens, vec!["house", "great", "beat", "AR001", "TR001"]);
    }

    #[test]
    fn cluster_document_with_no_content_is_just_ids() {
        let record = TrackClusterRecord::new("TR002", "AR002", vec![], vec![]).unwrap();
        assert_eq!(build_cluster_document(&record).tokens, vec!["AR002", "TR002"]);
    }

    #[test]
    fn cluster_document_normalizes_multiword_tags() {
        let record = TrackClusterRecord::new(
            "TR003",
            "AR003",
            vec!["Club Dance".into(), "Partying".into()],
            vec![],
        )
        .unwrap();
        assert_eq!(
            build_cluster_document(&record).tokens,
            vec!["club_dance", "partying", "AR003", "TR003"]
        );
    }

    #[test]
    fn cluster_document_deduplicates_tags_after_normalization() {
        let record = TrackClusterRecord::new(
            "TR004",
            "AR004",
            vec!["Club Dance".into(), "club  dance".into(), "House".into()],
            vec![],
        )
        .unwrap();
        assert_eq!(
            build_cluster_document(&record).tokens,
            vec!["club_dance", "house", "AR004", "TR004"]
        );
    }

    #[test]
    fn record_validation_rejects_bad_ids() {
        assert!(TrackClusterRecord::new("", "AR", vec![], vec![]).is_err());
        assert!(TrackClusterRecord::new("TR", "", vec![], vec![]).is_err());
        assert!(TrackClusterRecord::new("X", "X", vec![], vec![]).is_err());
        assert!(TrackClusterRecord::new("T R", "AR", vec![], vec![]).is_err());
        assert!(TrackClusterRecord::new("TR", "AR", vec!["  ".into()], vec![]).is_err());
    }

    #[test]
    fn shuffle_augment_zero_copies_returns_original_only() {
        let d = doc(&["a", "b", "c"]);
        let out = shuffle_augment(&d, 0, 7).unwrap();
        assert_eq!(out, vec![d]);
    }

    #[test]
    fn shuffle_augment_preserves_token_multiset() {
        let d = doc(&["a", "b", "c", "d", "e"]);
        let out = shuffle_augment(&d, 2, 7).unwrap();
        assert_eq!(out.len(), 3);
        fn multiset(tokens: &[String]) -> HashMap<&String, usize> {
            let mut m = HashMap::new();
            for t in tokens {
                *m.entry(t).or_default() += 1;
            }
            m
        }
        let original = multiset(&d.tokens);
        for copy in &out {
            assert_eq!(multiset(&copy.tokens), original);
            assert_eq!(copy.kind, DocumentKind::TrackCluster);
        }
    }

    #[test]
    fn shuffle_augment_is_deterministic_per_seed() {
        let d = doc(&["a", "b", "c", "d", "e", "f"]);
        assert_eq!(
            shuffle_augment(&d, 3, 7).unwrap(),
            shuffle_augment(&d, 3, 7).unwrap()
        );
        assert_ne!(
            shuffle_augment(&d, 3, 7).unwrap(),
            shuffle_augment(&d, 3, 8).unwrap()
        );
    }

    #[test]
    fn shuffle_augment_rejects_general_text() {
        let d = Document::general(vec!["a".into(), "b".into()]);
        assert!(matches!(
            shuffle_augment(&d, 1, 7),
            Err(CorpusError::WrongKind)
        ));
    }

    #[test]
    fn augment_corpus_expands_clusters_and_passes_general_through() {
        let docs = vec![
            Document::general(vec!["g".into(), "h".into()]),
            doc(&["x", "y", "z"]),
        ];
        let out = augment_corpus(&docs, 2, 42);
        assert_eq!(out.len(), 1 + 3);
        assert_eq!(out[0], docs[0]);
        assert_eq!(out[1], docs[1]);
        // Deterministic overall.
        assert_eq!(out, augment_corpus(&docs, 2, 42));
    }

    #[test]
    fn merge_corpora_respects_mode() {
        let general = vec![doc(&["g1"]), doc(&["g2"]), doc(&["g3"])];
        let music = vec![doc(&["m1"]), doc(&["m2"])];
        assert_eq!(
            merge_corpora(general.clone(), music.clone(), CorpusMix::Both).len(),
            5
        );
        assert_eq!(
            merge_corpora(general.clone(), music.clone(), CorpusMix::MusicOnly),
            music
        );
        assert_eq!(
            merge_corpora(general.clone(), music.clone(), CorpusMix::GeneralOnly),
            general
        );
        let both = merge_corpora(general.clone(), music.clone(), CorpusMix::Both);
        assert_eq!(&both[..3], &general[..]);
        assert_eq!(&both[3..], &music[..]);
        assert!(merge_corpora(vec![], vec![], CorpusMix::Both).is_empty());
    }
}
