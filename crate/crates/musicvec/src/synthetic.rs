//! Synthetic corpora with known structure, for desk-scale experiments.
//!
//! Two generators: a two-topic corpus whose embedding should separate the
//! topics, and a richer "trend" setup — topic-structured track clusters with
//! aligned tag annotations plus topic-agnostic general text — for comparing
//! corpora the way the full-scale pipeline compares its seven corpus mixes.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{build_cluster_document, Document, TrackClusterRecord};
use crate::seed;

/// Settings for [`two_topic_corpus`]: two disjoint topic vocabularies, each
/// document drawn from exactly one of them.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoTopicParams {
    pub words_per_topic: usize,
    pub documents: usize,
    pub tokens_per_document: usize,
    pub rng_seed: u64,
}

impl Default for TwoTopicParams {
    fn default() -> Self {
        TwoTopicParams {
            words_per_topic: 20,
            documents: 1000,
            tokens_per_document: 12,
            rng_seed: 42,
        }
    }
}

/// Word `w` of topic `t` is named `t{t}w{w:02}`; plain alphanumerics, so the
/// names survive tokenization unchanged.
pub fn topic_word(topic: usize, word: usize) -> String {
    format!("t{topic}w{word:02}")
}

/// Recovers the topic index from a [`topic_word`]-shaped name.
pub fn word_topic(word: &str) -> Option<usize> {
    let rest = word.strip_prefix('t')?;
    let split = rest.find('w')?;
    rest[..split].parse().ok()
}

/// Generates documents that each sample all tokens from one of two disjoint
/// topic vocabularies, alternating topics deterministically from the seed.
pub fn two_topic_corpus(params: &TwoTopicParams) -> Vec<Document> {
    assert!(params.words_per_topic >= 1 && params.tokens_per_document >= 2);
    let mut docs = Vec::with_capacity(params.documents);
    for d in 0..params.documents {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::mix(params.rng_seed, d as u64));
        let topic = d % 2;
        let tokens = (0..params.tokens_per_document)
            .map(|_| topic_word(topic, rng.random_range(0..params.words_per_topic)))
            .collect();
        docs.push(Document::general(tokens));
    }
    docs
}

/// Settings for [`trend_data`]. Each topic owns disjoint tags and content
/// words; its tracks are annotated with the topic's tags at graded
/// probabilities, so within-topic co-occurrence counts have a strict order
/// for rank correlation to recover.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendParams {
    pub topics: usize,
    pub tags_per_topic: usize,
    pub words_per_topic: usize,
    pub tracks_per_topic: usize,
    pub artists_per_topic: usize,
    pub review_tokens_per_track: usize,
    pub general_documents: usize,
    pub general_tokens_per_document: usize,
    pub rng_seed: u64,
}

impl Default for TrendParams {
    fn default() -> Self {
        TrendParams {
            topics: 4,
            tags_per_topic: 3,
            words_per_topic: 15,
            tracks_per_topic: 50,
            artists_per_topic: 5,
            review_tokens_per_track: 20,
            general_documents: 1500,
            general_tokens_per_document: 15,
            rng_seed: 42,
        }
    }
}

/// Tag `i` of topic `t` is named `g{t}tag{i}` — a normalized single token.
pub fn topic_tag(topic: usize, tag: usize) -> String {
    format!("g{topic}tag{tag}")
}

/// A generated trend dataset: track-cluster records with their built
/// documents, the aligned (track_id, tag) annotation pairs, and
/// topic-agnostic general documents that mention tags and content words of
/// every topic at random.
#[derive(Debug, Clone)]
pub struct TrendData {
    pub records: Vec<TrackClusterRecord>,
    pub clusters: Vec<Document>,
    pub general: Vec<Document>,
    pub annotations: Vec<(String, String)>,
}

/// Probability that a track carries its topic's `i`-th tag: the first tag
/// always, later tags progressively less often, producing graded
/// co-occurrence counts.
fn tag_probability(i: usize) -> f64 {
    match i {
        0 => 1.0,
        1 => 0.6,
        _ => 0.3 / (i as f64 - 1.0),
    }
}

pub fn trend_data(params: &TrendParams) -> TrendData {
    assert!(
        params.topics >= 2 && params.tags_per_topic >= 2 && params.words_per_topic >= 2,
        "trend data needs at least two topics, tags, and words"
    );
    let mut records = Vec::new();
    let mut clusters = Vec::new();
    let mut annotations = Vec::new();

    for topic in 0..params.topics {
        let words: Vec<String> = (0..params.words_per_topic)
            .map(|w| topic_word(topic, w))
            .collect();
        for t in 0..params.tracks_per_topic {
            let track_index = topic * params.tracks_per_topic + t;
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed::mix(params.rng_seed, 1_000_000 + track_index as u64));
            let track_id = format!("TR{track_index:05}");
            let artist_id = format!("AR{topic}{:02}", t % params.artists_per_topic);
            let mut tags = Vec::new();
            for i in 0..params.tags_per_topic {
                if rng.random::<f64>() < tag_probability(i) {
                    tags.push(topic_tag(topic, i));
                }
            }
            let review: String = (0..params.review_tokens_per_track)
                .map(|_| words.choose(&mut rng).expect("non-empty words").as_str())
                .collect::<Vec<_>>()
                .join(" ");
            let record = TrackClusterRecord::new(track_id.clone(), artist_id, tags.clone(), vec![review])
                .expect("generated record is valid");
            for tag in &tags {
                annotations.push((track_id.clone(), tag.clone()));
            }
            clusters.push(build_cluster_document(&record));
            records.push(record);
        }
    }

    // General documents mix every topic's words and tags uniformly, so they
    // put the tags in the vocabulary without topical co-occurrence signal.
    let mut pool: Vec<String> = Vec::new();
    for topic in 0..params.topics {
        pool.extend((0..params.words_per_topic).map(|w| topic_word(topic, w)));
        pool.extend((0..params.tags_per_topic).map(|i| topic_tag(topic, i)));
    }
    let general = (0..params.general_documents)
        .map(|d| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed::mix(params.rng_seed, 2_000_000 + d as u64));
            let tokens = (0..params.general_tokens_per_document)
                .map(|_| pool.choose(&mut rng).expect("non-empty pool").clone())
                .collect();
            Document::general(tokens)
        })
        .collect();

    TrendData {
        records,
        clusters,
        general,
        annotations,
    }
}
