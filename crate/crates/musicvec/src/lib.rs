//! Word embeddings for music: trains CBOW vectors with negative sampling on a
//! mix of general text and track-cluster documents (tags, artist and track
//! ids, review words shuffled together), then measures how well tag/tag
//! similarities in the learned space reproduce tag co-occurrence statistics.
//!
//! The pipeline, end to end:
//!
//! 1. [`corpus`] — tokenization, track-cluster ingestion, shuffle
//!    augmentation, vocabulary construction, processed-corpus caching.
//! 2. [`trainer`] — lock-free multi-worker CBOW training with a unigram^0.75
//!    negative-sampling table and linear learning-rate decay.
//! 3. [`embedding`] — the read-only vector store, cosine similarity queries,
//!    and text/binary serialization.
//! 4. [`eval`] — tag co-occurrence ground truth, Spearman and nDCG@k scoring.
//! 5. [`projection`] — exact t-SNE for 2-D visualization of selected words.
//!
//! [`synthetic`] generates small self-checking corpora used by the
//! integration suite and by `gen-synthetic` on the command line.

pub mod corpus;
pub mod embedding;
pub mod eval;
pub mod projection;
mod seed;
pub mod synthetic;
pub mod trainer;

pub use corpus::{
    build_cluster_document, build_vocabulary, merge_corpora, tokenize, CorpusConfig, CorpusError,
    CorpusMix, Document, DocumentKind, TrackClusterRecord, Vocabulary,
};
pub use embedding::{EmbeddingError, EmbeddingFormat, EmbeddingStore};
pub use eval::{
    build_cooccurrence, evaluate_embedding, EvalError, EvalOptions, EvaluationReport, GroundTruth,
    TagAnnotationSet, TestSetMetrics,
};
pub use projection::{tsne_project, Projection, ProjectionError, TsneConfig};
pub use trainer::{train, EmbeddingModel, ModelMetadata, TrainConfig, TrainError};
