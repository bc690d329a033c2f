//! CBOW word2vec trainer with negative sampling.
//!
//! The model predicts a target word from the mean of its context words'
//! input vectors, scoring against output vectors with the negative-sampling
//! objective L = −log σ(v′ₒ·h) − Σₖ log σ(−v′ₙₖ·h). Context windows are
//! bounded at document edges, so track clusters never leak co-occurrence into
//! their neighbors. Multi-worker training updates shared matrices without
//! locks; single-worker runs are bit-deterministic.

mod hogwild;
mod negative;

pub use hogwild::SharedMatrix;
pub use negative::{build_negative_table, NegativeTable};

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    build_vocabulary, subsample_keep_probability, CorpusStats, Document, Vocabulary,
};
use crate::embedding::EmbeddingStore;
use crate::seed;

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("corpus is empty after vocabulary filtering (min_count={0})")]
    EmptyCorpus(u32),
    #[error("negative table size {size} is smaller than the vocabulary ({vocab_size} words)")]
    TableTooSmall { size: usize, vocab_size: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
}

/// Training hyperparameters. Defaults follow the reference configuration:
/// 100-dimensional vectors, window 15, five epochs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: u32,
    pub epochs: u32,
    /// Negative samples per step (K).
    pub negatives: u32,
    pub initial_lr: f64,
    pub min_lr: f64,
    pub negative_table_size: usize,
    pub unigram_power: f64,
    pub workers: usize,
    pub rng_seed: u64,
    /// Vocabulary min-count filter applied when training ingests a corpus.
    pub min_count: u32,
    /// Frequent-word subsampling threshold; disabled when None.
    pub subsample_threshold: Option<f64>,
    /// Sample the effective half-window uniformly from 1..=window per
    /// position (the reference convention); false pins it at `window`.
    pub dynamic_window: bool,
    /// Report tokens/sec, learning rate, and mean loss to stderr during
    /// training.
    pub log_progress: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            window: 15,
            epochs: 5,
            negatives: 5,
            initial_lr: 0.025,
            min_lr: 0.025 * 1e-4,
            negative_table_size: 10_000_000,
            unigram_power: 0.75,
            workers: 1,
            rng_seed: 42,
            min_count: 5,
            subsample_threshold: None,
            dynamic_window: true,
            log_progress: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let fail = |msg: String| Err(TrainError::InvalidConfig(msg));
        if self.dim < 1 {
            return fail("dim must be at least 1".into());
        }
        if self.window < 1 {
            return fail("window must be at least 1".into());
        }
        if self.epochs < 1 {
            return fail("epochs must be at least 1".into());
        }
        if self.negatives < 1 {
            return fail("negatives must be at least 1".into());
        }
        if !(self.min_lr > 0.0 && self.min_lr <= self.initial_lr) {
            return fail(format!(
                "learning rates must satisfy 0 < min_lr <= initial_lr (got {} and {})",
                self.min_lr, self.initial_lr
            ));
        }
        if self.workers < 1 {
            return fail("workers must be at least 1".into());
        }
        if self.min_count < 1 {
            return fail("min_count must be at least 1".into());
        }
        if let Some(t) = self.subsample_threshold {
            if !(t > 0.0 && t <= 1.0) {
                return fail(format!("subsample threshold must lie in (0, 1], got {t}"));
            }
        }
        if !self.unigram_power.is_finite() {
            return fail("unigram power must be finite".into());
        }
        Ok(())
    }
}

/// The trainable CBOW model: a vocabulary plus input (context) and output
/// (scoring) weight matrices, both V×D. Updates go through [`SharedMatrix`]
/// so workers can train concurrently on one instance.
pub struct EmbeddingModel {
    vocab: Vocabulary,
    input: SharedMatrix,
    output: SharedMatrix,
}

impl EmbeddingModel {
    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.input.cols()
    }

    pub fn input(&self) -> &SharedMatrix {
        &self.input
    }

    pub fn output(&self) -> &SharedMatrix {
        &self.output
    }

    /// Snapshot of the input vectors as a queryable store (interop f32
    /// precision). Queries use input vectors only.
    pub fn to_store(&self) -> EmbeddingStore {
        Self::matrix_store(&self.vocab, &self.input)
    }

    /// Snapshot of the output (scoring) vectors; persisted in full
    /// checkpoints but not part of the interop format.
    pub fn outputs_store(&self) -> EmbeddingStore {
        Self::matrix_store(&self.vocab, &self.output)
    }

    fn matrix_store(vocab: &Vocabulary, matrix: &SharedMatrix) -> EmbeddingStore {
        let data: Vec<f32> = matrix.to_vec().into_iter().map(|x| x as f32).collect();
        EmbeddingStore::new(vocab.words().to_vec(), matrix.cols(), data)
            .expect("vocabulary words are unique and dimensions agree")
    }

    /// True when every weight in both matrices is finite.
    pub fn all_finite(&self) -> bool {
        self.input.to_vec().iter().all(|x| x.is_finite())
            && self.output.to_vec().iter().all(|x| x.is_finite())
    }
}

/// Initializes input vectors i.i.d. uniform in [−0.5/dim, +0.5/dim) from the
/// seed and output vectors to zero. Deterministic given the seed.
pub fn init_model(vocab: Vocabulary, config: &TrainConfig) -> EmbeddingModel {
    let bound = 0.5 / config.dim as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let input = SharedMatrix::from_fn(vocab.len(), config.dim, |_, _| {
        rng.random_range(-bound..bound)
    });
    let output = SharedMatrix::zeros(vocab.len(), config.dim);
    EmbeddingModel {
        vocab,
        input,
        output,
    }
}

/// Linearly decayed learning rate, clamped below at min_lr.
pub fn learning_rate(config: &TrainConfig, progress: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&progress));
    (config.initial_lr * (1.0 - progress)).max(config.min_lr)
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Numerically stable −ln σ(x) = softplus(−x).
#[inline]
fn neg_log_sigmoid(x: f64) -> f64 {
    (-x).max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Per-worker reusable buffers.
struct Scratch {
    doc_words: Vec<usize>,
    retained: Vec<usize>,
    context: Vec<usize>,
    negatives: Vec<usize>,
    sigmas: Vec<f64>,
    h: Vec<f64>,
    e: Vec<f64>,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        Scratch {
            doc_words: Vec::new(),
            retained: Vec::new(),
            context: Vec::new(),
            negatives: Vec::new(),
            sigmas: Vec::new(),
            h: vec![0.0; dim],
            e: vec![0.0; dim],
        }
    }
}

/// Draws up to `k` negatives, resampling collisions with the target at most
/// 100 times each; a slot whose draws always collide is dropped so degenerate
/// near-single-word corpora cannot loop forever.
fn sample_negatives<R: Rng + ?Sized>(
    table: &NegativeTable,
    target: usize,
    k: u32,
    rng: &mut R,
    out: &mut Vec<usize>,
) {
    out.clear();
    for _ in 0..k {
        for _attempt in 0..100 {
            let candidate = table.sample(rng);
            if candidate != target {
                out.push(candidate);
                break;
            }
        }
    }
}

/// One CBOW negative-sampling SGD step against explicit negatives, updating
/// the model in place and returning the pre-update loss.
///
/// All sigmoids are evaluated against the pre-step weights and every update
/// applied afterwards, so the step is exactly one SGD step on the sampled
/// loss — including when a negative is drawn twice or a context word repeats.
fn cbow_step_core(
    input: &SharedMatrix,
    output: &SharedMatrix,
    context: &[usize],
    target: usize,
    negatives: &[usize],
    lr: f64,
    h: &mut [f64],
    e: &mut [f64],
    sigmas: &mut Vec<f64>,
) -> f64 {
    // h = mean of context input vectors.
    h.fill(0.0);
    for &c in context {
        input.accumulate_row(c, 1.0, h);
    }
    let inv_context = 1.0 / context.len() as f64;
    for x in h.iter_mut() {
        *x *= inv_context;
    }

    // Forward pass on the pre-update output rows.
    let dot_target = output.dot_row(target, h);
    let sigma_target = sigmoid(dot_target);
    let mut loss = neg_log_sigmoid(dot_target);
    sigmas.clear();
    for &n in negatives {
        let dot = output.dot_row(n, h);
        sigmas.push(sigmoid(dot));
        loss += neg_log_sigmoid(-dot);
    }

    // Error signal e = (1−σₒ)·v′ₒ − Σ σₙ·v′ₙ, read before any update.
    let residual_target = 1.0 - sigma_target;
    e.fill(0.0);
    output.accumulate_row(target, residual_target, e);
    for (i, &n) in negatives.iter().enumerate() {
        output.accumulate_row(n, -sigmas[i], e);
    }

    // Output updates: +lr·(1−σₒ)·h to the target, −lr·σₙ·h to each negative.
    output.axpy_row(target, lr * residual_target, h);
    for (i, &n) in negatives.iter().enumerate() {
        output.axpy_row(n, -lr * sigmas[i], h);
    }
    // Each context position gets lr/|context| times the error signal.
    let input_scale = lr * inv_context;
    for &c in context {
        input.axpy_row(c, input_scale, e);
    }
    loss
}

/// [`cbow_step_core`] with caller-chosen negatives and fresh buffers. The
/// primary entry point for gradient verification.
pub fn cbow_step_with_negatives(
    model: &EmbeddingModel,
    context: &[usize],
    target: usize,
    negatives: &[usize],
    lr: f64,
) -> f64 {
    let v = model.vocab.len();
    assert!(!context.is_empty(), "context must be non-empty");
    assert!(lr > 0.0, "learning rate must be positive");
    assert!(target < v, "target index out of range");
    assert!(context.iter().all(|&c| c < v), "context index out of range");
    assert!(
        negatives.iter().all(|&n| n < v),
        "negative index out of range"
    );
    let dim = model.dim();
    let mut h = vec![0.0; dim];
    let mut e = vec![0.0; dim];
    let mut sigmas = Vec::with_capacity(negatives.len());
    cbow_step_core(
        &model.input,
        &model.output,
        context,
        target,
        negatives,
        lr,
        &mut h,
        &mut e,
        &mut sigmas,
    )
}

/// One CBOW step sampling `k` negatives from the table (collisions with the
/// target resampled). Returns the pre-update loss.
pub fn cbow_step<R: Rng + ?Sized>(
    model: &EmbeddingModel,
    context: &[usize],
    target: usize,
    table: &NegativeTable,
    k: u32,
    lr: f64,
    rng: &mut R,
) -> f64 {
    let mut negatives = Vec::with_capacity(k as usize);
    sample_negatives(table, target, k, rng, &mut negatives);
    cbow_step_with_negatives(model, context, target, &negatives, lr)
}

/// Maps a document to vocabulary indices, dropping out-of-vocabulary tokens.
fn vocab_indices(doc: &Document, vocab: &Vocabulary, out: &mut Vec<usize>) {
    out.clear();
    out.extend(doc.tokens.iter().filter_map(|t| vocab.index_of(t)));
}

/// Applies frequent-word subsampling to a word-index sequence.
fn subsample_into<R: Rng + ?Sized>(
    words: &[usize],
    vocab: &Vocabulary,
    threshold: Option<f64>,
    rng: &mut R,
    out: &mut Vec<usize>,
) {
    out.clear();
    match threshold {
        None => out.extend_from_slice(words),
        Some(t) => {
            for &w in words {
                let keep = subsample_keep_probability(vocab.count(w), vocab.total_tokens(), t);
                if keep >= 1.0 || rng.random::<f64>() < keep {
                    out.push(w);
                }
            }
        }
    }
}

/// Walks every retained position of one document, draws the half-window, and
/// invokes `visit(rng, target_word, context_words)` for positions with a
/// non-empty context. The context never extends past the document bounds.
fn visit_training_pairs<R, F>(
    retained: &[usize],
    window: u32,
    dynamic: bool,
    rng: &mut R,
    context_buf: &mut Vec<usize>,
    mut visit: F,
) where
    R: Rng + ?Sized,
    F: FnMut(&mut R, usize, &[usize]),
{
    let len = retained.len();
    for pos in 0..len {
        let b = if dynamic {
            rng.random_range(1..=window) as usize
        } else {
            window as usize
        };
        let lo = pos.saturating_sub(b);
        let hi = (pos + b).min(len - 1);
        context_buf.clear();
        context_buf.extend_from_slice(&retained[lo..pos]);
        context_buf.extend_from_slice(&retained[pos + 1..=hi]);
        if context_buf.is_empty() {
            continue;
        }
        visit(rng, retained[pos], context_buf);
    }
}

/// One (target, context) pair the trainer would visit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingPair {
    /// Position of the source document in the corpus.
    pub document: usize,
    /// Vocabulary index of the prediction target.
    pub target: usize,
    /// Vocabulary indices of the context words.
    pub context: Vec<usize>,
}

/// Enumerates the (document, target, context) pairs one single-worker epoch
/// visits, through the same filtering, subsampling, and windowing code path
/// as [`train`], without touching any weights. Useful for corpus debugging
/// and for verifying that context windows never cross document boundaries.
pub fn plan_training_pairs(
    corpus: &[Document],
    config: &TrainConfig,
) -> Result<Vec<TrainingPair>, TrainError> {
    config.validate()?;
    let vocab = build_vocabulary(corpus, config.min_count)
        .map_err(|_| TrainError::EmptyCorpus(config.min_count))?;
    let mut rng = epoch_rng(config.rng_seed, 0, 0);
    let mut pairs = Vec::new();
    let mut scratch = Scratch::new(config.dim);
    for (d, doc) in corpus.iter().enumerate() {
        vocab_indices(doc, &vocab, &mut scratch.doc_words);
        if scratch.doc_words.is_empty() {
            continue;
        }
        subsample_into(
            &scratch.doc_words,
            &vocab,
            config.subsample_threshold,
            &mut rng,
            &mut scratch.retained,
        );
        visit_training_pairs(
            &scratch.retained,
            config.window,
            config.dynamic_window,
            &mut rng,
            &mut scratch.context,
            |_rng, target, context| {
                pairs.push(TrainingPair {
                    document: d,
                    target,
                    context: context.to_vec(),
                });
            },
        );
    }
    Ok(pairs)
}

fn epoch_rng(rng_seed: u64, epoch: u64, worker: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed::mix(seed::mix(rng_seed, epoch), worker as u64))
}

const REPORT_EVERY_STEPS: u64 = 100_000;

fn atomic_f64_add(cell: &AtomicU64, x: f64) {
    let mut current = cell.load(Ordering::Relaxed);
    loop {
        let next = (f64::from_bits(current) + x).to_bits();
        match cell.compare_exchange_weak(current, next, Ordering::Relaxed, Ordering::Relaxed) {
            Ok(_) => return,
            Err(actual) => current = actual,
        }
    }
}

/// Shared training progress: drives learning-rate decay and stderr reporting.
struct Progress {
    total_tokens: u64,
    tokens: AtomicU64,
    steps: AtomicU64,
    window_steps: AtomicU64,
    window_loss: AtomicU64,
    start: Instant,
    log: bool,
}

impl Progress {
    fn new(total_tokens: u64, log: bool) -> Self {
        Progress {
            total_tokens: total_tokens.max(1),
            tokens: AtomicU64::new(0),
            steps: AtomicU64::new(0),
            window_steps: AtomicU64::new(0),
            window_loss: AtomicU64::new(0f64.to_bits()),
            start: Instant::now(),
            log,
        }
    }

    /// Fraction of the full training run already processed, in [0, 1].
    fn fraction(&self) -> f64 {
        (self.tokens.load(Ordering::Relaxed) as f64 / self.total_tokens as f64).min(1.0)
    }

    fn record_document(&self, doc_tokens: u64, doc_steps: u64, doc_loss: f64, lr: f64) {
        self.tokens.fetch_add(doc_tokens, Ordering::Relaxed);
        if doc_steps == 0 {
            return;
        }
        self.window_steps.fetch_add(doc_steps, Ordering::Relaxed);
        atomic_f64_add(&self.window_loss, doc_loss);
        let before = self.steps.fetch_add(doc_steps, Ordering::Relaxed);
        let after = before + doc_steps;
        if self.log && before / REPORT_EVERY_STEPS != after / REPORT_EVERY_STEPS {
            let steps = self.window_steps.swap(0, Ordering::Relaxed);
            let loss = f64::from_bits(self.window_loss.swap(0f64.to_bits(), Ordering::Relaxed));
            let elapsed = self.start.elapsed().as_secs_f64().max(1e-9);
            let tokens = self.tokens.load(Ordering::Relaxed);
            eprintln!(
                "[train] {after} steps | lr {lr:.6} | mean loss {:.4} | {:.0} tokens/s",
                loss / steps.max(1) as f64,
                tokens as f64 / elapsed,
            );
        }
    }

    fn finish(&self) {
        if self.log {
            let elapsed = self.start.elapsed().as_secs_f64().max(1e-9);
            let tokens = self.tokens.load(Ordering::Relaxed);
            eprintln!(
                "[train] done: {} steps over {} tokens in {:.1}s ({:.0} tokens/s)",
                self.steps.load(Ordering::Relaxed),
                tokens,
                elapsed,
                tokens as f64 / elapsed,
            );
        }
    }
}

/// Trains a CBOW model over the corpus: builds the vocabulary (min_count
/// filter), initializes the model from the seed, and runs `epochs` passes
/// with `workers` lock-free workers sharding documents round-robin.
/// Single-worker training is bit-deterministic for a fixed (corpus, config).
pub fn train(corpus: &[Document], config: &TrainConfig) -> Result<EmbeddingModel, TrainError> {
    config.validate()?;
    let vocab = build_vocabulary(corpus, config.min_count)
        .map_err(|_| TrainError::EmptyCorpus(config.min_count))?;
    let table = build_negative_table(&vocab, config.unigram_power, config.negative_table_size)?;
    let model = init_model(vocab, config);
    let progress = Progress::new(
        model.vocab.total_tokens() * u64::from(config.epochs),
        config.log_progress,
    );
    std::thread::scope(|scope| {
        for worker in 0..config.workers {
            let model = &model;
            let table = &table;
            let progress = &progress;
            scope.spawn(move || worker_loop(model, corpus, table, config, worker, progress));
        }
    });
    progress.finish();
    Ok(model)
}

fn worker_loop(
    model: &EmbeddingModel,
    corpus: &[Document],
    table: &NegativeTable,
    config: &TrainConfig,
    worker: usize,
    progress: &Progress,
) {
    let mut scratch = Scratch::new(model.dim());
    for epoch in 0..u64::from(config.epochs) {
        let mut rng = epoch_rng(config.rng_seed, epoch, worker);
        for (d, doc) in corpus.iter().enumerate() {
            if d % config.workers != worker {
                continue;
            }
            vocab_indices(doc, &model.vocab, &mut scratch.doc_words);
            if scratch.doc_words.is_empty() {
                continue;
            }
            let lr = learning_rate(config, progress.fraction());
            subsample_into(
                &scratch.doc_words,
                &model.vocab,
                config.subsample_threshold,
                &mut rng,
                &mut scratch.retained,
            );
            let mut doc_loss = 0.0;
            let mut doc_steps = 0u64;
            visit_training_pairs(
                &scratch.retained,
                config.window,
                config.dynamic_window,
                &mut rng,
                &mut scratch.context,
                |rng, target, context| {
                    sample_negatives(table, target, config.negatives, rng, &mut scratch.negatives);
                    doc_loss += cbow_step_core(
                        &model.input,
                        &model.output,
                        context,
                        target,
                        &scratch.negatives,
                        lr,
                        &mut scratch.h,
                        &mut scratch.e,
                        &mut scratch.sigmas,
                    );
                    doc_steps += 1;
                },
            );
            progress.record_document(scratch.doc_words.len() as u64, doc_steps, doc_loss, lr);
        }
    }
}

/// Metadata sidecar stored next to a saved model: the exact configuration
/// plus corpus statistics, for the evaluation report's size columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub corpus_label: String,
    pub config: TrainConfig,
    pub corpus: CorpusStats,
    pub unique_words: usize,
}

impl ModelMetadata {
    /// `<model path>.meta.json`
    pub fn sidecar_path(model_path: &Path) -> PathBuf {
        let mut name = model_path.as_os_str().to_owned();
        name.push(".meta.json");
        PathBuf::from(name)
    }

    pub fn save_beside(&self, model_path: &Path) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(self).expect("metadata serializes");
        std::fs::write(Self::sidecar_path(model_path), json + "\n")
    }

    /// Loads the sidecar if present; Ok(None) when the model has none.
    pub fn load_beside(model_path: &Path) -> std::io::Result<Option<Self>> {
        let path = Self::sidecar_path(model_path);
        if !path.exists() {
            return Ok(None);
        }
        let data = std::fs::read_to_string(path)?;
        serde_json::from_str(&data)
            .map(Some)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}
