//! Command-line front end: corpus building, CBOW training, tag-similarity
//! evaluation, neighbor queries, and 2-D projection.
//!
//! Exit codes: 0 success, 1 usage or configuration problem, 2 unreadable or
//! invalid data. Commands that write files also write a
//! `<output>.manifest.json` with every parameter fully resolved.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use musicvec::corpus::{
    self, augment_corpus, build_cluster_document, merge_corpora, CorpusConfig, CorpusError,
    CorpusMix, CorpusStats, Document,
};
use musicvec::embedding::{self, EmbeddingError, EmbeddingFormat};
use musicvec::eval::{
    build_cooccurrence, evaluate_with, EvalError, EvalOptions, EvaluationReport, GroundTruth,
    TagAnnotationSet,
};
use musicvec::projection::{tsne_project, ProjectionError, TsneConfig};
use musicvec::synthetic::{trend_data, two_topic_corpus, TrendParams, TwoTopicParams};
use musicvec::trainer::{train, ModelMetadata, TrainConfig, TrainError};

#[derive(Parser)]
#[command(
    name = "musicvec",
    version,
    about = "Train, evaluate, query, and project word embeddings for music"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// TOML config file; explicit command-line flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for every random choice (shuffles, init, sampling, t-SNE)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for training
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Chattier reporting on standard error
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize raw inputs, expand track records into shuffled cluster
    /// documents, and cache the processed corpus
    BuildCorpus(BuildCorpusArgs),
    /// Train CBOW word embeddings with negative sampling
    Train(TrainArgs),
    /// Score a model's tag similarities against tag co-occurrence
    Eval(EvalArgs),
    /// Print a word's nearest neighbors by cosine similarity
    Query(QueryArgs),
    /// Project words into 2-D with t-SNE and write plot data
    Project(ProjectArgs),
    /// Generate synthetic corpora for experiments and smoke tests
    GenSynthetic(GenSyntheticArgs),
}

#[derive(Args)]
struct BuildCorpusArgs {
    /// General text file, one document per line; repeatable
    #[arg(long = "corpus", value_name = "FILE")]
    corpus: Vec<PathBuf>,
    /// Track record JSONL file; repeatable
    #[arg(long = "tracks", value_name = "FILE")]
    tracks: Vec<PathBuf>,
    /// Shuffled copies added per track-cluster document
    #[arg(long, value_name = "N")]
    augment_copies: Option<u32>,
    /// Output path for the processed corpus cache
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// General text file, one document per line; repeatable
    #[arg(long = "corpus", value_name = "FILE")]
    corpus: Vec<PathBuf>,
    /// Track record JSONL file; repeatable
    #[arg(long = "tracks", value_name = "FILE")]
    tracks: Vec<PathBuf>,
    /// Processed corpus cache from build-corpus, read verbatim; repeatable
    #[arg(long = "processed", value_name = "FILE")]
    processed: Vec<PathBuf>,
    /// Embedding dimensionality
    #[arg(long)]
    dim: Option<usize>,
    /// Maximum half-window of context words around a target
    #[arg(long)]
    window: Option<u32>,
    /// Passes over the corpus
    #[arg(long)]
    epochs: Option<u32>,
    /// Negative samples per training step
    #[arg(long)]
    negatives: Option<u32>,
    /// Initial learning rate; the decay floor is rescaled to lr/10000
    #[arg(long)]
    lr: Option<f64>,
    /// Drop words with fewer total occurrences than this
    #[arg(long)]
    min_count: Option<u32>,
    /// Frequent-word subsampling threshold, e.g. 1e-5; 0 disables
    #[arg(long)]
    subsample: Option<f64>,
    /// Shuffled copies added per track-cluster document
    #[arg(long, value_name = "N")]
    augment_copies: Option<u32>,
    /// Corpus label recorded in the model metadata
    #[arg(long)]
    label: Option<String>,
    /// Model output path; .txt writes text vectors, .bin the binary format
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Trained model (.txt or .bin)
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Annotations file: one "track<TAB>tag" pair per line
    #[arg(long, value_name = "FILE")]
    annotations: PathBuf,
    /// Restrict the tag universe to the tags listed in this file
    #[arg(long, value_name = "FILE")]
    tags: Option<PathBuf>,
    /// Keep only the N most frequently used tags of the universe
    #[arg(long, value_name = "N")]
    top_tags: Option<usize>,
    /// Ranking cutoff for nDCG
    #[arg(long)]
    k: Option<usize>,
    /// Ground-truth relevance definition
    #[arg(long, value_enum)]
    ground_truth: Option<GroundTruthArg>,
    /// Also compute one Spearman rho pooled over all (query, candidate) pairs
    #[arg(long)]
    pooled: bool,
    /// Write the machine-readable TSV report here
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GroundTruthArg {
    /// Raw co-occurrence counts
    RawCounts,
    /// Positive pointwise mutual information
    Ppmi,
    /// Cosine of track-incidence vectors
    IncidenceCosine,
}

impl From<GroundTruthArg> for GroundTruth {
    fn from(arg: GroundTruthArg) -> GroundTruth {
        match arg {
            GroundTruthArg::RawCounts => GroundTruth::RawCounts,
            GroundTruthArg::Ppmi => GroundTruth::Ppmi,
            GroundTruthArg::IncidenceCosine => GroundTruth::IncidenceCosine,
        }
    }
}

#[derive(Args)]
struct QueryArgs {
    /// Trained model (.txt or .bin)
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Query word
    #[arg(long)]
    word: String,
    /// Number of neighbors to print
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Only rank candidate words listed in this file
    #[arg(long, value_name = "FILE")]
    restrict_file: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectArgs {
    /// Trained model (.txt or .bin)
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Words to project, one per line (default: the whole vocabulary)
    #[arg(long, value_name = "FILE")]
    words_file: Option<PathBuf>,
    /// Target perplexity of the neighbor distributions
    #[arg(long)]
    perplexity: Option<f64>,
    /// Gradient-descent iterations
    #[arg(long)]
    iterations: Option<u32>,
    /// Output TSV: word, x, y
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct GenSyntheticArgs {
    /// Which dataset family to generate
    #[arg(long, value_enum)]
    kind: SyntheticKind,
    /// Document count for the two-topic corpus
    #[arg(long)]
    documents: Option<usize>,
    /// Directory the files are written into (created if missing)
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SyntheticKind {
    /// One plain-text corpus whose documents draw from two disjoint
    /// vocabularies
    TwoTopic,
    /// Track records, annotations, and a general corpus with graded tag
    /// co-occurrence per topic
    Trend,
}

/// On-disk configuration. Every section is optional and individually
/// overridden by explicit command-line flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    train: TrainConfig,
    corpus: CorpusConfig,
    eval: EvalOptions,
    projection: TsneConfig,
}

enum CliError {
    /// Bad invocation or configuration: exit code 1.
    Usage(String),
    /// Unreadable or invalid data: exit code 2.
    Data(String),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn data(msg: impl Into<String>) -> CliError {
    CliError::Data(msg.into())
}

/// Data error with the path prepended, for errors that don't carry it.
fn data_at(path: &Path, e: impl std::fmt::Display) -> CliError {
    data(format!("{}: {e}", path.display()))
}

fn corpus_error(path: &Path, e: CorpusError) -> CliError {
    match e {
        // Malformed already names the file and line.
        CorpusError::Malformed { .. } => data(e.to_string()),
        _ => data_at(path, e),
    }
}

fn eval_error(path: &Path, e: EvalError) -> CliError {
    match e {
        EvalError::Malformed { .. } => data(e.to_string()),
        _ => data_at(path, e),
    }
}

fn embedding_error(path: &Path, e: EmbeddingError) -> CliError {
    match e {
        // The only way to hit this is a bad --model/--out extension.
        EmbeddingError::UnknownFormat(_) => usage(e.to_string()),
        _ => data_at(path, e),
    }
}

fn train_error(e: TrainError) -> CliError {
    match e {
        TrainError::EmptyCorpus(_) => data(e.to_string()),
        _ => usage(e.to_string()),
    }
}

fn projection_error(e: ProjectionError) -> CliError {
    match e {
        ProjectionError::InvalidConfig(_) => usage(e.to_string()),
        _ => data(e.to_string()),
    }
}

/// Global flags plus the parsed config file: everything a subcommand needs
/// to resolve its final parameters.
struct Context {
    file: FileConfig,
    config_path: Option<PathBuf>,
    seed: Option<u64>,
    workers: Option<usize>,
    verbose: bool,
}

impl Context {
    fn corpus_config(&self, augment_copies: Option<u32>) -> CorpusConfig {
        let mut c = self.file.corpus.clone();
        if let Some(n) = augment_copies {
            c.augment_copies = n;
        }
        if let Some(s) = self.seed {
            c.rng_seed = s;
        }
        c
    }

    fn train_config(&self, args: &TrainArgs) -> TrainConfig {
        let mut c = self.file.train.clone();
        if let Some(v) = args.dim {
            c.dim = v;
        }
        if let Some(v) = args.window {
            c.window = v;
        }
        if let Some(v) = args.epochs {
            c.epochs = v;
        }
        if let Some(v) = args.negatives {
            c.negatives = v;
        }
        if let Some(v) = args.lr {
            c.initial_lr = v;
            c.min_lr = v * 1e-4;
        }
        if let Some(v) = args.min_count {
            c.min_count = v;
        }
        if let Some(v) = args.subsample {
            c.subsample_threshold = (v > 0.0).then_some(v);
        }
        if let Some(v) = self.workers {
            c.workers = v;
        }
        if let Some(v) = self.seed {
            c.rng_seed = v;
        }
        c
    }

    fn eval_options(&self, args: &EvalArgs) -> EvalOptions {
        let mut o = self.file.eval.clone();
        if let Some(k) = args.k {
            o.k = k;
        }
        if let Some(g) = args.ground_truth {
            o.ground_truth = g.into();
        }
        if args.pooled {
            o.pooled_spearman = true;
        }
        o
    }

    fn tsne_config(&self, perplexity: Option<f64>, iterations: Option<u32>) -> TsneConfig {
        let mut c = self.file.projection.clone();
        if let Some(p) = perplexity {
            c.perplexity = p;
        }
        if let Some(i) = iterations {
            c.iterations = i;
        }
        if let Some(s) = self.seed {
            c.rng_seed = s;
        }
        c
    }
}

/// Fully resolved parameters of one run, written as
/// `<primary output>.manifest.json` next to the output it describes.
#[derive(Serialize)]
struct RunManifest {
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    config_file: Option<PathBuf>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    corpus: Option<CorpusConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    train: Option<TrainConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eval: Option<EvalOptions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    projection: Option<TsneConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    synthetic: Option<SyntheticManifest>,
}

impl RunManifest {
    fn new(command: &'static str, ctx: &Context) -> RunManifest {
        RunManifest {
            command,
            config_file: ctx.config_path.clone(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            corpus: None,
            train: None,
            eval: None,
            projection: None,
            synthetic: None,
        }
    }
}

#[derive(Serialize)]
struct SyntheticManifest {
    kind: String,
    rng_seed: u64,
}

fn write_manifest(primary_output: &Path, manifest: &RunManifest) -> Result<PathBuf, CliError> {
    let mut name = primary_output.as_os_str().to_owned();
    name.push(".manifest.json");
    let path = PathBuf::from(name);
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| data_at(&path, e))?;
    Ok(path)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap would exit 2 on usage errors; this tool reserves 2 for
            // data problems and reports usage problems as 1.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match run(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.global.config {
        None => FileConfig::default(),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            toml::from_str(&text)
                .map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?
        }
    };
    let ctx = Context {
        file,
        config_path: cli.global.config,
        seed: cli.global.seed,
        workers: cli.global.workers,
        verbose: cli.global.verbose,
    };
    match cli.command {
        Command::BuildCorpus(args) => build_corpus_cmd(&ctx, &args),
        Command::Train(args) => train_cmd(&ctx, &args),
        Command::Eval(args) => eval_cmd(&ctx, &args),
        Command::Query(args) => query_cmd(&args),
        Command::Project(args) => project_cmd(&ctx, &args),
        Command::GenSynthetic(args) => gen_synthetic_cmd(&ctx, &args),
    }
}

/// Ingested training stream plus the statistics the report columns need.
struct LoadedCorpus {
    docs: Vec<Document>,
    stats: CorpusStats,
    label: String,
}

fn load_inputs(
    general_paths: &[PathBuf],
    track_paths: &[PathBuf],
    processed_paths: &[PathBuf],
    corpus_cfg: &CorpusConfig,
    verbose: bool,
) -> Result<LoadedCorpus, CliError> {
    if general_paths.is_empty() && track_paths.is_empty() && processed_paths.is_empty() {
        return Err(usage(
            "no corpus inputs; pass --corpus, --tracks, or --processed",
        ));
    }
    let mut general = Vec::new();
    for path in general_paths {
        let docs = corpus::read_general_corpus(path).map_err(|e| corpus_error(path, e))?;
        if verbose {
            eprintln!("[corpus] {}: {} documents", path.display(), docs.len());
        }
        general.extend(docs);
    }
    for path in processed_paths {
        let docs = corpus::read_processed_corpus(path).map_err(|e| corpus_error(path, e))?;
        if verbose {
            eprintln!("[corpus] {}: {} cached documents", path.display(), docs.len());
        }
        general.extend(docs);
    }

    let mut records = Vec::new();
    for path in track_paths {
        let batch = corpus::read_track_records(path).map_err(|e| corpus_error(path, e))?;
        if verbose {
            eprintln!("[corpus] {}: {} track records", path.display(), batch.len());
        }
        records.extend(batch);
    }
    let (unique_tracks, unique_artists) = corpus::count_unique_ids(&records);
    let music = if records.is_empty() {
        Vec::new()
    } else {
        let clusters: Vec<Document> = records.iter().map(build_cluster_document).collect();
        augment_corpus(&clusters, corpus_cfg.augment_copies, corpus_cfg.rng_seed)
    };

    let label = match (general.is_empty(), music.is_empty()) {
        (false, false) => "general+music",
        (false, true) => "general",
        (true, false) => "music",
        // Inputs were given but every document was empty; training will
        // reject this with a clearer message than a special case here.
        (true, true) => "empty",
    };
    let docs = merge_corpora(general, music, CorpusMix::Both);
    let stats = CorpusStats::tally(&docs, unique_tracks, unique_artists);
    Ok(LoadedCorpus {
        docs,
        stats,
        label: label.to_string(),
    })
}

fn build_corpus_cmd(ctx: &Context, args: &BuildCorpusArgs) -> Result<(), CliError> {
    let corpus_cfg = ctx.corpus_config(args.augment_copies);
    let loaded = load_inputs(&args.corpus, &args.tracks, &[], &corpus_cfg, ctx.verbose)?;
    corpus::write_processed_corpus(&args.out, &loaded.docs)
        .map_err(|e| corpus_error(&args.out, e))?;

    let mut manifest = RunManifest::new("build-corpus", ctx);
    manifest.inputs = args.corpus.iter().chain(&args.tracks).cloned().collect();
    manifest.outputs = vec![args.out.clone()];
    manifest.corpus = Some(corpus_cfg);
    write_manifest(&args.out, &manifest)?;

    println!(
        "wrote {}: {} documents, {} tokens ({} tracks, {} artists)",
        args.out.display(),
        loaded.stats.documents,
        loaded.stats.tokens,
        loaded.stats.unique_tracks,
        loaded.stats.unique_artists,
    );
    Ok(())
}

fn format_extension(format: EmbeddingFormat) -> &'static str {
    match format {
        EmbeddingFormat::Text => "txt",
        EmbeddingFormat::Binary => "bin",
    }
}

fn train_cmd(ctx: &Context, args: &TrainArgs) -> Result<(), CliError> {
    let format = EmbeddingFormat::from_path(&args.out).map_err(|e| usage(e.to_string()))?;
    let corpus_cfg = ctx.corpus_config(args.augment_copies);
    let train_cfg = ctx.train_config(args);
    let loaded = load_inputs(
        &args.corpus,
        &args.tracks,
        &args.processed,
        &corpus_cfg,
        ctx.verbose,
    )?;
    let label = args.label.clone().unwrap_or(loaded.label);
    if ctx.verbose {
        eprintln!(
            "[train] {} documents, {} tokens; dim {} window {} epochs {} negatives {} lr {} \
             workers {}",
            loaded.stats.documents,
            loaded.stats.tokens,
            train_cfg.dim,
            train_cfg.window,
            train_cfg.epochs,
            train_cfg.negatives,
            train_cfg.initial_lr,
            train_cfg.workers,
        );
    }

    let started = Instant::now();
    let model = train(&loaded.docs, &train_cfg).map_err(train_error)?;
    let store = model.to_store();
    embedding::save(&store, &args.out, format).map_err(|e| embedding_error(&args.out, e))?;
    // Output-side vectors complete the checkpoint; queries only need the
    // input-side file.
    let outputs_path = args
        .out
        .with_extension(format!("outputs.{}", format_extension(format)));
    embedding::save(&model.outputs_store(), &outputs_path, format)
        .map_err(|e| embedding_error(&outputs_path, e))?;

    let metadata = ModelMetadata {
        corpus_label: label,
        config: train_cfg.clone(),
        corpus: loaded.stats.clone(),
        unique_words: store.len(),
    };
    metadata
        .save_beside(&args.out)
        .map_err(|e| data_at(&ModelMetadata::sidecar_path(&args.out), e))?;

    let mut manifest = RunManifest::new("train", ctx);
    manifest.inputs = args
        .corpus
        .iter()
        .chain(&args.tracks)
        .chain(&args.processed)
        .cloned()
        .collect();
    manifest.outputs = vec![
        args.out.clone(),
        outputs_path,
        ModelMetadata::sidecar_path(&args.out),
    ];
    manifest.corpus = Some(corpus_cfg);
    manifest.train = Some(train_cfg);
    write_manifest(&args.out, &manifest)?;

    println!(
        "trained {} words x {} dims in {:.1}s -> {}",
        store.len(),
        store.dim(),
        started.elapsed().as_secs_f64(),
        args.out.display(),
    );
    Ok(())
}

fn eval_cmd(ctx: &Context, args: &EvalArgs) -> Result<(), CliError> {
    let store = embedding::load(&args.model).map_err(|e| embedding_error(&args.model, e))?;
    let mut annotations =
        TagAnnotationSet::from_tsv(&args.annotations).map_err(|e| eval_error(&args.annotations, e))?;
    if let Some(tags_path) = &args.tags {
        let text = fs::read_to_string(tags_path).map_err(|e| data_at(tags_path, e))?;
        let tags: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        annotations = annotations
            .with_universe(tags)
            .map_err(|e| data_at(tags_path, e))?;
    }
    if let Some(n) = args.top_tags {
        annotations = annotations.restrict_to_top(n);
    }
    if annotations.tag_universe().is_empty() {
        return Err(data_at(&args.annotations, "no tags to evaluate"));
    }

    let options = ctx.eval_options(args);
    let cooc = build_cooccurrence(&annotations);
    let mut metrics = evaluate_with(&store, &cooc, &options).map_err(|e| data(e.to_string()))?;
    metrics.label = args
        .annotations
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "test-set".to_string());

    // The model's own metadata supplies the corpus identity columns when the
    // training run left a sidecar next to the model file.
    let sidecar = ModelMetadata::load_beside(&args.model)
        .map_err(|e| data_at(&ModelMetadata::sidecar_path(&args.model), e))?;
    let report = match sidecar {
        Some(meta) => EvaluationReport {
            corpus_label: meta.corpus_label,
            tokens: meta.corpus.tokens,
            unique_words: meta.unique_words,
            unique_tracks: meta.corpus.unique_tracks,
            unique_artists: meta.corpus.unique_artists,
            test_sets: vec![metrics],
        },
        None => EvaluationReport {
            corpus_label: "unknown".to_string(),
            tokens: 0,
            unique_words: store.len(),
            unique_tracks: 0,
            unique_artists: 0,
            test_sets: vec![metrics],
        },
    };
    print!("{}", report.render_table());

    if let Some(report_path) = &args.report {
        fs::write(report_path, report.to_tsv()).map_err(|e| data_at(report_path, e))?;
        let mut manifest = RunManifest::new("eval", ctx);
        manifest.inputs = vec![args.model.clone(), args.annotations.clone()];
        if let Some(t) = &args.tags {
            manifest.inputs.push(t.clone());
        }
        manifest.outputs = vec![report_path.clone()];
        manifest.eval = Some(options);
        write_manifest(report_path, &manifest)?;
        if ctx.verbose {
            eprintln!("[eval] report -> {}", report_path.display());
        }
    }
    Ok(())
}

fn query_cmd(args: &QueryArgs) -> Result<(), CliError> {
    let store = embedding::load(&args.model).map_err(|e| embedding_error(&args.model, e))?;
    let restrict: Option<Vec<String>> = match &args.restrict_file {
        None => None,
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| data_at(path, e))?;
            Some(text.split_whitespace().map(str::to_string).collect())
        }
    };
    let neighbors = store
        .most_similar(&args.word, args.k, restrict.as_deref())
        .map_err(|e| data(e.to_string()))?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (word, cosine) in &neighbors {
        writeln!(out, "{word}\t{cosine:.6}").map_err(|e| data(e.to_string()))?;
    }
    Ok(())
}

fn project_cmd(ctx: &Context, args: &ProjectArgs) -> Result<(), CliError> {
    let store = embedding::load(&args.model).map_err(|e| embedding_error(&args.model, e))?;
    let requested: Vec<String> = match &args.words_file {
        None => store.words().to_vec(),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| data_at(path, e))?;
            text.split_whitespace().map(str::to_string).collect()
        }
    };

    let mut words = Vec::new();
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut missing = 0usize;
    for word in requested {
        if !seen.insert(word.clone()) {
            continue;
        }
        match store.vector_of(&word) {
            Some(v) => {
                words.push(word);
                vectors.push(v.iter().map(|&x| x as f64).collect());
            }
            None => missing += 1,
        }
    }
    if missing > 0 {
        eprintln!("[project] skipped {missing} words missing from the vocabulary");
    }

    let config = ctx.tsne_config(args.perplexity, args.iterations);
    let projection = tsne_project(&vectors, &config).map_err(projection_error)?;
    if ctx.verbose {
        eprintln!(
            "[project] KL divergence {:.4} -> {:.4} over {} iterations",
            projection.initial_kl, projection.final_kl, config.iterations,
        );
    }

    let mut tsv = String::new();
    for (word, point) in words.iter().zip(&projection.points) {
        tsv.push_str(&format!("{word}\t{}\t{}\n", point[0], point[1]));
    }
    fs::write(&args.out, tsv).map_err(|e| data_at(&args.out, e))?;

    let mut manifest = RunManifest::new("project", ctx);
    manifest.inputs = vec![args.model.clone()];
    if let Some(w) = &args.words_file {
        manifest.inputs.push(w.clone());
    }
    manifest.outputs = vec![args.out.clone()];
    manifest.projection = Some(config);
    write_manifest(&args.out, &manifest)?;

    println!("projected {} words -> {}", words.len(), args.out.display());
    Ok(())
}

fn gen_synthetic_cmd(ctx: &Context, args: &GenSyntheticArgs) -> Result<(), CliError> {
    fs::create_dir_all(&args.out_dir).map_err(|e| data_at(&args.out_dir, e))?;
    let seed = ctx.seed.unwrap_or(42);
    match args.kind {
        SyntheticKind::TwoTopic => {
            let params = TwoTopicParams {
                documents: args.documents.unwrap_or(TwoTopicParams::default().documents),
                rng_seed: seed,
                ..TwoTopicParams::default()
            };
            let docs = two_topic_corpus(&params);
            let out = args.out_dir.join("two-topic.txt");
            corpus::write_processed_corpus(&out, &docs).map_err(|e| corpus_error(&out, e))?;

            let mut manifest = RunManifest::new("gen-synthetic", ctx);
            manifest.outputs = vec![out.clone()];
            manifest.synthetic = Some(SyntheticManifest {
                kind: "two-topic".to_string(),
                rng_seed: seed,
            });
            write_manifest(&out, &manifest)?;
            println!("wrote {} ({} documents)", out.display(), docs.len());
        }
        SyntheticKind::Trend => {
            let params = TrendParams {
                rng_seed: seed,
                ..TrendParams::default()
            };
            let dataset = trend_data(&params);

            let general_path = args.out_dir.join("general.txt");
            corpus::write_processed_corpus(&general_path, &dataset.general)
                .map_err(|e| corpus_error(&general_path, e))?;

            let tracks_path = args.out_dir.join("tracks.jsonl");
            let mut jsonl = String::new();
            for record in &dataset.records {
                jsonl.push_str(&serde_json::to_string(record).expect("record serializes"));
                jsonl.push('\n');
            }
            fs::write(&tracks_path, jsonl).map_err(|e| data_at(&tracks_path, e))?;

            let annotations_path = args.out_dir.join("annotations.tsv");
            let mut tsv = String::new();
            for (track, tag) in &dataset.annotations {
                tsv.push_str(&format!("{track}\t{tag}\n"));
            }
            fs::write(&annotations_path, tsv).map_err(|e| data_at(&annotations_path, e))?;

            let anchor = args.out_dir.join("trend");
            let mut manifest = RunManifest::new("gen-synthetic", ctx);
            manifest.outputs = vec![
                general_path.clone(),
                tracks_path.clone(),
                annotations_path.clone(),
            ];
            manifest.synthetic = Some(SyntheticManifest {
                kind: "trend".to_string(),
                rng_seed: seed,
            });
            write_manifest(&anchor, &manifest)?;
            println!(
                "wrote {} ({} records), {} ({} pairs), {} ({} documents)",
                tracks_path.display(),
                dataset.records.len(),
                annotations_path.display(),
                dataset.annotations.len(),
                general_path.display(),
                dataset.general.len(),
            );
        }
    }
    Ok(())
}
