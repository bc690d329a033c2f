//! Embedding evaluation against tag co-occurrence ground truth.
//!
//! Track annotations become a symmetric tag co-occurrence matrix; an
//! embedding is scored per query tag by comparing its cosine ordering of the
//! other tags against the co-occurrence row, with Spearman ρ and nDCG@k
//! averaged over queries.

mod metrics;

pub use metrics::{fractional_ranks, ndcg_at_k, spearman};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_tag, CorpusError};
use crate::embedding::EmbeddingStore;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("only {present} evaluation tags appear in the embedding vocabulary; need at least 2")]
    InsufficientOverlap { present: usize },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Track→tags annotations plus the ordered tag universe the evaluation runs
/// over. Tags are normalized on ingestion; the universe is deduplicated and
/// sorted so tag indices are stable.
#[derive(Debug, Clone, Default)]
pub struct TagAnnotationSet {
    annotations: BTreeMap<String, BTreeSet<String>>,
    tag_universe: Vec<String>,
}

impl TagAnnotationSet {
    /// Builds annotations from (track_id, raw tag) pairs, normalizing tags.
    /// The universe defaults to every distinct tag, sorted.
    pub fn from_pairs<I, S, T>(pairs: I) -> Result<TagAnnotationSet, CorpusError>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: AsRef<str>,
    {
        let mut annotations: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (track, tag) in pairs {
            let tag = normalize_tag(tag.as_ref())?;
            annotations.entry(track.into()).or_default().insert(tag);
        }
        let tag_universe: Vec<String> = annotations
            .values()
            .flatten()
            .cloned()
            .collect::<BTreeSet<String>>()
            .into_iter()
            .collect();
        Ok(TagAnnotationSet {
            annotations,
            tag_universe,
        })
    }

    /// Reads a UTF-8 TSV of `track_id<TAB>tag` lines. Blank lines are
    /// skipped; a tag's internal whitespace (tabs included) normalizes to
    /// underscores.
    pub fn from_tsv(path: &Path) -> Result<TagAnnotationSet, EvalError> {
        let content = std::fs::read_to_string(path)?;
        let mut pairs = Vec::new();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let malformed = |message: String| EvalError::Malformed {
                path: path.display().to_string(),
                line: i + 1,
                message,
            };
            let (track, tag) = line
                .split_once('\t')
                .ok_or_else(|| malformed("expected track_id<TAB>tag".into()))?;
            let track = track.trim();
            if track.is_empty() || track.chars().any(char::is_whitespace) {
                return Err(malformed(format!("invalid track id {track:?}")));
            }
            if normalize_tag(tag).is_err() {
                return Err(malformed("empty tag".into()));
            }
            pairs.push((track.to_string(), tag.to_string()));
        }
        Ok(Self::from_pairs(pairs)?)
    }

    /// Replaces the tag universe with an externally supplied list (an
    /// evaluation tag vocabulary), normalized, deduplicated, and sorted.
    pub fn with_universe<I, S>(mut self, tags: I) -> Result<TagAnnotationSet, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut universe = BTreeSet::new();
        for tag in tags {
            universe.insert(normalize_tag(tag.as_ref())?);
        }
        self.tag_universe = universe.into_iter().collect();
        Ok(self)
    }

    /// Shrinks the universe to the `n` tags annotating the most tracks
    /// (frequency counted after normalization), ties broken alphabetically.
    /// The surviving universe stays sorted.
    pub fn restrict_to_top(mut self, n: usize) -> TagAnnotationSet {
        let mut occurrence: BTreeMap<&String, u64> = BTreeMap::new();
        for tags in self.annotations.values() {
            for tag in tags {
                if self.tag_universe.binary_search(tag).is_ok() {
                    *occurrence.entry(tag).or_insert(0) += 1;
                }
            }
        }
        let mut ranked: Vec<(&String, u64)> = occurrence.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        ranked.truncate(n);
        let mut universe: Vec<String> = ranked.into_iter().map(|(t, _)| t.clone()).collect();
        universe.sort();
        self.tag_universe = universe;
        self
    }

    pub fn tag_universe(&self) -> &[String] {
        &self.tag_universe
    }

    pub fn tracks(&self) -> usize {
        self.annotations.len()
    }

    pub fn tags_of(&self, track: &str) -> Option<&BTreeSet<String>> {
        self.annotations.get(track)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &BTreeSet<String>)> {
        self.annotations.iter()
    }
}

/// Symmetric tag co-occurrence counts over an ordered tag list. Off-diagonal
/// `[i][j]` counts tracks annotated with both tags; the diagonal holds
/// per-tag track counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CooccurrenceMatrix {
    tags: Vec<String>,
    counts: Vec<u64>,
    tracks: u64,
}

impl CooccurrenceMatrix {
    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.tags.len() + j]
    }

    /// Number of tracks annotated with tag `i`.
    pub fn diagonal(&self, i: usize) -> u64 {
        self.count(i, i)
    }

    /// Total number of annotated tracks behind the matrix.
    pub fn tracks(&self) -> u64 {
        self.tracks
    }

    pub fn index_of(&self, tag: &str) -> Option<usize> {
        self.tags.binary_search_by(|t| t.as_str().cmp(tag)).ok()
    }
}

/// Counts, for every unordered tag pair in the universe, the tracks
/// annotated with both tags; tags outside the universe are ignored.
pub fn build_cooccurrence(annotations: &TagAnnotationSet) -> CooccurrenceMatrix {
    let tags = annotations.tag_universe().to_vec();
    assert!(!tags.is_empty(), "tag universe must be non-empty");
    let index: HashMap<&str, usize> = tags
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let t = tags.len();
    let mut counts = vec![0u64; t * t];
    for (_, track_tags) in annotations.iter() {
        let present: Vec<usize> = track_tags
            .iter()
            .filter_map(|tag| index.get(tag.as_str()).copied())
            .collect();
        for (x, &a) in present.iter().enumerate() {
            counts[a * t + a] += 1;
            for &b in &present[x + 1..] {
                counts[a * t + b] += 1;
                counts[b * t + a] += 1;
            }
        }
    }
    CooccurrenceMatrix {
        tags,
        counts,
        tracks: annotations.tracks() as u64,
    }
}

/// How co-occurrence counts become relevance/similarity scores. Spearman ρ
/// only sees ranks, so any monotone choice agrees with `RawCounts`; the
/// alternatives reweight nDCG and are exposed for ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroundTruth {
    /// Relevance = raw co-occurrence count.
    #[default]
    RawCounts,
    /// Positive pointwise mutual information against per-tag track counts.
    Ppmi,
    /// Cosine of the two tags' track-incidence vectors.
    IncidenceCosine,
}

impl GroundTruth {
    /// Ground-truth relevance of candidate tag `c` for query tag `q`.
    fn relevance(self, cooc: &CooccurrenceMatrix, q: usize, c: usize) -> f64 {
        let joint = cooc.count(q, c) as f64;
        match self {
            GroundTruth::RawCounts => joint,
            GroundTruth::Ppmi => {
                let dq = cooc.diagonal(q) as f64;
                let dc = cooc.diagonal(c) as f64;
                if joint == 0.0 || dq == 0.0 || dc == 0.0 {
                    0.0
                } else {
                    (joint * cooc.tracks() as f64 / (dq * dc)).ln().max(0.0)
                }
            }
            GroundTruth::IncidenceCosine => {
                let denominator = (cooc.diagonal(q) as f64 * cooc.diagonal(c) as f64).sqrt();
                if denominator == 0.0 {
                    0.0
                } else {
                    joint / denominator
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalOptions {
    /// Ranking cutoff for nDCG.
    pub k: usize,
    pub ground_truth: GroundTruth,
    /// Additionally compute one Spearman ρ pooled over every (query,
    /// candidate) pair instead of averaging per query.
    pub pooled_spearman: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            k: 30,
            ground_truth: GroundTruth::RawCounts,
            pooled_spearman: false,
        }
    }
}

/// Metrics for one test set (one annotation source scored against one
/// embedding).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSetMetrics {
    pub label: String,
    /// Mean per-query Spearman ρ; None when every query's ρ was undefined.
    pub mean_spearman: Option<f64>,
    /// Mean per-query nDCG@k over evaluated tags.
    pub mean_ndcg: f64,
    pub k: usize,
    /// Universe tags present in the embedding vocabulary (and scored).
    pub evaluated_tags: usize,
    /// Universe tags missing from the embedding vocabulary.
    pub skipped_tags: usize,
    /// Evaluated tags whose ρ was skipped because a rank list was constant.
    pub degenerate_spearman_tags: usize,
    /// ρ over all pooled (query, candidate) pairs, when requested.
    pub pooled_spearman: Option<f64>,
}

/// Scores `store` against co-occurrence ground truth with nDCG@k and
/// per-query Spearman ρ, using default options except for `k`.
pub fn evaluate_embedding(
    store: &EmbeddingStore,
    cooc: &CooccurrenceMatrix,
    k: usize,
) -> Result<TestSetMetrics, EvalError> {
    evaluate_with(store, cooc, &EvalOptions {
        k,
        ..EvalOptions::default()
    })
}

/// Full evaluation: for each universe tag present in the vocabulary, rank
/// all other present tags by cosine and compare against the ground-truth
/// row. Cosine ties order by ascending tag index. Per-query ρ is skipped
/// (and counted) when either ranking is constant.
pub fn evaluate_with(
    store: &EmbeddingStore,
    cooc: &CooccurrenceMatrix,
    options: &EvalOptions,
) -> Result<TestSetMetrics, EvalError> {
    assert!(options.k >= 1, "k must be at least 1");
    let universe = cooc.tags();
    // (tag index, store index) for universe tags the vocabulary knows.
    let present: Vec<(usize, usize)> = universe
        .iter()
        .enumerate()
        .filter_map(|(i, tag)| store.index_of(tag).map(|s| (i, s)))
        .collect();
    if present.len() < 2 {
        return Err(EvalError::InsufficientOverlap {
            present: present.len(),
        });
    }
    let skipped = universe.len() - present.len();

    let mut rho_sum = 0.0;
    let mut rho_count = 0usize;
    let mut degenerate = 0usize;
    let mut ndcg_sum = 0.0;
    let mut pooled: Option<(Vec<f64>, Vec<f64>)> =
        options.pooled_spearman.then(|| (Vec::new(), Vec::new()));

    for &(q_tag, q_store) in &present {
        // Candidates keep ascending tag-index order; the stable sort below
        // therefore breaks cosine ties by tag index.
        let mut sims = Vec::with_capacity(present.len() - 1);
        let mut rels = Vec::with_capacity(present.len() - 1);
        for &(c_tag, c_store) in &present {
            if c_tag == q_tag {
                continue;
            }
            sims.push(store.cosine_by_index(q_store, c_store));
            rels.push(options.ground_truth.relevance(cooc, q_tag, c_tag));
        }
        let mut order: Vec<usize> = (0..sims.len()).collect();
        order.sort_by(|&a, &b| sims[b].total_cmp(&sims[a]));
        let predicted: Vec<f64> = order.iter().map(|&i| rels[i]).collect();
        ndcg_sum += ndcg_at_k(&predicted, options.k);
        match spearman(&sims, &rels) {
            Ok(rho) => {
                rho_sum += rho;
                rho_count += 1;
            }
            Err(EvalError::DegenerateInput(_)) => degenerate += 1,
            Err(other) => return Err(other),
        }
        if let Some((xs, ys)) = pooled.as_mut() {
            xs.extend_from_slice(&sims);
            ys.extend_from_slice(&rels);
        }
    }

    let pooled_spearman = match pooled {
        None => None,
        Some((xs, ys)) => spearman(&xs, &ys).ok(),
    };
    Ok(TestSetMetrics {
        label: String::new(),
        mean_spearman: (rho_count > 0).then(|| rho_sum / rho_count as f64),
        mean_ndcg: ndcg_sum / present.len() as f64,
        k: options.k,
        evaluated_tags: present.len(),
        skipped_tags: skipped,
        degenerate_spearman_tags: degenerate,
        pooled_spearman,
    })
}

/// Table-shaped evaluation report: one corpus/model identity plus its
/// metrics on each test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub corpus_label: String,
    pub tokens: u64,
    pub unique_words: usize,
    pub unique_tracks: u64,
    pub unique_artists: u64,
    pub test_sets: Vec<TestSetMetrics>,
}

/// 1234567 → "1.2m"-style size label for the console table.
fn humanize_count(n: u64) -> String {
    let n = n as f64;
    if n >= 1e9 {
        format!("{:.2}B", n / 1e9)
    } else if n >= 1e6 {
        format!("{:.1}m", n / 1e6)
    } else if n >= 1e3 {
        format!("{:.1}k", n / 1e3)
    } else {
        format!("{n:.0}")
    }
}

impl EvaluationReport {
    const TSV_HEADER: &'static str = "corpus\ttokens\tunique_words\tunique_tracks\tunique_artists\ttest_set\tspearman\tndcg\tk\tevaluated_tags\tskipped_tags\tdegenerate_spearman_tags\tpooled_spearman";

    /// Machine-readable TSV: a header line plus one row per test set.
    /// Undefined ρ renders as an empty cell.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(Self::TSV_HEADER);
        out.push('\n');
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for set in &self.test_sets {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.6}\t{}\t{}\t{}\t{}\t{}",
                self.corpus_label,
                self.tokens,
                self.unique_words,
                self.unique_tracks,
                self.unique_artists,
                set.label,
                opt(set.mean_spearman),
                set.mean_ndcg,
                set.k,
                set.evaluated_tags,
                set.skipped_tags,
                set.degenerate_spearman_tags,
                opt(set.pooled_spearman),
            )
            .expect("writing to String cannot fail");
        }
        out
    }

    /// Console table with the size/uniqueness columns followed by per-set
    /// metric columns.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "corpus: {}  size: {}  unique words: {}  tracks: {}  artists: {}",
            self.corpus_label,
            humanize_count(self.tokens),
            humanize_count(self.unique_words as u64),
            humanize_count(self.unique_tracks),
            humanize_count(self.unique_artists),
        )
        .unwrap();
        // Name the cutoff in the header when every set shares one, so a
        // single-set report reads "ndcg@30" rather than the generic form.
        let ndcg_label = match self.test_sets.as_slice() {
            [first, rest @ ..] if rest.iter().all(|s| s.k == first.k) => {
                format!("ndcg@{}", first.k)
            }
            _ => "ndcg@k".to_string(),
        };
        writeln!(
            out,
            "{:<18} {:>10} {:>10} {:>6} {:>10} {:>8}",
            "test set", "spearman", ndcg_label, "k", "evaluated", "skipped"
        )
        .unwrap();
        for set in &self.test_sets {
            let rho = set
                .mean_spearman
                .map(|x| format!("{x:.4}"))
                .unwrap_or_else(|| "-".into());
            writeln!(
                out,
                "{:<18} {:>10} {:>10.4} {:>6} {:>10} {:>8}",
                set.label, rho, set.mean_ndcg, set.k, set.evaluated_tags, set.skipped_tags
            )
            .unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_annotations() -> TagAnnotationSet {
        TagAnnotationSet::from_pairs([
            ("t1", "rock"),
            ("t1", "loud"),
            ("t2", "rock"),
            ("t2", "calm"),
        ])
        .unwrap()
    }

    fn toy_store() -> EmbeddingStore {
        // calm ⊥ rock, loud nearly parallel to rock.
        EmbeddingStore::new(
            vec!["calm".into(), "loud".into(), "rock".into()],
            2,
            vec![0.0, 1.0, 0.9, 0.1, 1.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn annotations_normalize_and_sort_universe() {
        let set = TagAnnotationSet::from_pairs([
            ("t1", "  Hard Rock "),
            ("t1", "JAZZ"),
            ("t2", "hard   rock"),
        ])
        .unwrap();
        assert_eq!(set.tag_universe(), ["hard_rock", "jazz"]);
        assert_eq!(set.tracks(), 2);
        assert!(set.tags_of("t1").unwrap().contains("hard_rock"));
        assert!(TagAnnotationSet::from_pairs([("t", "   ")]).is_err());
    }

    #[test]
    fn universe_can_be_replaced_and_restricted() {
        let set = toy_annotations()
            .with_universe(["Rock", "calm", "blues", "rock"])
            .unwrap();
        assert_eq!(set.tag_universe(), ["blues", "calm", "rock"]);
        // rock annotates 2 tracks; calm and loud 1 each (tie → alphabetical).
        let top2 = toy_annotations().restrict_to_top(2);
        assert_eq!(top2.tag_universe(), ["calm", "rock"]);
        let top10 = toy_annotations().restrict_to_top(10);
        assert_eq!(top10.tag_universe(), ["calm", "loud", "rock"]);
    }

    #[test]
    fn tsv_parsing_reports_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tags.tsv");
        std::fs::write(&path, "t1\trock\n\nt2\tHard  Rock\nt1\tcalm\n").unwrap();
        let set = TagAnnotationSet::from_tsv(&path).unwrap();
        assert_eq!(set.tag_universe(), ["calm", "hard_rock", "rock"]);
        assert_eq!(set.tracks(), 2);

        std::fs::write(&path, "t1\trock\nno-tab-here\n").unwrap();
        match TagAnnotationSet::from_tsv(&path) {
            Err(EvalError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected Malformed, got {other:?}"),
        }
        std::fs::write(&path, "t1\t   \n").unwrap();
        assert!(matches!(
            TagAnnotationSet::from_tsv(&path),
            Err(EvalError::Malformed { line: 1, .. })
        ));
        std::fs::write(&path, "bad id\trock\n").unwrap();
        assert!(matches!(
            TagAnnotationSet::from_tsv(&path),
            Err(EvalError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn cooccurrence_counts_match_hand_enumeration() {
        let cooc = build_cooccurrence(&toy_annotations());
        assert_eq!(cooc.tags(), ["calm", "loud", "rock"]);
        assert_eq!(cooc.tracks(), 2);
        let at = |a: &str, b: &str| {
            cooc.count(cooc.index_of(a).unwrap(), cooc.index_of(b).unwrap())
        };
        assert_eq!(at("rock", "loud"), 1);
        assert_eq!(at("rock", "calm"), 1);
        assert_eq!(at("loud", "calm"), 0);
        assert_eq!(cooc.diagonal(cooc.index_of("rock").unwrap()), 2);
        assert_eq!(cooc.diagonal(cooc.index_of("calm").unwrap()), 1);
        // Symmetry and the min-diagonal bound.
        for i in 0..cooc.len() {
            for j in 0..cooc.len() {
                assert_eq!(cooc.count(i, j), cooc.count(j, i));
                assert!(cooc.count(i, j) <= cooc.diagonal(i).min(cooc.diagonal(j)));
            }
        }
    }

    #[test]
    fn single_tag_track_produces_no_pairs() {
        let set = TagAnnotationSet::from_pairs([("only", "solo")]).unwrap();
        let cooc = build_cooccurrence(&set);
        assert_eq!(cooc.len(), 1);
        assert_eq!(cooc.diagonal(0), 1);
    }

    #[test]
    fn tags_outside_universe_are_ignored() {
        let set = toy_annotations().with_universe(["rock", "calm"]).unwrap();
        let cooc = build_cooccurrence(&set);
        assert_eq!(cooc.tags(), ["calm", "rock"]);
        assert_eq!(cooc.count(0, 1), 1); // t2 only; loud is invisible
        assert_eq!(cooc.diagonal(1), 2);
    }

    #[test]
    fn toy_evaluation_matches_hand_computed_metrics() {
        let metrics = evaluate_embedding(&toy_store(), &build_cooccurrence(&toy_annotations()), 2)
            .unwrap();
        // Per query: calm ρ=−1 (its cosines rank loud above rock, counts
        // say the opposite), loud ρ=+1, rock skipped (constant counts row).
        assert_eq!(metrics.evaluated_tags, 3);
        assert_eq!(metrics.skipped_tags, 0);
        assert_eq!(metrics.degenerate_spearman_tags, 1);
        let rho = metrics.mean_spearman.unwrap();
        assert!(rho.abs() < 1e-15, "mean ρ should be 0, got {rho}");
        // nDCG: calm 1/log2(3), loud 1, rock 1.
        assert!((metrics.mean_ndcg - 0.876_976_584_523_819_2).abs() < 1e-12);
        assert_eq!(metrics.k, 2);
    }

    #[test]
    fn perfect_agreement_scores_one_on_both_metrics() {
        // Four tags on a line: cosine order w0>w1>w2>w3 from w0 etc.; counts
        // built so co-occurrence decays identically with index distance.
        let store = EmbeddingStore::new(
            vec!["w0".into(), "w1".into(), "w2".into(), "w3".into()],
            2,
            vec![1.0, 0.0, 0.95, 0.312_25, 0.8, 0.6, 0.5, 0.866_025_4],
        )
        .unwrap();
        let mut pairs: Vec<(String, String)> = Vec::new();
        let tags = ["w0", "w1", "w2", "w3"];
        // Pair counts ranked exactly like the pairwise angles (all gaps are
        // distinct), so every query's counts row is tie-free and ordered
        // like its cosines.
        let pair_counts = [(0, 1, 6), (1, 2, 5), (2, 3, 4), (0, 2, 3), (1, 3, 2), (0, 3, 1)];
        let mut track = 0;
        for (i, j, n) in pair_counts {
            for _ in 0..n {
                pairs.push((format!("t{track}"), tags[i].into()));
                pairs.push((format!("t{track}"), tags[j].into()));
                track += 1;
            }
        }
        let set = TagAnnotationSet::from_pairs(pairs).unwrap();
        let metrics = evaluate_embedding(&store, &build_cooccurrence(&set), 3).unwrap();
        assert_eq!(metrics.mean_spearman, Some(1.0));
        assert_eq!(metrics.mean_ndcg, 1.0);
        assert_eq!(metrics.degenerate_spearman_tags, 0);
    }

    #[test]
    fn vocabulary_gaps_are_skipped_and_counted() {
        let store = EmbeddingStore::new(
            vec!["rock".into(), "calm".into()],
            2,
            vec![1.0, 0.0, 0.0, 1.0],
        )
        .unwrap();
        let cooc = build_cooccurrence(&toy_annotations());
        let metrics = evaluate_embedding(&store, &cooc, 30).unwrap();
        assert_eq!(metrics.evaluated_tags, 2);
        assert_eq!(metrics.skipped_tags, 1);
        assert_eq!(metrics.evaluated_tags + metrics.skipped_tags, cooc.len());

        let tiny = EmbeddingStore::new(vec!["rock".into()], 1, vec![1.0]).unwrap();
        assert!(matches!(
            evaluate_embedding(&tiny, &cooc, 30),
            Err(EvalError::InsufficientOverlap { present: 1 })
        ));
    }

    #[test]
    fn report_is_independent_of_annotation_order() {
        let forward = toy_annotations();
        let backward = TagAnnotationSet::from_pairs([
            ("t2", "calm"),
            ("t2", "rock"),
            ("t1", "loud"),
            ("t1", "rock"),
        ])
        .unwrap();
        let store = toy_store();
        let a = evaluate_embedding(&store, &build_cooccurrence(&forward), 2).unwrap();
        let b = evaluate_embedding(&store, &build_cooccurrence(&backward), 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ground_truth_variants_stay_in_range() {
        let cooc = build_cooccurrence(&toy_annotations());
        let store = toy_store();
        for gt in [
            GroundTruth::RawCounts,
            GroundTruth::Ppmi,
            GroundTruth::IncidenceCosine,
        ] {
            let options = EvalOptions {
                k: 2,
                ground_truth: gt,
                pooled_spearman: true,
            };
            let metrics = evaluate_with(&store, &cooc, &options).unwrap();
            assert!((0.0..=1.0).contains(&metrics.mean_ndcg), "{gt:?}");
            if let Some(rho) = metrics.mean_spearman {
                assert!((-1.0..=1.0).contains(&rho), "{gt:?}");
            }
            if let Some(rho) = metrics.pooled_spearman {
                assert!((-1.0..=1.0).contains(&rho), "{gt:?}");
            }
        }
    }

    #[test]
    fn pooled_spearman_uses_all_pairs() {
        let cooc = build_cooccurrence(&toy_annotations());
        let store = toy_store();
        let options = EvalOptions {
            k: 2,
            pooled_spearman: true,
            ..EvalOptions::default()
        };
        let metrics = evaluate_with(&store, &cooc, &options).unwrap();
        // Hand-computed over all 6 (query, candidate) pairs.
        let sims = [
            0.110_431_526_074_847_32, // calm-loud
            0.0,                      // calm-rock
            0.110_431_526_074_847_32, // loud-calm
            0.993_883_734_673_619,    // loud-rock
            0.0,                      // rock-calm
            0.993_883_734_673_619,    // rock-loud
        ];
        let rels = [0.0, 1.0, 0.0, 1.0, 1.0, 1.0];
        let expected = spearman(&sims, &rels).unwrap();
        assert!((metrics.pooled_spearman.unwrap() - expected).abs() < 1e-12);
        let without = evaluate_with(&store, &cooc, &EvalOptions { k: 2, ..Default::default() })
            .unwrap();
        assert_eq!(without.pooled_spearman, None);
    }

    #[test]
    fn report_renders_tsv_and_table() {
        let report = EvaluationReport {
            corpus_label: "tags+reviews".into(),
            tokens: 45_300_000,
            unique_words: 182_000,
            unique_tracks: 541_000,
            unique_artists: 18_400,
            test_sets: vec![
                TestSetMetrics {
                    label: "genre-tags".into(),
                    mean_spearman: Some(0.2671),
                    mean_ndcg: 0.3391,
                    k: 30,
                    evaluated_tags: 1200,
                    skipped_tags: 201,
                    degenerate_spearman_tags: 3,
                    pooled_spearman: None,
                },
                TestSetMetrics {
                    label: "crowd-tags".into(),
                    mean_spearman: None,
                    mean_ndcg: 0.5,
                    k: 30,
                    evaluated_tags: 80,
                    skipped_tags: 20,
                    degenerate_spearman_tags: 0,
                    pooled_spearman: Some(0.41),
                },
            ],
        };
        let tsv = report.to_tsv();
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("corpus\ttokens"));
        assert!(lines[1].contains("genre-tags"));
        assert!(lines[1].contains("0.267100"));
        // Undefined ρ is an empty TSV cell.
        let fields: Vec<&str> = lines[2].split('\t').collect();
        assert_eq!(fields[6], "");
        assert_eq!(fields[12], "0.410000");

        let table = report.render_table();
        assert!(table.contains("45.3m"));
        assert!(table.contains("genre-tags"));
        assert!(table.contains("0.3391"));
        assert!(table.contains('-'));
        // Both sets share k = 30, so the header names the cutoff.
        assert!(table.contains("ndcg@30"));
    }

    #[test]
    fn humanized_counts_cover_magnitudes() {
        assert_eq!(humanize_count(950), "950");
        assert_eq!(humanize_count(45_300), "45.3k");
        assert_eq!(humanize_count(45_300_000), "45.3m");
        assert_eq!(humanize_count(270_000_000_0), "2.70B");
    }
}
