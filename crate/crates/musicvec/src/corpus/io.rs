//! Corpus file formats: general text (one document per line), music track
//! records (JSON lines), and the processed-corpus cache.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{tokenize, CorpusError, Document, TrackClusterRecord};

/// Aggregate statistics over an ingested corpus; feeds the evaluation
/// report's size columns.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    /// Token occurrences in the final training stream (after augmentation).
    pub tokens: u64,
    pub documents: u64,
    pub unique_tracks: u64,
    pub unique_artists: u64,
}

impl CorpusStats {
    /// Tallies token/document volume over `docs`, with track/artist counts
    /// supplied by the caller (only record ingestion knows them).
    pub fn tally(docs: &[Document], unique_tracks: u64, unique_artists: u64) -> Self {
        CorpusStats {
            tokens: docs.iter().map(|d| d.tokens.len() as u64).sum(),
            documents: docs.len() as u64,
            unique_tracks,
            unique_artists,
        }
    }

    /// Adds another corpus's statistics (inputs assumed disjoint).
    pub fn absorb(&mut self, other: &CorpusStats) {
        self.tokens += other.tokens;
        self.documents += other.documents;
        self.unique_tracks += other.unique_tracks;
        self.unique_artists += other.unique_artists;
    }
}

/// Counts distinct track and artist IDs over a record set.
pub fn count_unique_ids(records: &[TrackClusterRecord]) -> (u64, u64) {
    let tracks: HashSet<&str> = records.iter().map(|r| r.track_id.as_str()).collect();
    let artists: HashSet<&str> = records.iter().map(|r| r.artist_id.as_str()).collect();
    (tracks.len() as u64, artists.len() as u64)
}

fn display_path(path: &Path) -> String {
    path.display().to_string()
}

/// Reads a general-text corpus: UTF-8, one document per line, tokenized with
/// [`tokenize`]. Lines with no tokens are dropped.
pub fn read_general_corpus(path: &Path) -> Result<Vec<Document>, CorpusError> {
    let file = File::open(path)?;
    let mut docs = Vec::new();
    for line in BufReader::new(file).lines() {
        let tokens = tokenize(&line?);
        if !tokens.is_empty() {
            docs.push(Document::general(tokens));
        }
    }
    Ok(docs)
}

/// Reads music track records from a JSON-lines file, one object per line:
/// `{"track_id": str, "artist_id": str, "tags": [str], "reviews": [str]}`.
/// Every record is validated; errors name the offending line.
pub fn read_track_records(path: &Path) -> Result<Vec<TrackClusterRecord>, CorpusError> {
    let file = File::open(path)?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TrackClusterRecord =
            serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
                path: display_path(path),
                line: i + 1,
                message: e.to_string(),
            })?;
        record.validate().map_err(|e| CorpusError::Malformed {
            path: display_path(path),
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Writes a processed corpus cache: one document per line, tokens separated
/// by single spaces. The cache is already tokenized; read it back with
/// [`read_processed_corpus`], never with [`read_general_corpus`] (re-running
/// the tokenizer would split underscore tags and lowercase ID tokens).
pub fn write_processed_corpus(path: &Path, docs: &[Document]) -> Result<(), CorpusError> {
    let mut writer = BufWriter::new(File::create(path)?);
    for doc in docs {
        writeln!(writer, "{}", doc.tokens.join(" "))?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a processed corpus cache: one document per line, whitespace-split,
/// tokens used verbatim. Augmentation happens before caching, so documents
/// are returned as general text (they are never shuffled again).
pub fn read_processed_corpus(path: &Path) -> Result<Vec<Document>, CorpusError> {
    let file = File::open(path)?;
    let mut docs = Vec::new();
    for line in BufReader::new(file).lines() {
        let tokens: Vec<String> = line?.split_whitespace().map(str::to_string).collect();
        if !tokens.is_empty() {
            docs.push(Document::general(tokens));
        }
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_cluster_document, DocumentKind};

    #[test]
    fn general_corpus_round_trip_through_tokenizer() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("general.txt");
        std::fs::write(&path, "Electronic Dance Music!\n\nclub-dance R&B\n").unwrap();
        let docs = read_general_corpus(&path).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].tokens, vec!["electronic", "dance", "music"]);
        assert_eq!(docs[1].tokens, vec!["club", "dance", "r&b"]);
        assert_eq!(docs[0].kind, DocumentKind::GeneralText);
    }

    #[test]
    fn track_records_parse_and_validate() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("music.jsonl");
        std::fs::write(
            &path,
            concat!(
                r#"{"track_id":"TR001","artist_id":"AR001","tags":["House"],"reviews":["great beat"]}"#,
                "\n",
                r#"{"track_id":"TR002","artist_id":"AR002"}"#,
                "\n",
            ),
        )
        .unwrap();
        let records = read_track_records(&path).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].track_id, "TR001");
        assert!(records[1].tags.is_empty());
        let doc = build_cluster_document(&records[0]);
        assert_eq!(doc.tokens, vec!["house", "great", "beat", "AR001", "TR001"]);
    }

    #[test]
    fn malformed_record_errors_name_path_and_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("music.jsonl");
        std::fs::write(
            &path,
            concat!(
                r#"{"track_id":"TR001","artist_id":"AR001"}"#,
                "\n",
                r#"{"track_id":"TR002"}"#,
                "\n",
            ),
        )
        .unwrap();
        let err = read_track_records(&path).unwrap_err();
        match err {
            CorpusError::Malformed { path: p, line, .. } => {
                assert!(p.ends_with("music.jsonl"));
                assert_eq!(line, 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn invalid_record_content_is_reported_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("music.jsonl");
        std::fs::write(&path, "{\"track_id\":\"X\",\"artist_id\":\"X\"}\n").unwrap();
        let err = read_track_records(&path).unwrap_err();
        assert!(matches!(err, CorpusError::Malformed { line: 1, .. }));
    }

    #[test]
    fn processed_corpus_round_trips_verbatim() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.txt");
        let docs = vec![
            Document::cluster(vec!["club_dance".into(), "AR001".into(), "TR001".into()]),
            Document::general(vec!["hello".into(), "world".into()]),
        ];
        write_processed_corpus(&path, &docs).unwrap();
        let loaded = read_processed_corpus(&path).unwrap();
        assert_eq!(loaded.len(), 2);
        // Tokens survive exactly: underscores and ID case intact.
        assert_eq!(loaded[0].tokens, docs[0].tokens);
        assert_eq!(loaded[1].tokens, docs[1].tokens);
    }

    #[test]
    fn corpus_stats_tally_and_absorb() {
        let docs = vec![
            Document::general(vec!["a".into(), "b".into()]),
            Document::general(vec!["c".into()]),
        ];
        let mut stats = CorpusStats::tally(&docs, 5, 3);
        assert_eq!(stats.tokens, 3);
        assert_eq!(stats.documents, 2);
        stats.absorb(&CorpusStats {
            tokens: 10,
            documents: 4,
            unique_tracks: 1,
            unique_artists: 1,
        });
        assert_eq!(stats.tokens, 13);
        assert_eq!(stats.unique_tracks, 6);
        assert_eq!(stats.unique_artists, 4);
    }
}
