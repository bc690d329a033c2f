//! word2vec-compatible serialization.
//!
//! Both formats start with a `"V D\n"` header. Text follows with one
//! `"word v1 ... vD\n"` line per word; binary follows with `"word "` and D
//! little-endian IEEE-754 f32 values per word, no separators after the
//! floats. Text values are written with shortest-round-trip formatting, so
//! text round trips are bit-exact as well (stronger than the six significant
//! digits the format guarantees).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{EmbeddingError, EmbeddingStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Text,
    Binary,
}

impl EmbeddingFormat {
    /// Infers the format from the file extension: `.txt` or `.bin`.
    pub fn from_path(path: &Path) -> Result<EmbeddingFormat, EmbeddingError> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("txt") => Ok(EmbeddingFormat::Text),
            Some("bin") => Ok(EmbeddingFormat::Binary),
            _ => Err(EmbeddingError::UnknownFormat(path.display().to_string())),
        }
    }
}

pub fn save(
    store: &EmbeddingStore,
    path: &Path,
    format: EmbeddingFormat,
) -> Result<(), EmbeddingError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{} {}", store.len(), store.dim())?;
    for i in 0..store.len() {
        match format {
            EmbeddingFormat::Text => {
                out.write_all(store.word(i).as_bytes())?;
                for &x in store.vector(i) {
                    write!(out, " {x}")?;
                }
                out.write_all(b"\n")?;
            }
            EmbeddingFormat::Binary => {
                out.write_all(store.word(i).as_bytes())?;
                out.write_all(b" ")?;
                for &x in store.vector(i) {
                    out.write_all(&x.to_le_bytes())?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Loads a store, inferring the format from the file extension.
pub fn load(path: &Path) -> Result<EmbeddingStore, EmbeddingError> {
    load_with(path, EmbeddingFormat::from_path(path)?)
}

pub fn load_with(path: &Path, format: EmbeddingFormat) -> Result<EmbeddingStore, EmbeddingError> {
    match format {
        EmbeddingFormat::Text => load_text(path),
        EmbeddingFormat::Binary => load_binary(path),
    }
}

fn parse_header(line: &str) -> Result<(usize, usize), EmbeddingError> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let bad = || EmbeddingError::MalformedHeader(format!("expected \"V D\", got {line:?}"));
    match fields.as_slice() {
        [v, d] => Ok((
            v.parse().map_err(|_| bad())?,
            d.parse().map_err(|_| bad())?,
        )),
        _ => Err(bad()),
    }
}

fn load_text(path: &Path) -> Result<EmbeddingStore, EmbeddingError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| EmbeddingError::MalformedHeader("empty file".into()))??;
    let (v, dim) = parse_header(&header)?;
    let mut words = Vec::with_capacity(v);
    let mut vectors = Vec::with_capacity(v * dim);
    for record in 1..=v {
        let line = lines.next().transpose()?.ok_or_else(|| {
            EmbeddingError::TruncatedFile(format!(
                "header promises {v} words but the file ends after {}",
                record - 1
            ))
        })?;
        let mut fields = line.split_whitespace();
        let word = fields.next().ok_or_else(|| EmbeddingError::MalformedRecord {
            record,
            message: "empty line where a word record was expected".into(),
        })?;
        words.push(word.to_string());
        let mut parsed = 0usize;
        for field in fields {
            let value: f32 = field.parse().map_err(|_| EmbeddingError::MalformedRecord {
                record,
                message: format!("unparseable value {field:?}"),
            })?;
            vectors.push(value);
            parsed += 1;
        }
        if parsed != dim {
            return Err(EmbeddingError::MalformedRecord {
                record,
                message: format!("expected {dim} values, found {parsed}"),
            });
        }
    }
    for line in lines {
        if !line?.trim().is_empty() {
            return Err(EmbeddingError::MalformedRecord {
                record: v + 1,
                message: "trailing data after the final record".into(),
            });
        }
    }
    EmbeddingStore::new(words, dim, vectors)
}

fn load_binary(path: &Path) -> Result<EmbeddingStore, EmbeddingError> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut header = Vec::new();
    reader.read_until(b'\n', &mut header)?;
    if header.last() != Some(&b'\n') {
        return Err(EmbeddingError::MalformedHeader(
            "missing newline-terminated header".into(),
        ));
    }
    let header = String::from_utf8(header)
        .map_err(|_| EmbeddingError::MalformedHeader("header is not UTF-8".into()))?;
    let (v, dim) = parse_header(&header)?;
    let mut words = Vec::with_capacity(v);
    let mut vectors = Vec::with_capacity(v * dim);
    let mut float_buf = vec![0u8; dim * 4];
    for record in 1..=v {
        let mut word_bytes = Vec::new();
        reader.read_until(b' ', &mut word_bytes)?;
        if word_bytes.last() != Some(&b' ') {
            return Err(EmbeddingError::TruncatedFile(format!(
                "header promises {v} words but the file ends inside record {record}"
            )));
        }
        word_bytes.pop();
        let word = String::from_utf8(word_bytes).map_err(|_| EmbeddingError::MalformedRecord {
            record,
            message: "word is not UTF-8".into(),
        })?;
        words.push(word);
        reader.read_exact(&mut float_buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                EmbeddingError::TruncatedFile(format!(
                    "vector payload of record {record} is incomplete"
                ))
            } else {
                EmbeddingError::Io(e)
            }
        })?;
        vectors.extend(
            float_buf
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
        );
    }
    // Tolerate at most one trailing newline (some writers append one).
    let mut rest = Vec::new();
    reader.read_to_end(&mut rest)?;
    if !(rest.is_empty() || rest == b"\n") {
        return Err(EmbeddingError::MalformedRecord {
            record: v + 1,
            message: format!("{} bytes of trailing data after the final record", rest.len()),
        });
    }
    EmbeddingStore::new(words, dim, vectors)
}
