//! Black-box tests of the command-line interface: exit codes, output
//! formats, config-file precedence, and the full pipeline wiring.

use std::path::Path;
use std::process::{Command, Output};

fn musicvec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_musicvec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(output: &Output, what: &str) {
    assert!(
        output.status.success(),
        "{what} failed with {:?}:\n{}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is UTF-8")
}

#[test]
fn help_screens_exit_zero() {
    let subcommands = [
        "build-corpus",
        "train",
        "eval",
        "query",
        "project",
        "gen-synthetic",
    ];
    let top = musicvec(&["--help"]);
    assert_eq!(top.status.code(), Some(0));
    assert!(stdout(&top).contains("train"));
    for sub in subcommands {
        let out = musicvec(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub} --help");
        assert!(!stdout(&out).is_empty(), "{sub} --help prints usage");
    }
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = musicvec(&["train", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_subcommand_is_usage_error() {
    let out = musicvec(&[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_input_file_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out_model = dir.path().join("model.bin");
    let out = musicvec(&[
        "train",
        "--corpus",
        "/nonexistent/corpus-xyz.txt",
        "--out",
        out_model.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("corpus-xyz.txt"),
        "stderr names the missing file: {}",
        stderr(&out)
    );
}

#[test]
fn unknown_model_extension_is_usage_error() {
    let out = musicvec(&["train", "--corpus", "x.txt", "--out", "model.vec"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_track_records_report_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let tracks = dir.path().join("tracks.jsonl");
    std::fs::write(
        &tracks,
        concat!(
            r#"{"track_id":"t1","artist_id":"a1","tags":["rock"],"reviews":["loud fast loud"]}"#,
            "\nnot json at all\n"
        ),
    )
    .unwrap();
    let out = musicvec(&[
        "train",
        "--tracks",
        tracks.to_str().unwrap(),
        "--out",
        dir.path().join("model.bin").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains(":2:"), "stderr cites line 2: {err}");
    assert!(err.contains("tracks.jsonl"), "stderr names the file: {err}");
}

fn gen_two_topic(dir: &Path, documents: &str, seed: &str) -> std::path::PathBuf {
    let synth = dir.join("synth");
    let out = musicvec(&[
        "gen-synthetic",
        "--kind",
        "two-topic",
        "--documents",
        documents,
        "--out-dir",
        synth.to_str().unwrap(),
        "--seed",
        seed,
    ]);
    assert_ok(&out, "gen-synthetic");
    synth.join("two-topic.txt")
}

#[test]
fn pipeline_from_synthetic_corpus_to_projection() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen_two_topic(dir.path(), "400", "3");
    assert!(corpus.exists());

    let processed = dir.path().join("corpus.txt");
    let out = musicvec(&[
        "build-corpus",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        processed.to_str().unwrap(),
    ]);
    assert_ok(&out, "build-corpus");
    assert!(stdout(&out).contains("documents"));
    assert!(processed.exists());
    assert!(dir.path().join("corpus.txt.manifest.json").exists());

    // Text model format, multiple workers: exercises the other half of the
    // serialization and scheduling paths.
    let model = dir.path().join("model.txt");
    let out = musicvec(&[
        "train",
        "--processed",
        processed.to_str().unwrap(),
        "--dim",
        "8",
        "--epochs",
        "2",
        "--workers",
        "2",
        "--seed",
        "3",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_ok(&out, "train");
    assert!(stdout(&out).contains("trained"));
    assert!(model.exists());
    assert!(dir.path().join("model.outputs.txt").exists());
    assert!(dir.path().join("model.txt.meta.json").exists());
    assert!(dir.path().join("model.txt.manifest.json").exists());

    let out = musicvec(&["query", "--model", model.to_str().unwrap(), "--word", "t0w00", "--k", "5"]);
    assert_ok(&out, "query");
    let lines: Vec<String> = stdout(&out).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 5, "query --k 5 prints exactly 5 neighbors");
    for line in &lines {
        let (word, cosine) = line.split_once('\t').expect("word<TAB>cosine");
        assert!(!word.is_empty());
        let value: f64 = cosine.parse().expect("cosine parses");
        assert!(value.is_finite() && value <= 1.0 + 1e-9);
    }

    let out = musicvec(&["query", "--model", model.to_str().unwrap(), "--word", "zzz-missing"]);
    assert_eq!(out.status.code(), Some(2), "unknown query word is a data error");

    let proj = dir.path().join("proj.tsv");
    let out = musicvec(&[
        "project",
        "--model",
        model.to_str().unwrap(),
        "--perplexity",
        "5",
        "--iterations",
        "100",
        "--seed",
        "3",
        "--out",
        proj.to_str().unwrap(),
    ]);
    assert_ok(&out, "project");
    let proj_text = std::fs::read_to_string(&proj).unwrap();
    let rows: Vec<&str> = proj_text.lines().collect();
    assert_eq!(rows.len(), 40, "one row per vocabulary word");
    for row in rows {
        let fields: Vec<&str> = row.split('\t').collect();
        assert_eq!(fields.len(), 3, "word<TAB>x<TAB>y");
        let x: f64 = fields[1].parse().unwrap();
        let y: f64 = fields[2].parse().unwrap();
        assert!(x.is_finite() && y.is_finite());
    }
    assert!(dir.path().join("proj.tsv.manifest.json").exists());
}

#[test]
fn eval_prints_metrics_table_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let synth = dir.path().join("synth");
    let out = musicvec(&[
        "gen-synthetic",
        "--kind",
        "trend",
        "--out-dir",
        synth.to_str().unwrap(),
        "--seed",
        "5",
    ]);
    assert_ok(&out, "gen-synthetic trend");

    let model = dir.path().join("model.bin");
    let out = musicvec(&[
        "train",
        "--corpus",
        synth.join("general.txt").to_str().unwrap(),
        "--tracks",
        synth.join("tracks.jsonl").to_str().unwrap(),
        "--dim",
        "8",
        "--epochs",
        "2",
        "--workers",
        "4",
        "--seed",
        "5",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_ok(&out, "train");

    let report = dir.path().join("report.tsv");
    let out = musicvec(&[
        "eval",
        "--model",
        model.to_str().unwrap(),
        "--annotations",
        synth.join("annotations.tsv").to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_ok(&out, "eval");
    let table = stdout(&out);
    assert!(table.contains("spearman"), "table names spearman: {table}");
    assert!(table.contains("ndcg@30"), "table names the ndcg cutoff: {table}");
    assert!(table.contains("annotations"), "test set labeled by file stem: {table}");

    let tsv = std::fs::read_to_string(&report).unwrap();
    let mut lines = tsv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("corpus\t"));
    assert!(header.contains("\tspearman\t") && header.contains("\tndcg\t"));
    assert_eq!(lines.count(), 1, "one data row for one test set");
    assert!(report.with_extension("tsv.manifest.json").exists() ||
        dir.path().join("report.tsv.manifest.json").exists());
}

#[test]
fn config_file_applies_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen_two_topic(dir.path(), "200", "9");
    let config = dir.path().join("musicvec.toml");
    std::fs::write(&config, "[train]\ndim = 4\nepochs = 1\n").unwrap();

    let meta_dim = |model: &Path| -> u64 {
        let meta_path = format!("{}.meta.json", model.display());
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(meta_path).unwrap()).unwrap();
        meta["config"]["dim"].as_u64().unwrap()
    };

    let model_a = dir.path().join("a.bin");
    let out = musicvec(&[
        "train",
        "--config",
        config.to_str().unwrap(),
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        model_a.to_str().unwrap(),
    ]);
    assert_ok(&out, "train with config file");
    assert_eq!(meta_dim(&model_a), 4, "dim comes from the config file");

    let model_b = dir.path().join("b.bin");
    let out = musicvec(&[
        "train",
        "--config",
        config.to_str().unwrap(),
        "--corpus",
        corpus.to_str().unwrap(),
        "--dim",
        "6",
        "--out",
        model_b.to_str().unwrap(),
    ]);
    assert_ok(&out, "train with config file and flag");
    assert_eq!(meta_dim(&model_b), 6, "the flag overrides the config file");

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[train]\ntypo_field = 3\n").unwrap();
    let out = musicvec(&[
        "train",
        "--config",
        bad.to_str().unwrap(),
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        dir.path().join("c.bin").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "unknown config keys are rejected");
}
