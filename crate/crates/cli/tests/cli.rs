use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mtlue::corpus::{load_reviews, DatasetKind, LoadMode};
use mtlue::embfile::EmbeddingFile;
use mtlue::sgns::{init_model, TrainConfig};
use mtlue::vocab::{build_entity_index, build_vocab};

const SMALL: &str = "version = 1\n[synth]\nn_users = 40\nn_items = 12\n[train]\ndim = 16\nepochs = 2\n";

fn mtlue(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtlue"))
        .current_dir(dir)
        .args(args)
        .env_remove("MTLUE_TRAIN__EPOCHS")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let out = mtlue(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn setup(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), config).unwrap();
    ok(dir.path(), &["--config", "run.toml", "--out", "o", "synth"]);
    dir
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join("o").join(name)).unwrap()
}

const PIPELINE: &[&[&str]] = &[
    &["train", "--reviews", "o/reviews.jsonl"],
    &["train-baseline", "user2vec", "--reviews", "o/reviews.jsonl"],
    &["eval-cluster", "--reviews", "o/reviews.jsonl", "--embeddings", "o/user.emb"],
    &["eval-classify", "personalized", "--reviews", "o/reviews.jsonl", "--embeddings", "o/user.emb"],
    &["analyze-overlap", "--reviews", "o/reviews.jsonl", "--top-k", "50"],
    &["export-2d", "--reviews", "o/reviews.jsonl", "--embeddings", "o/user.emb"],
];

fn run_pipeline(dir: &Path) {
    for args in PIPELINE {
        let mut full = vec!["--config", "run.toml", "--out", "o"];
        full.extend_from_slice(args);
        ok(dir, &full);
    }
}

#[test]
fn pipeline_writes_reports_and_manifests() {
    let dir = setup(SMALL);
    run_pipeline(dir.path());
    let cluster = String::from_utf8(read(dir.path(), "cluster-mtl.csv")).unwrap();
    let lines: Vec<&str> = cluster.lines().collect();
    assert_eq!(lines[0], "method,k,f1,tp,fp,fn,tn");
    assert!(lines[1].starts_with("mtl,4,"));
    assert_eq!(lines.len(), 4);

    let manifest: serde_json::Value = serde_json::from_slice(&read(dir.path(), "manifest-train.json")).unwrap();
    let reviews = read(dir.path(), "reviews.jsonl");
    let digest = manifest["inputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(digest, mtlue_sha256(&reviews));
    assert_eq!(manifest["config"]["train"]["epochs"], 2);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 6);

    let projection = String::from_utf8(read(dir.path(), "projection-mtl.csv")).unwrap();
    assert_eq!(projection.lines().count(), 41);
}

fn mtlue_sha256(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

#[test]
fn reruns_are_byte_identical() {
    let dir = setup(SMALL);
    run_pipeline(dir.path());
    let names = [
        "user.emb",
        "item.emb",
        "word.emb",
        "user-user2vec.emb",
        "train_log.jsonl",
        "cluster-mtl.csv",
        "classify-lr-mtl.csv",
        "overlap.csv",
        "features.csv",
        "projection-mtl.csv",
        "manifest-train.json",
    ];
    let first: Vec<Vec<u8>> = names.iter().map(|n| read(dir.path(), n)).collect();
    ok(dir.path(), &["--config", "run.toml", "--out", "o", "synth"]);
    run_pipeline(dir.path());
    for (name, before) in names.iter().zip(first) {
        assert!(before == read(dir.path(), name), "{name} changed between runs");
    }
}

#[test]
fn zero_epochs_writes_the_initialization() {
    let dir = setup(SMALL);
    ok(dir.path(), &["--config", "run.toml", "--out", "o", "train", "--reviews", "o/reviews.jsonl", "--epochs", "0"]);
    let set = load_reviews(dir.path().join("o/reviews.jsonl"), DatasetKind::Synthetic, LoadMode::Strict)
        .unwrap()
        .set;
    let vocab = build_vocab(&set, 20_000).unwrap();
    let index = build_entity_index(&set, &vocab, 100).unwrap();
    let config = TrainConfig {
        dim: 16,
        epochs: 0,
        ..Default::default()
    };
    let init = init_model(vocab.len(), index.n_users(), index.n_items(), &config).unwrap();
    let users = EmbeddingFile::load(dir.path().join("o/user.emb")).unwrap();
    assert_eq!(users.ids, index.users());
    for (stored, exact) in users.values.iter().zip(init.user.values()) {
        assert!((stored - exact).abs() <= 1e-8 * exact.abs().max(1e-300), "{stored} vs {exact}");
    }
    let log = std::fs::read_to_string(dir.path().join("o/train_log.jsonl")).unwrap();
    assert!(log.is_empty());
}

#[test]
fn errors_are_one_categorized_line() {
    let dir = setup(SMALL);
    let out = Command::new(env!("CARGO_BIN_EXE_mtlue"))
        .current_dir(dir.path())
        .args(["--out", "o", "train", "--reviews", "o/reviews.jsonl"])
        .env("MTLUE_TRAIN__EPOX", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1);
    assert!(stderr.starts_with("error[config]: unknown field `epox`"), "{stderr}");

    let out = mtlue(dir.path(), &["--out", "o", "analyze-crossgroup", "--reviews", "missing.jsonl"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[io]:"));

    std::fs::write(dir.path().join("bad.emb"), "user 2 3 v1\na 1 2 3\n").unwrap();
    let out = mtlue(
        dir.path(),
        &["--out", "o", "eval-cluster", "--reviews", "o/reviews.jsonl", "--embeddings", "bad.emb"],
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.lines().last().unwrap().starts_with("error[format]:"), "{stderr}");

    let out = mtlue(dir.path(), &["--out", "o", "eval-classify", "personalized", "--reviews", "o/reviews.jsonl"]);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[usage]:"));
}

#[test]
fn ingest_anonymizes_and_preprocesses() {
    let dir = tempfile::tempdir().unwrap();
    let raw: PathBuf = dir.path().join("raw.jsonl");
    let text = "one two three four five six seven eight nine ten eleven";
    let mut lines = String::new();
    for i in 0..4 {
        lines.push_str(&format!(
            "{{\"doc_id\":\"d{i}\",\"user_id\":\"alice\",\"item_id\":\"cafe{i}\",\"rating\":{},\"text\":\"{text}\",\"genres\":[\"Food\"]}}\n",
            i + 1
        ));
    }
    lines.push_str("{\"doc_id\":\"d9\",\"user_id\":\"bob\"}\n");
    std::fs::write(&raw, lines).unwrap();

    let strict = mtlue(dir.path(), &["--out", "o", "ingest", "--input", "raw.jsonl", "--salt", "s"]);
    assert!(String::from_utf8_lossy(&strict.stderr).starts_with("error[record]: line 5"));

    let out = Command::new(env!("CARGO_BIN_EXE_mtlue"))
        .current_dir(dir.path())
        .args(["--out", "o", "ingest", "--input", "raw.jsonl", "--salt", "s", "--lenient"])
        .env("MTLUE_DATASET_KIND", "yelp")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped_record"));
    let written = std::fs::read_to_string(dir.path().join("o/reviews.jsonl")).unwrap();
    assert_eq!(written.lines().count(), 4);
    assert!(!written.contains("alice") && !written.contains("cafe"));
    assert!(written.contains("\"sentiment\":\"negative\""));
}

fn weighted_f1(csv: &[u8]) -> f64 {
    let text = String::from_utf8(csv.to_vec()).unwrap();
    let last = text.lines().last().unwrap();
    assert!(last.contains("weighted_avg"), "{last}");
    last.split(',').nth(5).unwrap().parse().unwrap()
}

#[test]
fn default_fixture_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--out", "o", "synth"]);
    ok(d, &["--out", "o", "train", "--reviews", "o/reviews.jsonl"]);
    ok(d, &["--out", "o", "eval-cluster", "--reviews", "o/reviews.jsonl", "--embeddings", "o/user.emb"]);
    ok(d, &["--out", "o", "eval-classify", "plain", "--reviews", "o/reviews.jsonl"]);
    ok(
        d,
        &["--out", "o", "eval-classify", "personalized", "--reviews", "o/reviews.jsonl", "--embeddings", "o/user.emb"],
    );

    let cluster = String::from_utf8(read(d, "cluster-mtl.csv")).unwrap();
    let k4: Vec<&str> = cluster.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(k4[1], "4");
    // at k = 4 no cluster mixes users of different genres
    assert_eq!(k4[4], "0", "{cluster}");
    eprintln!("F1@4 {}", k4[2]);

    let plain = weighted_f1(&read(d, "classify-lr.csv"));
    let personalized = weighted_f1(&read(d, "classify-lr-mtl.csv"));
    assert!(personalized > plain, "plain {plain} personalized {personalized}");
}
