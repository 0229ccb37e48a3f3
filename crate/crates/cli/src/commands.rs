use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use mtlue::analysis::{analyze_overlap as overlap, crossgroup_grid};
use mtlue::baselines::{train_user2vec, train_word2user, Method, UserEmbeddings};
use mtlue::classify::run_classification;
use mtlue::cluster::evaluate_clustering;
use mtlue::corpus::{anonymize, generate_synthetic, load_reviews, preprocess, write_reviews, LoadMode, ReviewSet};
use mtlue::embfile::EmbeddingFile;
use mtlue::projection::pca;
use mtlue::sgns::EmbeddingTable;
use mtlue::trainer::{train_with_progress, EpochStats, TrainStats};
use mtlue::vocab::{build_entity_index, build_vocab, EntityIndex, Vocabulary};
use serde_json::json;

use crate::config::RunConfig;
use crate::{manifest, CliError};

/// One JSON object per line on stderr.
fn log(event: &str, mut fields: serde_json::Value) {
    if let Some(obj) = fields.as_object_mut() {
        obj.insert("event".into(), event.into());
    }
    eprintln!("{fields}");
}

fn out_dir(config: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = config
        .out_dir
        .clone()
        .ok_or_else(|| CliError::new("usage", "no output directory: pass --out or set out_dir"))?;
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

fn reviews_path(config: &RunConfig) -> Result<PathBuf, CliError> {
    let path = config
        .reviews
        .clone()
        .ok_or_else(|| CliError::new("usage", "no review file: pass --reviews or set reviews"))?;
    if !path.is_file() {
        return Err(CliError::new("io", format!("{}: no such file", path.display())));
    }
    Ok(path)
}

fn read_corpus(config: &RunConfig) -> Result<(PathBuf, ReviewSet), CliError> {
    let path = reviews_path(config)?;
    let loaded = load_reviews(&path, config.dataset_kind, LoadMode::Strict)?;
    // files written by ingest/synth are already preprocessed; this restores
    // the retained genre list and is otherwise a no-op
    let set = preprocess(&loaded.set)?;
    if set.is_empty() {
        return Err(CliError::new("invalid-input", format!("{}: no usable reviews", path.display())));
    }
    Ok((path, set))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn save_reviews(set: &ReviewSet, path: &Path) -> Result<(), CliError> {
    write_reviews(set, create(path)?)?;
    Ok(())
}

fn finish(dir: &Path, command: &str, config: &RunConfig, inputs: &[PathBuf], outputs: &[PathBuf]) -> Result<(), CliError> {
    let m = manifest::write(dir, command, config, inputs, outputs)?;
    let outputs: Vec<String> = outputs.iter().map(|p| p.display().to_string()).collect();
    log("done", json!({"command": command, "outputs": outputs, "manifest": m.display().to_string()}));
    Ok(())
}

pub fn ingest(config: &RunConfig, input: &Path, salt: &str, lenient: bool) -> Result<(), CliError> {
    let dir = out_dir(config)?;
    let mode = if lenient { LoadMode::Lenient } else { LoadMode::Strict };
    let loaded = load_reviews(input, config.dataset_kind, mode)?;
    for w in &loaded.warnings {
        log("skipped_record", json!({"reason": w.to_string()}));
    }
    let set = anonymize(&preprocess(&loaded.set)?, salt)?;
    log(
        "ingested",
        json!({"records": loaded.set.len(), "kept": set.len(), "genres": set.retained_genres}),
    );
    let out = dir.join("reviews.jsonl");
    save_reviews(&set, &out)?;
    finish(&dir, "ingest", config, &[input.to_path_buf()], &[out])
}

pub fn synth(config: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(config)?;
    let corpus = generate_synthetic(&config.synth)?;
    let reviews = dir.join("reviews.jsonl");
    save_reviews(&corpus.set, &reviews)?;
    let truth = dir.join("synthetic_users.csv");
    let mut text = String::from("user,genre,bias\n");
    for (user, genre) in &corpus.user_genre {
        text.push_str(&format!("{user},{genre},{:.6}\n", corpus.user_bias[user]));
    }
    write_text(&truth, &text)?;
    finish(&dir, "synth", config, &[], &[reviews, truth])
}

fn build_index(set: &ReviewSet, config: &RunConfig) -> Result<(Vocabulary, EntityIndex), CliError> {
    let vocab = build_vocab(set, config.max_vocab)?;
    let index = build_entity_index(set, &vocab, config.n_user_vocab)?;
    log(
        "indexed",
        json!({"docs": set.len(), "vocab": vocab.len(), "users": index.n_users(), "items": index.n_items()}),
    );
    Ok((vocab, index))
}

fn epoch_logger(path: &Path) -> Result<(BufWriter<File>, impl FnMut(&mut BufWriter<File>, &EpochStats)), CliError> {
    let file = create(path)?;
    let on_epoch = |out: &mut BufWriter<File>, e: &EpochStats| {
        for r in e.records() {
            let line = serde_json::to_string(&r).expect("record serializes");
            // a failed log write surfaces again at flush time
            let _ = writeln!(out, "{line}");
            eprintln!("{}", json!({"event": "epoch", "epoch": r.epoch, "task": r.task, "mean_loss": r.mean_loss, "pairs": r.pairs}));
        }
        log(
            "epoch_total",
            json!({"epoch": e.epoch, "mean_total_loss": e.mean_total_loss(), "pair_mean_loss": e.pair_mean_loss()}),
        );
    };
    Ok((file, on_epoch))
}

fn table_file(table: &EmbeddingTable, ids: &[String]) -> Result<EmbeddingFile, CliError> {
    Ok(EmbeddingFile::new(table.kind, table.dim(), ids.to_vec(), table.values().to_vec())?)
}

pub fn train(config: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(config)?;
    let (input, set) = read_corpus(config)?;
    let (vocab, index) = build_index(&set, config)?;
    let vocab_path = dir.join("vocab.txt");
    let index_path = dir.join("index.txt");
    {
        let mut f = create(&vocab_path)?;
        vocab.write_to(&mut f)?;
        f.flush().map_err(|e| CliError::io(&vocab_path, e))?;
        let mut f = create(&index_path)?;
        index.write_to(&mut f)?;
        f.flush().map_err(|e| CliError::io(&index_path, e))?;
    }

    let log_path = dir.join("train_log.jsonl");
    let (mut log_file, mut on_epoch) = epoch_logger(&log_path)?;
    let trained = train_with_progress(&set, &vocab, &index, &config.train, |e| on_epoch(&mut log_file, e))?;
    log_file.flush().map_err(|e| CliError::io(&log_path, e))?;

    let model = &trained.model;
    let files = [
        ("word.emb", table_file(&model.word, vocab.tokens())?),
        ("user.emb", table_file(&model.user, index.users())?),
        ("item.emb", table_file(&model.item, index.items())?),
    ];
    let mut outputs = vec![vocab_path, index_path, log_path];
    for (name, file) in files {
        let path = dir.join(name);
        file.save(&path)?;
        outputs.push(path);
    }
    finish(&dir, "train", config, &[input], &outputs)
}

pub fn train_baseline(config: &RunConfig, method: Method) -> Result<(), CliError> {
    let dir = out_dir(config)?;
    let (input, set) = read_corpus(config)?;
    let (vocab, index) = build_index(&set, config)?;
    let (emb, stats): (UserEmbeddings, TrainStats) = match method {
        Method::Word2User => train_word2user(&set, &vocab, &index, &config.train)?,
        Method::User2Vec => train_user2vec(&set, &vocab, &index, &config.train)?,
        other => return Err(CliError::new("usage", format!("{} is not a trainable baseline", other.as_str()))),
    };
    let log_path = dir.join(format!("train_log-{}.jsonl", method.as_str()));
    let mut text = String::new();
    for e in &stats.epochs {
        for r in e.records() {
            text.push_str(&serde_json::to_string(&r).expect("record serializes"));
            text.push('\n');
        }
    }
    write_text(&log_path, &text)?;
    let path = dir.join(format!("user-{}.emb", method.as_str()));
    emb.to_file().save(&path)?;
    finish(&dir, &format!("train-baseline-{}", method.as_str()), config, &[input], &[log_path, path])
}

fn read_embeddings(path: &Path, method: &str) -> Result<UserEmbeddings, CliError> {
    let method: Method = method.parse()?;
    Ok(UserEmbeddings::from_file(method, EmbeddingFile::load(path)?)?)
}

pub fn eval_cluster(config: &RunConfig, embeddings: &Path, method: &str) -> Result<(), CliError> {
    let dir = out_dir(config)?;
    let (input, set) = read_corpus(config)?;
    let (_, index) = build_index(&set, config)?;
    let emb = read_embeddings(embeddings, method)?;
    let report = evaluate_clustering(&emb, &index, &config.cluster.ks, config.cluster.seed)?;
    for row in &report.rows {
        log("cluster", json!({"method": report.method, "k": row.k, "f1": row.score.f1}));
    }
    let path = dir.join(format!("cluster-{}.csv", report.method));
    write_text(&path, &report.to_csv())?;
    let labels_path = dir.join(format!("cluster-{}-labels.csv", report.method));
    let mut text = String::from("user,k,cluster\n");
    for row in &report.rows {
        for (user, label) in report.users.iter().zip(&row.labels) {
            text.push_str(&format!("{user},{},{label}\n", row.k));
        }
    }
    write_text(&labels_path, &text)?;
    finish(
        &dir,
        &format!("eval-cluster-{}", report.method),
        config,
        &[input, embeddings.to_path_buf()],
        &[path, labels_path],
    )
}

pub fn eval_classify(config: &RunConfig, embeddings: Option<(PathBuf, String)>) -> Result<(), CliError> {
    let dir = out_dir(config)?;
    let (input, set) = read_corpus(config)?;
    let mut inputs = vec![input];
    let emb = match embeddings {
        Some((path, method)) => {
            let e = read_embeddings(&path, &method)?;
            inputs.push(path);
            Some(e)
        }
        None => None,
    };
    let report = run_classification(&set, emb.as_ref(), &config.classify)?;
    if !report.converged {
        log("warning", json!({"message": "logistic regression hit the iteration cap before converging"}));
    }
    log(
        "classify",
        json!({"method": report.method, "f1": report.f1, "precision": report.precision, "recall": report.recall}),
    );
    let path = dir.join(format!("classify-{}.csv", report.method));
    write_text(&path, &report.to_csv())?;
    finish(&dir, &format!("eval-classify-{}", report.method), config, &inputs, &[path])
}

pub fn analyze_overlap(config: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(config)?;
    let (input, set) = read_corpus(config)?;
    let (sets, matrix) = overlap(&set, config.analysis.top_k, config.analysis.mi_target)?;
    let path = dir.join("overlap.csv");
    write_text(&path, &matrix.to_csv())?;
    let features_path = dir.join("features.csv");
    let mut text = String::from("genre,rank,feature,mi\n");
    for fs in &sets {
        for (rank, (feature, mi)) in fs.features.iter().enumerate() {
            text.push_str(&format!("{},{},{feature},{mi:.8e}\n", fs.genre, rank + 1));
        }
    }
    write_text(&features_path, &text)?;
    finish(&dir, "analyze-overlap", config, &[input], &[path, features_path])
}

pub fn analyze_crossgroup(config: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(config)?;
    let (input, set) = read_corpus(config)?;
    let matrix = crossgroup_grid(&set, &config.analysis.crossgroup)?;
    let path = dir.join("crossgroup.csv");
    write_text(&path, &matrix.to_csv())?;
    finish(&dir, "analyze-crossgroup", config, &[input], &[path])
}

pub fn export_2d(config: &RunConfig, embeddings: &Path, method: &str) -> Result<(), CliError> {
    let dir = out_dir(config)?;
    let (input, set) = read_corpus(config)?;
    let (_, index) = build_index(&set, config)?;
    let emb = read_embeddings(embeddings, method)?;
    let points = pca(emb.vectors(), emb.dim(), 2)?;
    let mut text = String::from("user,genres,pc1,pc2\n");
    for (r, user) in emb.users().iter().enumerate() {
        let row = index
            .user_id(user)
            .ok_or_else(|| CliError::new("invalid-input", format!("user {user:?} is not in the corpus")))?;
        let genres: Vec<String> = index.user_genres(row).into_iter().collect();
        text.push_str(&format!("{user},{},{:.8e},{:.8e}\n", genres.join(";"), points[2 * r], points[2 * r + 1]));
    }
    let path = dir.join(format!("projection-{}.csv", emb.method.as_str()));
    write_text(&path, &text)?;
    finish(&dir, &format!("export-2d-{}", emb.method.as_str()), config, &[input, embeddings.to_path_buf()], &[path])
}
