//! User embeddings from the joint model and from the comparison methods.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::ReviewSet;
use crate::embfile::EmbeddingFile;
use crate::error::{Error, Result};
use crate::sgns::{EmbeddingTable, TableKind, TrainConfig};
use crate::trainer::{train, TaskKind, TaskSet, TrainStats, Trained};
use crate::vocab::{EntityIndex, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// The joint four-task model.
    Mtl,
    /// Mean of the word vectors of every token a user wrote.
    Word2User,
    /// The user–word task alone.
    User2Vec,
    /// Untrained uniform noise, as a floor for evaluation.
    Random,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mtl => "mtl",
            Method::Word2User => "word2user",
            Method::User2Vec => "user2vec",
            Method::Random => "random",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mtl" => Ok(Method::Mtl),
            "word2user" => Ok(Method::Word2User),
            "user2vec" => Ok(Method::User2Vec),
            "random" => Ok(Method::Random),
            other => Err(Error::invalid(format!("unknown embedding method {other:?}"))),
        }
    }
}

/// One vector per user, rows ordered by user id.
#[derive(Debug, Clone, PartialEq)]
pub struct UserEmbeddings {
    pub method: Method,
    dim: usize,
    users: Vec<String>,
    vectors: Vec<f64>,
    rows: BTreeMap<String, usize>,
}

impl UserEmbeddings {
    /// `vectors` is row-major in the order of `users`.
    pub fn new(method: Method, dim: usize, users: Vec<String>, vectors: Vec<f64>) -> Result<Self> {
        if dim == 0 || vectors.len() != users.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: users.len() * dim,
                actual: vectors.len(),
            });
        }
        if let Some(i) = vectors.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("{} vector of user {}", method.as_str(), users[i / dim]),
            });
        }
        let mut rows = BTreeMap::new();
        for (r, u) in users.iter().enumerate() {
            if rows.insert(u.clone(), r).is_some() {
                return Err(Error::invalid(format!("user {u:?} appears twice")));
            }
        }
        Ok(UserEmbeddings {
            method,
            dim,
            users,
            vectors,
            rows,
        })
    }

    /// Copies the user table of a trained model.
    pub fn from_table(method: Method, index: &EntityIndex, table: &EmbeddingTable) -> Result<Self> {
        if table.kind != TableKind::User || table.rows() != index.n_users() {
            return Err(Error::invalid("table does not hold one row per indexed user"));
        }
        Self::new(method, table.dim(), index.users().to_vec(), table.values().to_vec())
    }

    pub fn from_file(method: Method, file: EmbeddingFile) -> Result<Self> {
        if file.kind != TableKind::User {
            return Err(Error::invalid(format!("expected user embeddings, got {}", file.kind.as_str())));
        }
        Self::new(method, file.dim, file.ids, file.values)
    }

    pub fn to_file(&self) -> EmbeddingFile {
        EmbeddingFile {
            kind: TableKind::User,
            dim: self.dim,
            ids: self.users.clone(),
            values: self.vectors.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.vectors[r * self.dim..(r + 1) * self.dim]
    }

    pub fn get(&self, user: &str) -> Option<&[f64]> {
        self.rows.get(user).map(|&r| self.row(r))
    }

    pub fn vectors(&self) -> &[f64] {
        &self.vectors
    }
}

/// Averages word vectors over every token occurrence of each user's
/// documents. Out-of-vocabulary tokens use the unknown-word row.
pub fn word2user(set: &ReviewSet, vocab: &Vocabulary, words: &EmbeddingTable) -> Result<UserEmbeddings> {
    if words.kind != TableKind::Word || words.rows() != vocab.len() {
        return Err(Error::invalid("word table does not match the vocabulary"));
    }
    let dim = words.dim();
    let mut sums: BTreeMap<&str, (Vec<f64>, usize)> = BTreeMap::new();
    for review in &set.reviews {
        let (sum, n) = sums
            .entry(review.user_id.as_str())
            .or_insert_with(|| (vec![0.0; dim], 0));
        for id in vocab.encode(&review.tokens) {
            for (s, w) in sum.iter_mut().zip(words.row(id as usize)) {
                *s += w;
            }
            *n += 1;
        }
    }
    let mut users = Vec::with_capacity(sums.len());
    let mut vectors = Vec::with_capacity(sums.len() * dim);
    for (user, (sum, n)) in sums {
        if n == 0 {
            return Err(Error::invalid(format!("user {user:?} has no tokens")));
        }
        users.push(user.to_string());
        vectors.extend(sum.iter().map(|s| s / n as f64));
    }
    UserEmbeddings::new(Method::Word2User, dim, users, vectors)
}

/// Trains word vectors with the word–word task alone.
pub fn train_word_vectors(
    set: &ReviewSet,
    vocab: &Vocabulary,
    index: &EntityIndex,
    config: &TrainConfig,
) -> Result<Trained> {
    let config = TrainConfig {
        tasks: TaskSet::only(TaskKind::WordWord),
        ..config.clone()
    };
    train(set, vocab, index, &config)
}

/// Word-vector training followed by per-user averaging.
pub fn train_word2user(
    set: &ReviewSet,
    vocab: &Vocabulary,
    index: &EntityIndex,
    config: &TrainConfig,
) -> Result<(UserEmbeddings, TrainStats)> {
    let trained = train_word_vectors(set, vocab, index, config)?;
    Ok((word2user(set, vocab, &trained.model.word)?, trained.stats))
}

/// The user–word task alone, with positives taken from the document only.
pub fn train_user2vec(
    set: &ReviewSet,
    vocab: &Vocabulary,
    index: &EntityIndex,
    config: &TrainConfig,
) -> Result<(UserEmbeddings, TrainStats)> {
    let config = user2vec_config(config);
    let trained = train(set, vocab, index, &config)?;
    let emb = UserEmbeddings::from_table(Method::User2Vec, index, &trained.model.user)?;
    Ok((emb, trained.stats))
}

/// The training configuration `train_user2vec` derives from `config`.
pub fn user2vec_config(config: &TrainConfig) -> TrainConfig {
    TrainConfig {
        tasks: TaskSet::only(TaskKind::UserWord),
        user_vocab_positives: false,
        ..config.clone()
    }
}

/// Uniform noise in `[-1, 1]` per coordinate.
pub fn random_embeddings(users: &[String], dim: usize, seed: u64) -> Result<UserEmbeddings> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors = (0..users.len() * dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    UserEmbeddings::new(Method::Random, dim, users.to_vec(), vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DatasetKind, Review};
    use crate::vocab::build_vocab;
    use std::collections::BTreeSet;

    fn review(doc: &str, user: &str, tokens: &[&str]) -> Review {
        Review {
            doc_id: doc.into(),
            user_id: user.into(),
            item_id: "i".into(),
            rating: 4.0,
            text: tokens.join(" "),
            genres: BTreeSet::from(["g".to_string()]),
            sentiment: None,
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
        }
    }

    fn words_for(vocab: &Vocabulary, rows: &[(&str, [f64; 2])]) -> EmbeddingTable {
        let mut values = vec![0.0; vocab.len() * 2];
        for (tok, v) in rows {
            let id = vocab.id(tok) as usize;
            values[id * 2..id * 2 + 2].copy_from_slice(v);
        }
        EmbeddingTable::from_values(TableKind::Word, 2, values).unwrap()
    }

    #[test]
    fn identical_tokens_give_that_vector() {
        let set = ReviewSet::new(DatasetKind::Yelp, vec![review("d", "u", &["w", "w", "w"])]);
        let vocab = build_vocab(&set, 10).unwrap();
        let words = words_for(&vocab, &[("w", [0.25, -1.5])]);
        let e = word2user(&set, &vocab, &words).unwrap();
        assert_eq!(e.get("u").unwrap(), [0.25, -1.5]);
    }

    #[test]
    fn opposite_vectors_cancel() {
        let set = ReviewSet::new(DatasetKind::Yelp, vec![review("d", "u", &["a", "b"])]);
        let vocab = build_vocab(&set, 10).unwrap();
        let words = words_for(&vocab, &[("a", [0.5, 2.0]), ("b", [-0.5, -2.0])]);
        assert_eq!(word2user(&set, &vocab, &words).unwrap().get("u").unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn mean_matches_per_occurrence_sum() {
        let set = ReviewSet::new(
            DatasetKind::Yelp,
            vec![
                review("d1", "u", &["a", "a"]),
                review("d2", "u", &["b", "zz"]),
                review("d3", "v", &["b", "a", "c"]),
            ],
        );
        // cap the vocabulary so "zz" falls back to the unknown row
        let vocab = build_vocab(&set, 3).unwrap();
        assert_eq!(vocab.id("zz"), Vocabulary::UNK_ID);
        let words = EmbeddingTable::from_values(
            TableKind::Word,
            2,
            (0..vocab.len() * 2).map(|i| (i as f64).sin()).collect(),
        )
        .unwrap();
        let e = word2user(&set, &vocab, &words).unwrap();
        for user in ["u", "v"] {
            let mut sum = [0.0; 2];
            let mut n = 0.0;
            for r in set.reviews.iter().filter(|r| r.user_id == user) {
                for t in &r.tokens {
                    let row = words.row(vocab.id(t) as usize);
                    sum[0] += row[0];
                    sum[1] += row[1];
                    n += 1.0;
                }
            }
            let got = e.get(user).unwrap();
            assert!((got[0] - sum[0] / n).abs() < 1e-15 && (got[1] - sum[1] / n).abs() < 1e-15);
        }
    }

    #[test]
    fn invariant_to_order_and_document_splits() {
        let a = ReviewSet::new(
            DatasetKind::Yelp,
            vec![review("d1", "u", &["a", "b", "c", "a"]), review("d2", "u", &["c"])],
        );
        let b = ReviewSet::new(
            DatasetKind::Yelp,
            vec![
                review("d3", "u", &["c"]),
                review("d1", "u", &["a", "b"]),
                review("d2", "u", &["c", "a"]),
            ],
        );
        let vocab = build_vocab(&a, 10).unwrap();
        let words = words_for(&vocab, &[("a", [1.0, 0.0]), ("b", [0.0, 1.0]), ("c", [0.5, 0.5])]);
        let ea = word2user(&a, &vocab, &words).unwrap();
        let eb = word2user(&b, &vocab, &words).unwrap();
        for (x, y) in ea.get("u").unwrap().iter().zip(eb.get("u").unwrap()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn embeddings_validate_shape_and_ids() {
        assert!(UserEmbeddings::new(Method::Mtl, 2, vec!["a".into()], vec![1.0]).is_err());
        assert!(UserEmbeddings::new(Method::Mtl, 1, vec!["a".into(), "a".into()], vec![1.0, 2.0]).is_err());
        assert!(UserEmbeddings::new(Method::Mtl, 1, vec!["a".into()], vec![f64::NAN]).is_err());
        let r = random_embeddings(&["a".into(), "b".into()], 3, 1).unwrap();
        assert_eq!(r, random_embeddings(&["a".into(), "b".into()], 3, 1).unwrap());
        assert!(r.vectors().iter().all(|v| v.abs() <= 1.0));
    }
}
