//! Review corpora: loading, normalization, anonymization and splitting.

mod io;
mod synthetic;
mod tokenize;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use io::{load_reviews, read_reviews, write_reviews, LoadMode, Loaded};
pub use synthetic::{generate_synthetic, SyntheticConfig, SyntheticCorpus};
pub use tokenize::{fold_case, tokenize};

/// Minimum document length kept by [`preprocess`].
pub const MIN_TOKENS: usize = 10;
/// Number of genres kept by [`preprocess`].
pub const MAX_GENRES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Sentiment::Positive, Sentiment::Negative, Sentiment::Neutral];

    pub fn index(self) -> usize {
        match self {
            Sentiment::Positive => 0,
            Sentiment::Negative => 1,
            Sentiment::Neutral => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Positive => "positive",
            Sentiment::Negative => "negative",
            Sentiment::Neutral => "neutral",
        }
    }
}

/// Which source a corpus came from. Selects the rating scale and the
/// rating-to-sentiment rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Amazon,
    Imdb,
    Yelp,
    Synthetic,
}

impl DatasetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetKind::Amazon => "amazon",
            DatasetKind::Imdb => "imdb",
            DatasetKind::Yelp => "yelp",
            DatasetKind::Synthetic => "synthetic",
        }
    }

    pub fn rating_scale(self) -> (f64, f64) {
        match self {
            DatasetKind::Imdb => (1.0, 10.0),
            _ => (1.0, 5.0),
        }
    }

    /// Maps a rating onto the three sentiment classes.
    ///
    /// Five-point scales: above 3 positive, below 3 negative. IMDb's ten-point
    /// scale: above 6 positive, below 5 negative. Everything in between is
    /// neutral.
    pub fn sentiment(self, rating: f64) -> Sentiment {
        let (pos, neg) = match self {
            DatasetKind::Imdb => (6.0, 5.0),
            _ => (3.0, 3.0),
        };
        if rating > pos {
            Sentiment::Positive
        } else if rating < neg {
            Sentiment::Negative
        } else {
            Sentiment::Neutral
        }
    }
}

impl std::str::FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "amazon" => Ok(DatasetKind::Amazon),
            "imdb" => Ok(DatasetKind::Imdb),
            "yelp" => Ok(DatasetKind::Yelp),
            "synthetic" => Ok(DatasetKind::Synthetic),
            other => Err(Error::invalid(format!("unknown dataset kind {other:?}"))),
        }
    }
}

/// One review document together with its author and the rated item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub doc_id: String,
    pub user_id: String,
    pub item_id: String,
    pub rating: f64,
    pub text: String,
    pub genres: BTreeSet<String>,
    /// Assigned by [`preprocess`]; absent on freshly loaded records.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentiment: Option<Sentiment>,
    #[serde(default)]
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReviewSet {
    pub reviews: Vec<Review>,
    pub dataset_kind: DatasetKind,
    /// Empty until [`preprocess`] has selected the most frequent genres.
    pub retained_genres: Vec<String>,
}

impl ReviewSet {
    pub fn new(dataset_kind: DatasetKind, reviews: Vec<Review>) -> Self {
        ReviewSet {
            reviews,
            dataset_kind,
            retained_genres: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    fn with_reviews(&self, reviews: Vec<Review>) -> ReviewSet {
        ReviewSet {
            reviews,
            dataset_kind: self.dataset_kind,
            retained_genres: self.retained_genres.clone(),
        }
    }

    /// Genres seen on any review, ordered by document count (descending)
    /// with ties broken lexicographically.
    pub fn genres_by_frequency(&self) -> Vec<(String, usize)> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for review in &self.reviews {
            for genre in &review.genres {
                *counts.entry(genre.as_str()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(String, usize)> =
            counts.into_iter().map(|(g, c)| (g.to_string(), c)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked
    }

    /// Checks that document ids are unique.
    pub fn check_unique_doc_ids(&self) -> Result<()> {
        let mut seen = HashMap::with_capacity(self.reviews.len());
        for (i, review) in self.reviews.iter().enumerate() {
            if let Some(prev) = seen.insert(review.doc_id.as_str(), i) {
                return Err(Error::invalid(format!(
                    "duplicate doc_id {:?} at reviews {prev} and {i}",
                    review.doc_id
                )));
            }
        }
        Ok(())
    }
}

/// Lowercases tokens, drops short documents, keeps the four most frequent
/// genres and assigns sentiment labels from ratings.
///
/// Genre frequency is counted per document over the documents that survive
/// the length filter. Applying this twice gives the same result as applying
/// it once.
pub fn preprocess(raw: &ReviewSet) -> Result<ReviewSet> {
    let (lo, hi) = raw.dataset_kind.rating_scale();
    let mut kept = Vec::with_capacity(raw.reviews.len());
    for review in &raw.reviews {
        if !(review.rating >= lo && review.rating <= hi) {
            return Err(Error::invalid(format!(
                "doc {:?}: rating {} outside [{lo}, {hi}]",
                review.doc_id, review.rating
            )));
        }
        if review.tokens.len() < MIN_TOKENS {
            continue;
        }
        let mut review = review.clone();
        for token in &mut review.tokens {
            *token = fold_case(token);
        }
        kept.push(review);
    }

    let staged = raw.with_reviews(kept);
    let retained: Vec<String> = staged
        .genres_by_frequency()
        .into_iter()
        .take(MAX_GENRES)
        .map(|(g, _)| g)
        .collect();
    let retained_set: BTreeSet<&str> = retained.iter().map(String::as_str).collect();

    let kind = raw.dataset_kind;
    let reviews = staged
        .reviews
        .into_iter()
        .filter_map(|mut review| {
            review.genres.retain(|g| retained_set.contains(g.as_str()));
            if review.genres.is_empty() {
                return None;
            }
            review.sentiment = Some(kind.sentiment(review.rating));
            Some(review)
        })
        .collect();

    Ok(ReviewSet {
        reviews,
        dataset_kind: kind,
        retained_genres: retained,
    })
}

fn salted_digest(salt: &str, field: &str, value: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(salt.as_bytes());
    hasher.update([0u8]);
    hasher.update(field.as_bytes());
    hasher.update([0u8]);
    hasher.update(value.as_bytes());
    // 64 bits of digest; collisions are detected below.
    hex::encode(&hasher.finalize()[..8])
}

struct DigestMap<'a> {
    field: &'static str,
    salt: &'a str,
    forward: HashMap<String, String>,
    reverse: HashMap<String, String>,
}

impl<'a> DigestMap<'a> {
    fn new(field: &'static str, salt: &'a str) -> Self {
        DigestMap {
            field,
            salt,
            forward: HashMap::new(),
            reverse: HashMap::new(),
        }
    }

    fn map(&mut self, value: &str) -> Result<String> {
        if let Some(d) = self.forward.get(value) {
            return Ok(d.clone());
        }
        let digest = salted_digest(self.salt, self.field, value);
        if let Some(other) = self.reverse.get(&digest) {
            return Err(Error::DigestCollision {
                first: other.clone(),
                second: value.to_string(),
            });
        }
        self.reverse.insert(digest.clone(), value.to_string());
        self.forward.insert(value.to_string(), digest.clone());
        Ok(digest)
    }
}

/// Replaces user, item and document ids by salted hex digests.
///
/// Each id field is hashed in its own namespace, so a user and an item
/// sharing a raw id do not share a digest.
pub fn anonymize(set: &ReviewSet, salt: &str) -> Result<ReviewSet> {
    if salt.is_empty() {
        return Err(Error::invalid("anonymization salt must not be empty"));
    }
    let mut users = DigestMap::new("user", salt);
    let mut items = DigestMap::new("item", salt);
    let mut docs = DigestMap::new("doc", salt);
    let mut reviews = Vec::with_capacity(set.reviews.len());
    for review in &set.reviews {
        let mut out = review.clone();
        out.user_id = users.map(&review.user_id)?;
        out.item_id = items.map(&review.item_id)?;
        out.doc_id = docs.map(&review.doc_id)?;
        reviews.push(out);
    }
    Ok(set.with_reviews(reviews))
}

/// Train/dev/test proportions plus the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train: f64, dev: f64, test: f64, seed: u64) -> Result<Self> {
        let spec = SplitSpec {
            train,
            dev,
            test,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let ratios = [self.train, self.dev, self.test];
        if ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::invalid(format!(
                "split ratios must be positive, got {ratios:?}"
            )));
        }
        let sum: f64 = ratios.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "split ratios must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }

    /// Partition sizes for `n` documents: dev and test take the floor of
    /// their share and train absorbs the remainder.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let share = |r: f64| ((n as f64) * r + 1e-9).floor() as usize;
        let dev = share(self.dev);
        let test = share(self.test);
        (n - dev - test, dev, test)
    }
}

pub struct Split {
    pub train: ReviewSet,
    pub dev: ReviewSet,
    pub test: ReviewSet,
}

/// Seeded shuffle followed by a three-way partition.
pub fn split(set: &ReviewSet, spec: &SplitSpec) -> Result<Split> {
    spec.validate()?;
    let n = set.len();
    if n < 10 {
        return Err(Error::invalid(format!(
            "need at least 10 documents to split, got {n}"
        )));
    }
    let (n_train, n_dev, n_test) = spec.sizes(n);
    if n_dev == 0 || n_test == 0 {
        return Err(Error::invalid(format!(
            "split of {n} documents leaves an empty partition ({n_train}/{n_dev}/{n_test})"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let take = |idx: &[usize]| {
        set.with_reviews(idx.iter().map(|&i| set.reviews[i].clone()).collect())
    };
    Ok(Split {
        train: take(&order[..n_train]),
        dev: take(&order[n_train..n_train + n_dev]),
        test: take(&order[n_train + n_dev..]),
    })
}
