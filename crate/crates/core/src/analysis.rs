//! Exploratory comparisons across genre domains: overlap of the most
//! informative n-gram features per genre, and how well a sentiment
//! classifier trained on one genre transfers to the others.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{
    classification_report, fit_tfidf, ngrams, train_logreg, Averaging, LogRegConfig, TfidfConfig,
};
use crate::corpus::{Review, ReviewSet, Sentiment};
use crate::error::{Error, Result};

pub const DEFAULT_TOP_K: usize = 1000;
/// Features seen in fewer documents are dropped from the unified vocabulary.
pub const MIN_DOC_FREQ: u64 = 2;

/// Mutual information in nats of a contingency table of counts
/// (rows: feature values, columns: classes). Empty cells contribute 0.
pub fn mutual_information_counts(table: &[Vec<u64>]) -> f64 {
    let total: u64 = table.iter().flatten().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let cols = table.iter().map(Vec::len).max().unwrap_or(0);
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|c| table.iter().map(|r| r.get(c).copied().unwrap_or(0)).sum::<u64>() as f64)
        .collect();
    let mut mi = 0.0;
    for (r, row) in table.iter().enumerate() {
        for (c, &count) in row.iter().enumerate() {
            if count > 0 {
                let joint = count as f64;
                mi += joint / n * (joint * n / (row_sums[r] * col_sums[c])).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Mutual information between a binary feature and a class label.
pub fn mutual_information(presence: &[bool], labels: &[usize]) -> Result<f64> {
    if presence.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: presence.len(),
            actual: labels.len(),
        });
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0u64; classes]; 2];
    for (&x, &y) in presence.iter().zip(labels) {
        table[usize::from(x)][y] += 1;
    }
    Ok(mutual_information_counts(&table))
}

/// Label the features of a genre are scored against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MiTarget {
    /// Review sentiment, within the genre's documents.
    #[default]
    Sentiment,
    /// Membership in the genre, over the whole corpus.
    Genre,
}

impl std::str::FromStr for MiTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sentiment" => Ok(MiTarget::Sentiment),
            "genre" => Ok(MiTarget::Genre),
            other => Err(Error::invalid(format!("unknown MI target {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub genre: String,
    /// Best first; ties in score are ordered lexicographically.
    pub features: Vec<(String, f64)>,
}

impl FeatureSet {
    pub fn names(&self) -> BTreeSet<&str> {
        self.features.iter().map(|(f, _)| f.as_str()).collect()
    }
}

/// 1–3-gram features seen in at least [`MIN_DOC_FREQ`] documents, with each
/// document's feature ids.
pub struct FeatureIndex {
    features: Vec<String>,
    doc_features: Vec<Vec<u32>>,
}

impl FeatureIndex {
    pub fn build(set: &ReviewSet) -> Self {
        let grams: Vec<Vec<String>> = set
            .reviews
            .iter()
            .map(|r| {
                let mut g = ngrams(&r.tokens, 1, 3);
                g.sort_unstable();
                g.dedup();
                g
            })
            .collect();
        let mut df: HashMap<&str, u64> = HashMap::new();
        for g in grams.iter().flatten() {
            *df.entry(g).or_insert(0) += 1;
        }
        let mut features: Vec<String> = df
            .into_iter()
            .filter(|&(_, d)| d >= MIN_DOC_FREQ)
            .map(|(g, _)| g.to_string())
            .collect();
        features.sort_unstable();
        let ids: HashMap<&str, u32> = features.iter().enumerate().map(|(i, f)| (f.as_str(), i as u32)).collect();
        let doc_features = grams
            .iter()
            .map(|g| g.iter().filter_map(|x| ids.get(x.as_str()).copied()).collect())
            .collect();
        FeatureIndex { features, doc_features }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn contains(&self, feature: &str) -> bool {
        self.features.binary_search_by(|f| f.as_str().cmp(feature)).is_ok()
    }
}

fn sentiment_of(r: &Review) -> Result<usize> {
    r.sentiment
        .map(Sentiment::index)
        .ok_or_else(|| Error::invalid(format!("document {} has no sentiment label", r.doc_id)))
}

/// The `k` features with the highest mutual information for `genre`.
/// Candidates are the unified-vocabulary features occurring in at least one
/// of the genre's documents.
pub fn top_features_per_genre(
    set: &ReviewSet,
    index: &FeatureIndex,
    genre: &str,
    k: usize,
    target: MiTarget,
) -> Result<FeatureSet> {
    if !set.retained_genres.iter().any(|g| g == genre) {
        return Err(Error::invalid(format!("genre {genre:?} is not retained")));
    }
    let in_genre: Vec<bool> = set.reviews.iter().map(|r| r.genres.contains(genre)).collect();
    let n_genre = in_genre.iter().filter(|&&b| b).count();
    if n_genre < 2 {
        return Err(Error::invalid(format!("genre {genre:?} has {n_genre} documents, need 2")));
    }
    // docs scored, and their class
    let scored: Vec<(usize, usize)> = match target {
        MiTarget::Sentiment => set
            .reviews
            .iter()
            .enumerate()
            .filter(|(d, _)| in_genre[*d])
            .map(|(d, r)| Ok((d, sentiment_of(r)?)))
            .collect::<Result<_>>()?,
        MiTarget::Genre => (0..set.len()).map(|d| (d, usize::from(in_genre[d]))).collect(),
    };
    let classes = 3;
    let mut class_totals = vec![0u64; classes];
    for &(_, y) in &scored {
        class_totals[y] += 1;
    }
    let mut present: BTreeMap<u32, Vec<u64>> = BTreeMap::new();
    for &(d, y) in &scored {
        for &f in &index.doc_features[d] {
            present.entry(f).or_insert_with(|| vec![0; classes])[y] += 1;
        }
    }
    // candidates must occur inside the genre
    let candidates: BTreeSet<u32> = index
        .doc_features
        .iter()
        .zip(&in_genre)
        .filter(|(_, &g)| g)
        .flat_map(|(fs, _)| fs.iter().copied())
        .collect();
    let mut scores: Vec<(String, f64)> = present
        .into_iter()
        .filter(|(f, _)| candidates.contains(f))
        .map(|(f, with)| {
            let without: Vec<u64> = class_totals.iter().zip(&with).map(|(t, w)| t - w).collect();
            (index.features[f as usize].clone(), mutual_information_counts(&[without, with]))
        })
        .collect();
    scores.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scores.truncate(k);
    Ok(FeatureSet {
        genre: genre.to_string(),
        features: scores,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Overlap,
    CrossgroupF1,
}

/// A genre × genre matrix; rows index the first genre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainMatrix {
    pub kind: MatrixKind,
    pub genres: Vec<String>,
    /// Row-major.
    pub values: Vec<f64>,
}

impl DomainMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.genres.len() + j]
    }

    /// Header row and first column carry the genre names.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("genre");
        for g in &self.genres {
            out.push(',');
            out.push_str(g);
        }
        out.push('\n');
        for (i, g) in self.genres.iter().enumerate() {
            out.push_str(g);
            for j in 0..self.genres.len() {
                out.push_str(&format!(",{:.6}", self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }
}

/// `M[i][j] = |F_i ∩ F_j| / max(|F_i|, |F_j|)`, with a unit diagonal.
pub fn overlap_matrix(sets: &[FeatureSet]) -> Result<DomainMatrix> {
    if sets.len() < 2 {
        return Err(Error::invalid("overlap needs at least two genres"));
    }
    let names: Vec<BTreeSet<&str>> = sets.iter().map(FeatureSet::names).collect();
    let g = sets.len();
    let mut values = vec![0.0; g * g];
    for i in 0..g {
        values[i * g + i] = 1.0;
        for j in i + 1..g {
            let denom = names[i].len().max(names[j].len());
            let v = if denom == 0 {
                0.0
            } else {
                names[i].intersection(&names[j]).count() as f64 / denom as f64
            };
            values[i * g + j] = v;
            values[j * g + i] = v;
        }
    }
    Ok(DomainMatrix {
        kind: MatrixKind::Overlap,
        genres: sets.iter().map(|s| s.genre.clone()).collect(),
        values,
    })
}

/// Per-genre feature sets and their overlap matrix, over the retained genres.
pub fn analyze_overlap(set: &ReviewSet, k: usize, target: MiTarget) -> Result<(Vec<FeatureSet>, DomainMatrix)> {
    let index = FeatureIndex::build(set);
    let sets = set
        .retained_genres
        .iter()
        .map(|g| top_features_per_genre(set, &index, g, k, target))
        .collect::<Result<Vec<_>>>()?;
    let matrix = overlap_matrix(&sets)?;
    Ok((sets, matrix))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossgroupConfig {
    pub test_ratio: f64,
    pub tfidf: TfidfConfig,
    pub logreg: LogRegConfig,
    pub seed: u64,
}

impl Default for CrossgroupConfig {
    fn default() -> Self {
        CrossgroupConfig {
            test_ratio: 0.2,
            tfidf: TfidfConfig::default(),
            logreg: LogRegConfig::default(),
            seed: 42,
        }
    }
}

/// Minimum document count per group after downsampling.
pub const MIN_GROUP_DOCS: usize = 10;

/// Document indices per retained genre, downsampled so every group has the
/// same number of documents. Users are sampled first (down to the smallest
/// group's user count), then items among the kept users' reviews (down to
/// the smallest item count), and finally documents are trimmed to the
/// smallest remaining document count.
pub fn downsample_groups(set: &ReviewSet, seed: u64) -> Result<Vec<(String, Vec<usize>)>> {
    let genres = &set.retained_genres;
    if genres.len() < 2 {
        return Err(Error::invalid("cross-group analysis needs at least two genres"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: Vec<Vec<usize>> = genres
        .iter()
        .map(|g| (0..set.len()).filter(|&d| set.reviews[d].genres.contains(g)).collect())
        .collect();
    let distinct = |docs: &[usize], f: fn(&Review) -> &str| -> BTreeSet<String> {
        docs.iter().map(|&d| f(&set.reviews[d]).to_string()).collect()
    };

    let min_users = groups.iter().map(|d| distinct(d, user_of).len()).min().unwrap_or(0);
    let mut kept: Vec<Vec<usize>> = groups
        .iter()
        .map(|docs| {
            let mut users: Vec<String> = distinct(docs, user_of).into_iter().collect();
            users.shuffle(&mut rng);
            let users: BTreeSet<&str> = users.iter().take(min_users).map(String::as_str).collect();
            docs.iter().copied().filter(|&d| users.contains(user_of(&set.reviews[d]))).collect()
        })
        .collect();
    let min_items = kept.iter().map(|d: &Vec<usize>| distinct(d, item_of).len()).min().unwrap_or(0);
    for docs in kept.iter_mut() {
        let mut items: Vec<String> = distinct(docs, item_of).into_iter().collect();
        items.shuffle(&mut rng);
        let items: BTreeSet<&str> = items.iter().take(min_items).map(String::as_str).collect();
        docs.retain(|&d| items.contains(item_of(&set.reviews[d])));
    }
    let min_docs = kept.iter().map(Vec::len).min().unwrap_or(0);
    for (g, docs) in genres.iter().zip(kept.iter_mut()) {
        if min_docs < MIN_GROUP_DOCS {
            let short = genres
                .iter()
                .zip(kept_lens(&kept))
                .find(|(_, n)| *n == min_docs)
                .map_or(g.as_str(), |(name, _)| name.as_str());
            return Err(Error::invalid(format!(
                "genre {short:?} keeps {min_docs} documents after downsampling, need {MIN_GROUP_DOCS}"
            )));
        }
        docs.shuffle(&mut rng);
        docs.truncate(min_docs);
        docs.sort_unstable();
    }
    Ok(genres.iter().cloned().zip(kept).collect())
}

fn user_of(r: &Review) -> &str {
    &r.user_id
}

fn item_of(r: &Review) -> &str {
    &r.item_id
}

fn kept_lens(kept: &[Vec<usize>]) -> Vec<usize> {
    kept.iter().map(Vec::len).collect()
}

/// Trains one classifier per genre group and scores it on every group's
/// held-out documents. Entry `(i, j)` is the weighted F1 of the model
/// trained on genre `i` and tested on genre `j`.
pub fn crossgroup_grid(set: &ReviewSet, config: &CrossgroupConfig) -> Result<DomainMatrix> {
    if !(config.test_ratio > 0.0 && config.test_ratio < 1.0) {
        return Err(Error::invalid("test_ratio must lie in (0, 1)"));
    }
    let groups = downsample_groups(set, config.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut parts = Vec::with_capacity(groups.len());
    for (g, docs) in &groups {
        let mut docs = docs.clone();
        docs.shuffle(&mut rng);
        let n_test = (docs.len() as f64 * config.test_ratio + 1e-9).floor() as usize;
        if n_test == 0 || n_test == docs.len() {
            return Err(Error::invalid(format!("genre {g:?} is too small to split")));
        }
        let test = docs.split_off(docs.len() - n_test);
        parts.push((docs, test));
    }
    let tokens = |docs: &[usize]| docs.iter().map(|&d| set.reviews[d].tokens.clone()).collect::<Vec<_>>();
    let labels = |docs: &[usize]| docs.iter().map(|&d| sentiment_of(&set.reviews[d]).map(|i| Sentiment::ALL[i])).collect::<Result<Vec<_>>>();

    let g = groups.len();
    let mut values = vec![0.0; g * g];
    for (i, (train, _)) in parts.iter().enumerate() {
        let tfidf = fit_tfidf(&tokens(train), &config.tfidf)?;
        let model = train_logreg(&tfidf.transform(&tokens(train))?, &labels(train)?, &config.logreg)?;
        for (j, (_, test)) in parts.iter().enumerate() {
            let predicted = model.predict(&tfidf.transform(&tokens(test))?)?;
            values[i * g + j] = classification_report(&labels(test)?, &predicted, Averaging::Weighted)?.f1;
        }
    }
    Ok(DomainMatrix {
        kind: MatrixKind::CrossgroupF1,
        genres: groups.into_iter().map(|(name, _)| name).collect(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DatasetKind;
    use std::f64::consts::LN_2;

    fn review(doc: usize, genre: &str, sentiment: Sentiment, text: &str) -> Review {
        Review {
            doc_id: format!("d{doc}"),
            user_id: format!("u{}", doc % 7),
            item_id: format!("{genre}-i{}", doc % 3),
            rating: 3.0,
            text: text.into(),
            genres: BTreeSet::from([genre.to_string()]),
            sentiment: Some(sentiment),
            tokens: text.split(' ').map(str::to_string).collect(),
        }
    }

    #[test]
    fn mi_examples() {
        assert_eq!(mutual_information(&[true, false, true, false], &[0, 0, 1, 1]).unwrap(), 0.0);
        let mi = mutual_information(&[true, true, false, false], &[0, 0, 1, 1]).unwrap();
        assert!((mi - LN_2).abs() < 1e-15);
        // 2·(3/8)·ln(3/2) + 2·(1/8)·ln(1/2)
        let expected = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        assert!((mutual_information_counts(&[vec![3, 1], vec![1, 3]]) - expected).abs() < 1e-15);
        assert!((expected - 0.1308120).abs() < 1e-7);
        assert!(mutual_information(&[true], &[0, 1]).is_err());
    }

    #[test]
    fn label_dependent_feature_ranks_first() {
        use Sentiment::{Negative as N, Positive as P};
        let mut reviews = Vec::new();
        for i in 0..12 {
            let s = if i % 2 == 0 { P } else { N };
            let text = if s == N { "the refund was slow" } else { "the meal was slow" };
            reviews.push(review(i, "food", s, text));
        }
        reviews.push(review(12, "food", P, "unique tokens only"));
        let mut set = ReviewSet::new(DatasetKind::Yelp, reviews);
        set.retained_genres = vec!["food".into()];
        let index = FeatureIndex::build(&set);
        assert!(!index.contains("unique"));
        let fs = top_features_per_genre(&set, &index, "food", 1000, MiTarget::Sentiment).unwrap();
        let pos = |f: &str| fs.features.iter().position(|(x, _)| x == f).unwrap();
        assert!(pos("refund") < pos("the"));
        assert!(fs.features.iter().all(|(f, _)| f != "unique"));
        assert!(fs.features.windows(2).all(|w| w[0].1 >= w[1].1));
        assert!(fs.features.len() <= index.len());
        assert!(top_features_per_genre(&set, &index, "drama", 10, MiTarget::Sentiment).is_err());
    }

    #[test]
    fn overlap_examples() {
        let fs = |g: &str, names: std::ops::Range<usize>| FeatureSet {
            genre: g.into(),
            features: names.map(|i| (format!("f{i:04}"), 0.0)).collect(),
        };
        let same = overlap_matrix(&[fs("a", 0..10), fs("b", 0..10)]).unwrap();
        assert!(same.values.iter().all(|&v| v == 1.0));
        let apart = overlap_matrix(&[fs("a", 0..10), fs("b", 10..20)]).unwrap();
        assert_eq!((apart.get(0, 1), apart.get(1, 0), apart.get(0, 0)), (0.0, 0.0, 1.0));
        let half = overlap_matrix(&[fs("a", 0..1000), fs("b", 500..1500), fs("c", 0..1)]).unwrap();
        assert_eq!(half.get(0, 1), 0.5);
        assert_eq!(half.get(0, 2), half.get(2, 0));
        assert_eq!(half.to_csv().lines().next(), Some("genre,a,b,c"));
        assert!(overlap_matrix(&[fs("a", 0..1)]).is_err());
    }

    #[test]
    fn single_genre_grid_is_rejected() {
        let mut set = ReviewSet::new(
            DatasetKind::Yelp,
            (0..20).map(|i| review(i, "food", Sentiment::Positive, "a b c")).collect(),
        );
        set.retained_genres = vec!["food".into()];
        assert!(crossgroup_grid(&set, &CrossgroupConfig::default()).is_err());
    }
}
