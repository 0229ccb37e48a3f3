//! Sentiment classification from TF-IDF n-grams, optionally personalized by
//! appending the author's user vector to each document row.

mod logreg;
mod sparse;
mod tfidf;

pub use logreg::{objective, train_logreg, LogRegConfig, LogRegModel, N_CLASSES};
pub use sparse::SparseRows;
pub use tfidf::{fit_tfidf, ngrams, TfidfConfig, TfidfModel, DEFAULT_MAX_FEATURES};

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::UserEmbeddings;
use crate::corpus::{split, Review, ReviewSet, Sentiment, SplitSpec};
use crate::error::{Error, Result};

/// Duplicates randomly chosen rows of every minority class until all
/// present classes match the majority count. Original rows come first, in
/// order; duplicates follow.
pub fn oversample(x: &SparseRows, y: &[Sentiment], seed: u64) -> Result<(SparseRows, Vec<Sentiment>)> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (r, s) in y.iter().enumerate() {
        by_class.entry(s.index()).or_default().push(r);
    }
    if by_class.len() < 2 {
        return Err(Error::invalid("oversampling needs at least two classes"));
    }
    let majority = by_class.values().map(Vec::len).max().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<usize> = (0..y.len()).collect();
    for members in by_class.values() {
        for _ in members.len()..majority {
            rows.push(members[rng.gen_range(0..members.len())]);
        }
    }
    let labels = rows.iter().map(|&r| y[r]).collect();
    Ok((x.select(&rows), labels))
}

/// Appends each row's author vector, scaled to unit length, after the
/// document features. Zero vectors stay zero.
pub fn personalize<S: AsRef<str>>(x: &SparseRows, users: &[S], embeddings: &UserEmbeddings) -> Result<SparseRows> {
    if x.rows() != users.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: users.len(),
        });
    }
    let offset = x.cols() as u32;
    let dim = embeddings.dim();
    let mut out = SparseRows::new(x.cols() + dim);
    let mut idx = Vec::new();
    let mut val = Vec::new();
    for (r, user) in users.iter().enumerate() {
        let user = user.as_ref();
        let v = embeddings
            .get(user)
            .ok_or_else(|| Error::invalid(format!("no embedding for user {user:?}")))?;
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let (di, dv) = x.row(r);
        idx.clear();
        val.clear();
        idx.extend_from_slice(di);
        val.extend_from_slice(dv);
        if norm > 0.0 {
            for (j, a) in v.iter().enumerate() {
                if *a != 0.0 {
                    idx.push(offset + j as u32);
                    val.push(a / norm);
                }
            }
        }
        out.push_row(&idx, &val)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Per-class metrics weighted by class support.
    #[default]
    Weighted,
    /// Unweighted mean over the classes that occur in labels or predictions.
    Macro,
}

impl Averaging {
    pub fn as_str(self) -> &'static str {
        match self {
            Averaging::Weighted => "weighted",
            Averaging::Macro => "macro",
        }
    }
}

impl std::str::FromStr for Averaging {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weighted" => Ok(Averaging::Weighted),
            "macro" => Ok(Averaging::Macro),
            other => Err(Error::invalid(format!("unknown averaging {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub class: Sentiment,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub method: String,
    pub dataset: String,
    pub averaging: Averaging,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub per_class: Vec<ClassRow>,
    /// False when the classifier stopped at its iteration cap.
    pub converged: bool,
}

impl ClassifyReport {
    /// `method,dataset,class,precision,recall,f1,support`, one row per
    /// class and a final row for the average.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,dataset,class,precision,recall,f1,support\n");
        for r in &self.per_class {
            out.push_str(&format!(
                "{},{},{},{:.6},{:.6},{:.6},{}\n",
                self.method,
                self.dataset,
                r.class.as_str(),
                r.precision,
                r.recall,
                r.f1,
                r.support
            ));
        }
        let total: u64 = self.per_class.iter().map(|r| r.support).sum();
        out.push_str(&format!(
            "{},{},{}_avg,{:.6},{:.6},{:.6},{}\n",
            self.method,
            self.dataset,
            self.averaging.as_str(),
            self.precision,
            self.recall,
            self.f1,
            total
        ));
        out
    }
}

/// Precision, recall and F1 per class and averaged. Undefined ratios
/// (no predictions or no support) count as 0.
pub fn classification_report(
    truth: &[Sentiment],
    predicted: &[Sentiment],
    averaging: Averaging,
) -> Result<ClassifyReport> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::invalid("no predictions to evaluate"));
    }
    let mut confusion = [[0u64; N_CLASSES]; N_CLASSES];
    for (t, p) in truth.iter().zip(predicted) {
        confusion[t.index()][p.index()] += 1;
    }
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let mut per_class = Vec::new();
    for class in Sentiment::ALL {
        let c = class.index();
        let tp = confusion[c][c];
        let support: u64 = confusion[c].iter().sum();
        let predicted_c: u64 = (0..N_CLASSES).map(|t| confusion[t][c]).sum();
        if support == 0 && predicted_c == 0 {
            continue;
        }
        let precision = ratio(tp, predicted_c);
        let recall = ratio(tp, support);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassRow {
            class,
            precision,
            recall,
            f1,
            support,
        });
    }
    let n = truth.len() as f64;
    let avg = |f: fn(&ClassRow) -> f64| match averaging {
        Averaging::Weighted => per_class.iter().map(|r| f(r) * r.support as f64).sum::<f64>() / n,
        Averaging::Macro => per_class.iter().map(f).sum::<f64>() / per_class.len() as f64,
    };
    let accuracy = (0..N_CLASSES).map(|c| confusion[c][c]).sum::<u64>() as f64 / n;
    Ok(ClassifyReport {
        method: String::new(),
        dataset: String::new(),
        averaging,
        precision: avg(|r| r.precision),
        recall: avg(|r| r.recall),
        f1: avg(|r| r.f1),
        accuracy,
        per_class,
        converged: true,
    })
}

pub fn evaluate(model: &LogRegModel, x: &SparseRows, y: &[Sentiment], averaging: Averaging) -> Result<ClassifyReport> {
    let predicted = model.predict(x)?;
    let mut report = classification_report(y, &predicted, averaging)?;
    report.converged = model.converged;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub tfidf: TfidfConfig,
    pub logreg: LogRegConfig,
    pub train_ratio: f64,
    pub dev_ratio: f64,
    pub test_ratio: f64,
    /// Seeds both the split and the oversampling.
    pub seed: u64,
    pub averaging: Averaging,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            tfidf: TfidfConfig::default(),
            logreg: LogRegConfig::default(),
            train_ratio: 0.8,
            dev_ratio: 0.1,
            test_ratio: 0.1,
            seed: 42,
            averaging: Averaging::Weighted,
        }
    }
}

fn labels(reviews: &[Review]) -> Result<Vec<Sentiment>> {
    reviews
        .iter()
        .map(|r| {
            r.sentiment
                .ok_or_else(|| Error::invalid(format!("document {} has no sentiment label", r.doc_id)))
        })
        .collect()
}

/// Fits features and a classifier on the training split and scores the
/// test split. With `embeddings`, rows are personalized first.
pub fn run_classification(
    set: &ReviewSet,
    embeddings: Option<&UserEmbeddings>,
    config: &ClassifyConfig,
) -> Result<ClassifyReport> {
    let spec = SplitSpec::new(config.train_ratio, config.dev_ratio, config.test_ratio, config.seed)?;
    let parts = split(set, &spec)?;
    let mut report = run_on_split(&parts.train.reviews, &parts.test.reviews, embeddings, config)?;
    report.dataset = set.dataset_kind.as_str().to_string();
    Ok(report)
}

/// [`run_classification`] on an explicit train/test partition.
pub fn run_on_split(
    train: &[Review],
    test: &[Review],
    embeddings: Option<&UserEmbeddings>,
    config: &ClassifyConfig,
) -> Result<ClassifyReport> {
    let tokens = |rs: &[Review]| rs.iter().map(|r| r.tokens.clone()).collect::<Vec<_>>();
    let users = |rs: &[Review]| rs.iter().map(|r| r.user_id.clone()).collect::<Vec<_>>();
    let tfidf = fit_tfidf(&tokens(train), &config.tfidf)?;
    let mut x_train = tfidf.transform(&tokens(train))?;
    let mut x_test = tfidf.transform(&tokens(test))?;
    if let Some(emb) = embeddings {
        x_train = personalize(&x_train, &users(train), emb)?;
        x_test = personalize(&x_test, &users(test), emb)?;
    }
    let (x_bal, y_bal) = oversample(&x_train, &labels(train)?, config.seed)?;
    let model = train_logreg(&x_bal, &y_bal, &config.logreg)?;
    let mut report = evaluate(&model, &x_test, &labels(test)?, config.averaging)?;
    report.method = match embeddings {
        Some(e) => format!("lr-{}", e.method.as_str()),
        None => "lr".to_string(),
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::Method;

    use Sentiment::{Negative as N, Neutral as U, Positive as P};

    fn rows(n: usize) -> SparseRows {
        SparseRows::from_dense(1, &(0..n).map(|i| vec![i as f64 + 1.0]).collect::<Vec<_>>()).unwrap()
    }

    fn class_counts(y: &[Sentiment]) -> [usize; 3] {
        let mut c = [0; 3];
        for s in y {
            c[s.index()] += 1;
        }
        c
    }

    #[test]
    fn oversample_counts() {
        let y: Vec<Sentiment> = [P; 10].into_iter().chain([N; 10]).chain([U; 10]).collect();
        let (x2, y2) = oversample(&rows(30), &y, 1).unwrap();
        assert_eq!((x2.rows(), y2), (30, y.clone()));

        let y: Vec<Sentiment> = [P; 10].into_iter().chain([N; 5]).collect();
        let (_, y2) = oversample(&rows(15), &y, 1).unwrap();
        assert_eq!(class_counts(&y2), [10, 10, 0]);

        let y: Vec<Sentiment> = [P; 8].into_iter().chain([N; 3]).chain([U; 1]).collect();
        let (xa, ya) = oversample(&rows(12), &y, 7).unwrap();
        let (xb, yb) = oversample(&rows(12), &y, 7).unwrap();
        assert_eq!(class_counts(&ya), [8, 8, 8]);
        assert_eq!((xa.clone(), ya.clone()), (xb, yb));
        // originals retained, in order
        for r in 0..12 {
            assert_eq!(xa.row(r), rows(12).row(r));
        }
        // every duplicate copies a row of its own class
        for r in 12..24 {
            let src = xa.row(r).1[0] as usize - 1;
            assert_eq!(y[src], ya[r]);
        }
        assert!(oversample(&rows(3), &[P, P, P], 1).is_err());
    }

    #[test]
    fn personalize_appends_unit_user_vectors() {
        let emb = UserEmbeddings::new(Method::Mtl, 2, vec!["a".into(), "z".into()], vec![3.0, 4.0, 0.0, 0.0]).unwrap();
        let x = SparseRows::from_dense(2, &[vec![0.5, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let p = personalize(&x, &["a", "z", "a"], &emb).unwrap();
        assert_eq!(p.cols(), 4);
        assert_eq!(p.to_dense_row(0), [0.5, 0.0, 0.6, 0.8]);
        assert_eq!(p.to_dense_row(1), [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(p.to_dense_row(0)[2..], p.to_dense_row(2)[2..]);
        match personalize(&x, &["a", "b", "a"], &emb) {
            Err(Error::InvalidInput { message }) => assert!(message.contains("\"b\"")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn perfect_predictions_score_one() {
        let y = [P, N, U, P, P];
        let r = classification_report(&y, &y, Averaging::Weighted).unwrap();
        assert_eq!((r.precision, r.recall, r.f1, r.accuracy), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn hand_computed_confusion() {
        // truth P P P P N N N U U U, predicted P P P N N N P U N U
        let truth = [P, P, P, P, N, N, N, U, U, U];
        let pred = [P, P, P, N, N, N, P, U, N, U];
        let r = classification_report(&truth, &pred, Averaging::Weighted).unwrap();
        // P: tp 3, predicted 4, support 4; N: tp 2, predicted 4, support 3;
        // U: tp 2, predicted 2, support 3
        let (pp, pr) = (3.0 / 4.0, 3.0 / 4.0);
        let (np, nr) = (2.0 / 4.0, 2.0 / 3.0);
        let (up, ur) = (1.0, 2.0 / 3.0);
        let f = |p: f64, r: f64| 2.0 * p * r / (p + r);
        assert_eq!(r.precision, (pp * 4.0 + np * 3.0 + up * 3.0) / 10.0);
        assert_eq!(r.recall, (pr * 4.0 + nr * 3.0 + ur * 3.0) / 10.0);
        assert_eq!(r.f1, (f(pp, pr) * 4.0 + f(np, nr) * 3.0 + f(up, ur) * 3.0) / 10.0);
        let m = classification_report(&truth, &pred, Averaging::Macro).unwrap();
        assert_eq!(m.f1, (f(pp, pr) + f(np, nr) + f(up, ur)) / 3.0);
        assert!(r.to_csv().ends_with("weighted_avg,0.750000,0.700000,0.711429,10\n"), "{}", r.to_csv());
    }
}
