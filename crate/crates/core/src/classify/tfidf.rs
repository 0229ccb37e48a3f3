use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::SparseRows;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_FEATURES: usize = 15_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TfidfConfig {
    pub min_n: usize,
    pub max_n: usize,
    pub max_features: usize,
}

impl Default for TfidfConfig {
    fn default() -> Self {
        TfidfConfig {
            min_n: 1,
            max_n: 3,
            max_features: DEFAULT_MAX_FEATURES,
        }
    }
}

/// Space-joined n-grams of `tokens` for every n in `min_n..=max_n`.
pub fn ngrams<S: AsRef<str>>(tokens: &[S], min_n: usize, max_n: usize) -> Vec<String> {
    let mut out = Vec::new();
    for n in min_n.max(1)..=max_n {
        for w in tokens.windows(n) {
            let mut g = String::from(w[0].as_ref());
            for t in &w[1..] {
                g.push(' ');
                g.push_str(t.as_ref());
            }
            out.push(g);
        }
    }
    out
}

/// Document-frequency-capped n-gram vocabulary with smoothed idf weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    pub config: TfidfConfig,
    /// Kept features in id order (lexicographic).
    features: Vec<String>,
    ids: HashMap<String, u32>,
    df: Vec<u64>,
    idf: Vec<f64>,
    n_docs: usize,
}

impl TfidfModel {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn id(&self, feature: &str) -> Option<u32> {
        self.ids.get(feature).copied()
    }

    pub fn df(&self, id: u32) -> u64 {
        self.df[id as usize]
    }

    pub fn idf(&self, id: u32) -> f64 {
        self.idf[id as usize]
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    /// Raw counts times idf, scaled to unit L2 norm per document. A document
    /// with no known feature maps to the zero row.
    pub fn transform<S: AsRef<str>>(&self, docs: &[Vec<S>]) -> Result<SparseRows> {
        let mut out = SparseRows::new(self.len());
        for doc in docs {
            let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
            for g in ngrams(doc, self.config.min_n, self.config.max_n) {
                if let Some(&id) = self.ids.get(&g) {
                    *counts.entry(id).or_insert(0.0) += 1.0;
                }
            }
            let (idx, mut val): (Vec<u32>, Vec<f64>) =
                counts.into_iter().map(|(id, c)| (id, c * self.idf[id as usize])).unzip();
            let norm = val.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                val.iter_mut().for_each(|v| *v /= norm);
            }
            out.push_row(&idx, &val)?;
        }
        Ok(out)
    }
}

/// Keeps the `max_features` n-grams with the highest document frequency
/// (ties broken lexicographically); `idf = ln((1 + N) / (1 + df)) + 1`.
pub fn fit_tfidf<S: AsRef<str>>(docs: &[Vec<S>], config: &TfidfConfig) -> Result<TfidfModel> {
    if docs.is_empty() {
        return Err(Error::invalid("cannot fit tf-idf on zero documents"));
    }
    if config.min_n == 0 || config.max_n < config.min_n || config.max_features == 0 {
        return Err(Error::invalid("invalid n-gram range or feature cap"));
    }
    let mut df: HashMap<String, u64> = HashMap::new();
    for doc in docs {
        let mut grams = ngrams(doc, config.min_n, config.max_n);
        grams.sort_unstable();
        grams.dedup();
        for g in grams {
            *df.entry(g).or_insert(0) += 1;
        }
    }
    if df.is_empty() {
        return Err(Error::invalid("tf-idf vocabulary is empty"));
    }
    let mut ranked: Vec<(String, u64)> = df.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(config.max_features);
    ranked.sort_unstable_by(|a, b| a.0.cmp(&b.0));

    let n = docs.len() as f64;
    let idf = ranked
        .iter()
        .map(|(_, d)| ((1.0 + n) / (1.0 + *d as f64)).ln() + 1.0)
        .collect();
    let ids = ranked.iter().enumerate().map(|(i, (g, _))| (g.clone(), i as u32)).collect();
    let (features, df) = ranked.into_iter().unzip();
    Ok(TfidfModel {
        config: *config,
        features,
        ids,
        df,
        idf,
        n_docs: docs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(s: &str) -> Vec<String> {
        s.split(' ').map(str::to_string).collect()
    }

    #[test]
    fn single_document_weights() {
        let m = fit_tfidf(&[doc("good food")], &TfidfConfig::default()).unwrap();
        assert_eq!(m.features(), ["food", "good", "good food"]);
        let x = m.transform(&[doc("good food")]).unwrap();
        let (_, val) = x.row(0);
        for v in val {
            assert!((v - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        }
        assert!(m.idf(0) == 1.0);
    }

    #[test]
    fn idf_formula() {
        let m = fit_tfidf(&[doc("a b"), doc("a c")], &TfidfConfig::default()).unwrap();
        assert_eq!(m.idf(m.id("a").unwrap()), 1.0);
        let expected = (3.0f64 / 2.0).ln() + 1.0;
        assert_eq!(m.idf(m.id("b").unwrap()), expected);
        assert!((expected - 1.4054651).abs() < 1e-7);
    }

    #[test]
    fn cap_keeps_most_frequent_with_lexicographic_ties() {
        let docs = [doc("x y"), doc("x z"), doc("y w")];
        let cfg = TfidfConfig {
            max_n: 1,
            max_features: 3,
            ..Default::default()
        };
        let m = fit_tfidf(&docs, &cfg).unwrap();
        assert_eq!(m.features(), ["w", "x", "y"]);
        assert!(m.len() <= 3);
        assert!((0..m.len() as u32).all(|i| m.idf(i) > 0.0));
    }

    #[test]
    fn unigram_transform_ignores_token_order() {
        let docs = [doc("a b c a"), doc("c d")];
        let m = fit_tfidf(&docs, &TfidfConfig { max_n: 1, ..Default::default() }).unwrap();
        let x = m.transform(&[doc("a b c a"), doc("a c a b"), doc("zz")]).unwrap();
        assert_eq!(x.row(0), x.row(1));
        assert_eq!(x.row(2).0.len(), 0);
    }

    #[test]
    fn rejects_empty_inputs() {
        let none: [Vec<String>; 0] = [];
        assert!(fit_tfidf(&none, &TfidfConfig::default()).is_err());
        assert!(fit_tfidf(&[Vec::<String>::new()], &TfidfConfig::default()).is_err());
    }
}
