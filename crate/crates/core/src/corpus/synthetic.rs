//! Seeded synthetic review corpora with planted genre and sentiment structure.
//!
//! Users are assigned one dominant genre round-robin and mostly review items
//! of that genre. Documents mix three vocabularies: topical words of the
//! rated item's genre, sentiment words (genre-specific or shared), and a
//! shared filler vocabulary. Ratings follow a per-user bias, so a user's
//! history predicts the sentiment of their next review.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, WeightedIndex};
use serde::{Deserialize, Serialize};

use super::{DatasetKind, Review, ReviewSet, Sentiment, MAX_GENRES, MIN_TOKENS};
use crate::error::{Error, Result};

const GENRE_NAMES: [&str; MAX_GENRES] = ["action", "comedy", "drama", "thriller"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n_users: usize,
    pub n_items: usize,
    pub n_genres: usize,
    pub docs_per_user: usize,
    pub vocab_per_genre: usize,
    /// Probability that a review targets a uniformly random item instead of
    /// one from the user's genre.
    pub noise_rate: f64,
    pub seed: u64,
    pub shared_vocab: usize,
    /// Size of each sentiment lexicon (per class, per genre and shared).
    pub sentiment_vocab: usize,
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub p_sentiment_word: f64,
    pub p_genre_word: f64,
    /// Probability that a sentiment word matches the document's label.
    pub sentiment_fidelity: f64,
    /// Probability that a sentiment word comes from the genre's own lexicon.
    pub genre_sentiment_share: f64,
    /// Standard deviation of rating noise around `3 + 2 * bias`.
    pub rating_noise: f64,
    /// Word ranks within each vocabulary follow `1 / rank^s`; 0 draws
    /// uniformly.
    pub zipf_exponent: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_users: 200,
            n_items: 40,
            n_genres: 4,
            docs_per_user: 5,
            vocab_per_genre: 40,
            noise_rate: 0.05,
            seed: 42,
            shared_vocab: 60,
            sentiment_vocab: 6,
            min_tokens: 12,
            max_tokens: 20,
            p_sentiment_word: 0.12,
            p_genre_word: 0.45,
            sentiment_fidelity: 0.6,
            genre_sentiment_share: 0.8,
            rating_noise: 0.8,
            zipf_exponent: 0.0,
        }
    }
}

impl SyntheticConfig {
    /// Users' sentiment bias dominates individual reviews: one shared
    /// sentiment lexicon, used often, with weak per-review fidelity.
    pub fn sentiment_bias() -> Self {
        SyntheticConfig {
            p_sentiment_word: 0.25,
            genre_sentiment_share: 0.0,
            sentiment_fidelity: 0.4,
            ..Default::default()
        }
    }

    /// No word is shared between genres: no filler words and only
    /// genre-specific sentiment words.
    pub fn disjoint_genres() -> Self {
        SyntheticConfig {
            p_sentiment_word: 0.3,
            p_genre_word: 0.7,
            genre_sentiment_share: 1.0,
            ..Default::default()
        }
    }

    /// Every genre draws from the same vocabulary.
    pub fn shared_vocabulary() -> Self {
        SyntheticConfig {
            p_genre_word: 0.0,
            genre_sentiment_share: 0.0,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let counts = [
            ("n_users", self.n_users),
            ("n_items", self.n_items),
            ("n_genres", self.n_genres),
            ("docs_per_user", self.docs_per_user),
            ("vocab_per_genre", self.vocab_per_genre),
            ("shared_vocab", self.shared_vocab),
            ("sentiment_vocab", self.sentiment_vocab),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::invalid(format!("{name} must be at least 1")));
        }
        if self.n_genres > MAX_GENRES {
            return Err(Error::invalid(format!(
                "n_genres must be at most {MAX_GENRES}, got {}",
                self.n_genres
            )));
        }
        if self.n_items < self.n_genres {
            return Err(Error::invalid("every genre needs at least one item"));
        }
        if self.min_tokens < MIN_TOKENS || self.max_tokens < self.min_tokens {
            return Err(Error::invalid(format!(
                "document length range {}..={} cannot guarantee {MIN_TOKENS} tokens",
                self.min_tokens, self.max_tokens
            )));
        }
        let probs = [
            self.noise_rate,
            self.p_sentiment_word,
            self.p_genre_word,
            self.sentiment_fidelity,
            self.genre_sentiment_share,
        ];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p))
            || self.p_sentiment_word + self.p_genre_word > 1.0
        {
            return Err(Error::invalid("synthetic probabilities must lie in [0, 1]"));
        }
        if !(self.zipf_exponent >= 0.0 && self.zipf_exponent.is_finite()) {
            return Err(Error::invalid("zipf_exponent must be finite and non-negative"));
        }
        if !(self.rating_noise >= 0.0 && self.rating_noise.is_finite()) {
            return Err(Error::invalid("rating_noise must be finite and non-negative"));
        }
        Ok(())
    }
}

/// A generated corpus plus the planted ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub set: ReviewSet,
    pub user_genre: BTreeMap<String, String>,
    /// Per-user sentiment bias in [-1, 1].
    pub user_bias: BTreeMap<String, f64>,
}

enum Ranks {
    Uniform(usize),
    Zipf(WeightedIndex<f64>),
}

impl Ranks {
    fn new(n: usize, exponent: f64) -> Result<Self> {
        if exponent == 0.0 {
            return Ok(Ranks::Uniform(n));
        }
        let weights = (1..=n).map(|r| (r as f64).powf(-exponent));
        WeightedIndex::new(weights)
            .map(Ranks::Zipf)
            .map_err(|e| Error::invalid(e.to_string()))
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        match self {
            Ranks::Uniform(n) => rng.gen_range(0..*n),
            Ranks::Zipf(w) => w.sample(rng),
        }
    }
}

fn sentiment_tag(s: Sentiment) -> &'static str {
    match s {
        Sentiment::Positive => "pos",
        Sentiment::Negative => "neg",
        Sentiment::Neutral => "meh",
    }
}

pub fn generate_synthetic(config: &SyntheticConfig) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let genres = &GENRE_NAMES[..config.n_genres];
    let noise = Normal::new(0.0, config.rating_noise)
        .map_err(|e| Error::invalid(e.to_string()))?;

    let sentiment_ranks = Ranks::new(config.sentiment_vocab, config.zipf_exponent)?;
    let genre_ranks = Ranks::new(config.vocab_per_genre, config.zipf_exponent)?;
    let shared_ranks = Ranks::new(config.shared_vocab, config.zipf_exponent)?;

    let item_genre: Vec<usize> = (0..config.n_items).map(|p| p % config.n_genres).collect();
    let items_of_genre: Vec<Vec<usize>> = (0..config.n_genres)
        .map(|g| (0..config.n_items).filter(|&p| item_genre[p] == g).collect())
        .collect();

    let mut user_genre = BTreeMap::new();
    let mut user_bias = BTreeMap::new();
    let mut reviews = Vec::with_capacity(config.n_users * config.docs_per_user);

    for u in 0..config.n_users {
        let user_id = format!("u{u:04}");
        let genre = u % config.n_genres;
        let bias: f64 = rng.gen_range(-1.0..=1.0);
        user_genre.insert(user_id.clone(), genres[genre].to_string());
        user_bias.insert(user_id.clone(), bias);

        for _ in 0..config.docs_per_user {
            let item = if rng.gen::<f64>() < config.noise_rate {
                rng.gen_range(0..config.n_items)
            } else {
                let pool = &items_of_genre[genre];
                pool[rng.gen_range(0..pool.len())]
            };
            let item_genre_name = genres[item_genre[item]];

            let latent = 3.0 + 2.0 * bias + noise.sample(&mut rng);
            let rating = latent.round().clamp(1.0, 5.0);
            let sentiment = DatasetKind::Synthetic.sentiment(rating);

            let len = rng.gen_range(config.min_tokens..=config.max_tokens);
            let mut tokens = Vec::with_capacity(len);
            for _ in 0..len {
                let r: f64 = rng.gen();
                let token = if r < config.p_sentiment_word {
                    let class = if rng.gen::<f64>() < config.sentiment_fidelity {
                        sentiment
                    } else {
                        Sentiment::ALL[rng.gen_range(0..3)]
                    };
                    let j = sentiment_ranks.sample(&mut rng);
                    if rng.gen::<f64>() < config.genre_sentiment_share {
                        format!("{item_genre_name}{}{j}", sentiment_tag(class))
                    } else {
                        format!("{}{j}", sentiment_tag(class))
                    }
                } else if r < config.p_sentiment_word + config.p_genre_word {
                    format!("{item_genre_name}{}", genre_ranks.sample(&mut rng))
                } else {
                    format!("w{}", shared_ranks.sample(&mut rng))
                };
                tokens.push(token);
            }

            reviews.push(Review {
                doc_id: format!("d{:06}", reviews.len()),
                user_id: user_id.clone(),
                item_id: format!("p{item:04}"),
                rating,
                text: tokens.join(" "),
                genres: BTreeSet::from([item_genre_name.to_string()]),
                sentiment: Some(sentiment),
                tokens,
            });
        }
    }

    let mut set = ReviewSet::new(DatasetKind::Synthetic, reviews);
    set.retained_genres = set.genres_by_frequency().into_iter().map(|(g, _)| g).collect();
    Ok(SyntheticCorpus {
        set,
        user_genre,
        user_bias,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::preprocess;

    #[test]
    fn zero_noise_keeps_users_in_genre() {
        let cfg = SyntheticConfig {
            noise_rate: 0.0,
            ..Default::default()
        };
        let corpus = generate_synthetic(&cfg).unwrap();
        for review in &corpus.set.reviews {
            let g = &corpus.user_genre[&review.user_id];
            assert!(review.genres.contains(g));
        }
    }

    #[test]
    fn genres_are_balanced() {
        let corpus = generate_synthetic(&SyntheticConfig::default()).unwrap();
        let mut per_genre: BTreeMap<&str, usize> = BTreeMap::new();
        for g in corpus.user_genre.values() {
            *per_genre.entry(g).or_default() += 1;
        }
        assert_eq!(per_genre.len(), 4);
        assert!(per_genre.values().all(|&n| n == 50));
    }

    #[test]
    fn full_noise_cross_genre_fraction() {
        let cfg = SyntheticConfig {
            n_users: 2000,
            docs_per_user: 5,
            noise_rate: 1.0,
            seed: 9,
            ..Default::default()
        };
        let corpus = generate_synthetic(&cfg).unwrap();
        assert_eq!(corpus.set.len(), 10_000);
        let cross = corpus
            .set
            .reviews
            .iter()
            .filter(|r| !r.genres.contains(&corpus.user_genre[&r.user_id]))
            .count() as f64
            / corpus.set.len() as f64;
        assert!((cross - 0.75).abs() < 0.02, "cross-genre fraction {cross}");
    }

    #[test]
    fn deterministic_and_already_preprocessed() {
        let a = generate_synthetic(&SyntheticConfig::default()).unwrap();
        let b = generate_synthetic(&SyntheticConfig::default()).unwrap();
        assert_eq!(a.set, b.set);
        assert_eq!(preprocess(&a.set).unwrap(), a.set);
        assert!(a.set.reviews.iter().all(|r| r.tokens.len() >= MIN_TOKENS));
    }

    #[test]
    fn zipf_ranks_skew_word_frequencies() {
        let cfg = SyntheticConfig {
            zipf_exponent: 1.0,
            ..SyntheticConfig::shared_vocabulary()
        };
        let corpus = generate_synthetic(&cfg).unwrap();
        let count = |w: &str| corpus.set.reviews.iter().flat_map(|r| &r.tokens).filter(|t| *t == w).count();
        // 1/1 against 1/60
        assert!(count("w0") > 20 * count("w59"));
        let bad = SyntheticConfig {
            zipf_exponent: -1.0,
            ..Default::default()
        };
        assert!(generate_synthetic(&bad).is_err());
    }

    #[test]
    fn rejects_short_documents() {
        let cfg = SyntheticConfig {
            min_tokens: 5,
            ..Default::default()
        };
        assert!(generate_synthetic(&cfg).is_err());
        let cfg = SyntheticConfig {
            n_genres: 5,
            ..Default::default()
        };
        assert!(generate_synthetic(&cfg).is_err());
    }
}
