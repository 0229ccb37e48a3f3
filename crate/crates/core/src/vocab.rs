//! Word vocabulary, user/item indexes and negative-sampling tables.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::ReviewSet;
use crate::error::{Error, Result};

pub const UNK: &str = "<unk>";
/// Default cap on the number of real words kept.
pub const DEFAULT_MAX_WORDS: usize = 20_000;
pub const DEFAULT_USER_VOCAB: usize = 100;

const VOCAB_MAGIC: &str = "mtlue-vocab";
const INDEX_MAGIC: &str = "mtlue-index";
const FORMAT_VERSION: &str = "v1";

/// Token/id mapping. Id 0 is the unknown-word token; real words follow in
/// descending frequency order.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    token_to_id: HashMap<String, u32>,
    id_to_token: Vec<String>,
    counts: Vec<u64>,
}

impl Vocabulary {
    pub const UNK_ID: u32 = 0;

    fn from_ranked(ranked: Vec<(String, u64)>, unk_count: u64) -> Self {
        let mut id_to_token = Vec::with_capacity(ranked.len() + 1);
        let mut counts = Vec::with_capacity(ranked.len() + 1);
        id_to_token.push(UNK.to_string());
        counts.push(unk_count);
        for (token, count) in ranked {
            id_to_token.push(token);
            counts.push(count);
        }
        let token_to_id = id_to_token
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocabulary {
            token_to_id,
            id_to_token,
            counts,
        }
    }

    /// Size including the unknown-word entry.
    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() <= 1
    }

    pub fn unk_id(&self) -> u32 {
        Self::UNK_ID
    }

    pub fn id(&self, token: &str) -> u32 {
        self.token_to_id.get(token).copied().unwrap_or(Self::UNK_ID)
    }

    pub fn token(&self, id: u32) -> &str {
        &self.id_to_token[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.id_to_token
    }

    /// Corpus frequency per id. The unknown-word entry counts the
    /// out-of-vocabulary occurrences and may be zero.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<u32> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    /// Noise distribution over real words (the unknown-word entry is never
    /// drawn), with probabilities proportional to `count^power`.
    pub fn noise_table(&self, power: f64) -> Result<SamplingTable> {
        let mut table = build_sampling_table(&self.counts[1..], power)?;
        table.first_id = 1;
        Ok(table)
    }

    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        let io = |e| Error::io("<writer>", e);
        writeln!(out, "{VOCAB_MAGIC} {FORMAT_VERSION} {}", self.len()).map_err(io)?;
        for (token, count) in self.id_to_token.iter().zip(&self.counts) {
            writeln!(out, "{token}\t{count}").map_err(io)?;
        }
        Ok(())
    }

    pub fn read_from(reader: impl BufRead) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Record { line, message };
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| bad(1, "empty vocabulary file".into()))?
            .map_err(|e| Error::io("<reader>", e))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let size: usize = match fields.as_slice() {
            [VOCAB_MAGIC, FORMAT_VERSION, n] => n
                .parse()
                .map_err(|_| bad(1, format!("bad vocabulary size {n:?}")))?,
            _ => return Err(bad(1, format!("bad vocabulary header {header:?}"))),
        };
        let mut ranked = Vec::with_capacity(size);
        let mut unk_count = 0;
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line.map_err(|e| Error::io("<reader>", e))?;
            let (token, count) = line
                .split_once('\t')
                .ok_or_else(|| bad(line_no, "expected <token>\\t<count>".into()))?;
            let count: u64 = count
                .parse()
                .map_err(|_| bad(line_no, format!("bad count {count:?}")))?;
            if i == 0 {
                if token != UNK {
                    return Err(bad(line_no, format!("first entry must be {UNK}")));
                }
                unk_count = count;
            } else {
                ranked.push((token.to_string(), count));
            }
        }
        let vocab = Vocabulary::from_ranked(ranked, unk_count);
        if vocab.len() != size || vocab.token_to_id.len() + 1 != size {
            return Err(bad(
                size + 1,
                format!("header declares {size} entries, found {} distinct", vocab.token_to_id.len() + 1),
            ));
        }
        Ok(vocab)
    }
}

/// Keeps the `max_size` most frequent tokens (ties broken lexicographically)
/// plus the unknown-word token.
pub fn build_vocab(set: &ReviewSet, max_size: usize) -> Result<Vocabulary> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for review in &set.reviews {
        for token in &review.tokens {
            *counts.entry(token.as_str()).or_default() += 1;
        }
    }
    if counts.is_empty() {
        return Err(Error::invalid("cannot build a vocabulary from an empty corpus"));
    }
    let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let unk_count = ranked.iter().skip(max_size).map(|(_, c)| c).sum();
    ranked.truncate(max_size);
    Ok(Vocabulary::from_ranked(
        ranked.into_iter().map(|(t, c)| (t.to_string(), c)).collect(),
        unk_count,
    ))
}

/// A review reduced to vocabulary ids and entity rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedDoc {
    pub tokens: Vec<u32>,
    pub user: usize,
    pub item: usize,
}

/// User and item indexes with their word profiles.
///
/// Users and items are numbered in lexicographic order of their ids.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityIndex {
    users: Vec<String>,
    items: Vec<String>,
    user_to_id: HashMap<String, usize>,
    item_to_id: HashMap<String, usize>,
    /// Most frequent word ids per user, most frequent first.
    user_vocab: Vec<Vec<u32>>,
    /// Sorted word ids appearing in each item's reviews.
    item_vocab: Vec<Vec<u32>>,
    /// Sorted item rows reviewed by each user.
    user_items: Vec<Vec<usize>>,
    item_genres: Vec<BTreeSet<String>>,
    n_user_vocab: usize,
}

fn index_of(names: &BTreeSet<&str>) -> (Vec<String>, HashMap<String, usize>) {
    let list: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    let map = list.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    (list, map)
}

pub fn build_entity_index(set: &ReviewSet, vocab: &Vocabulary, n_user_vocab: usize) -> Result<EntityIndex> {
    if set.is_empty() {
        return Err(Error::invalid("cannot index an empty corpus"));
    }
    let user_names: BTreeSet<&str> = set.reviews.iter().map(|r| r.user_id.as_str()).collect();
    let item_names: BTreeSet<&str> = set.reviews.iter().map(|r| r.item_id.as_str()).collect();
    let (users, user_to_id) = index_of(&user_names);
    let (items, item_to_id) = index_of(&item_names);

    let mut user_counts: Vec<HashMap<u32, u64>> = vec![HashMap::new(); users.len()];
    let mut item_vocab: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); items.len()];
    let mut user_items: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); users.len()];
    let mut item_genres: Vec<BTreeSet<String>> = vec![BTreeSet::new(); items.len()];

    for review in &set.reviews {
        let u = user_to_id[&review.user_id];
        let p = item_to_id[&review.item_id];
        user_items[u].insert(p);
        item_genres[p].extend(review.genres.iter().cloned());
        for token in &review.tokens {
            let id = vocab.id(token);
            if id == Vocabulary::UNK_ID {
                continue;
            }
            *user_counts[u].entry(id).or_default() += 1;
            item_vocab[p].insert(id);
        }
    }

    let user_vocab = user_counts
        .into_iter()
        .map(|counts| {
            let mut ranked: Vec<(u32, u64)> = counts.into_iter().collect();
            ranked.sort_unstable_by(|a, b| {
                b.1.cmp(&a.1).then_with(|| vocab.token(a.0).cmp(vocab.token(b.0)))
            });
            ranked.truncate(n_user_vocab);
            ranked.into_iter().map(|(id, _)| id).collect()
        })
        .collect();

    Ok(EntityIndex {
        users,
        items,
        user_to_id,
        item_to_id,
        user_vocab,
        item_vocab: item_vocab.into_iter().map(|s| s.into_iter().collect()).collect(),
        user_items: user_items.into_iter().map(|s| s.into_iter().collect()).collect(),
        item_genres,
        n_user_vocab,
    })
}

impl EntityIndex {
    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn user_id(&self, user: &str) -> Option<usize> {
        self.user_to_id.get(user).copied()
    }

    pub fn item_id(&self, item: &str) -> Option<usize> {
        self.item_to_id.get(item).copied()
    }

    pub fn n_user_vocab(&self) -> usize {
        self.n_user_vocab
    }

    pub fn user_vocab(&self, user: usize) -> &[u32] {
        &self.user_vocab[user]
    }

    pub fn item_vocab(&self, item: usize) -> &[u32] {
        &self.item_vocab[item]
    }

    pub fn user_items(&self, user: usize) -> &[usize] {
        &self.user_items[user]
    }

    pub fn item_genres(&self, item: usize) -> &BTreeSet<String> {
        &self.item_genres[item]
    }

    /// Union of the genres of every item the user reviewed.
    pub fn user_genres(&self, user: usize) -> BTreeSet<String> {
        self.user_items[user]
            .iter()
            .flat_map(|&p| self.item_genres[p].iter().cloned())
            .collect()
    }

    pub fn encode_corpus(&self, set: &ReviewSet, vocab: &Vocabulary) -> Result<Vec<EncodedDoc>> {
        set.reviews
            .iter()
            .map(|r| {
                let user = self
                    .user_id(&r.user_id)
                    .ok_or_else(|| Error::invalid(format!("user {:?} not in index", r.user_id)))?;
                let item = self
                    .item_id(&r.item_id)
                    .ok_or_else(|| Error::invalid(format!("item {:?} not in index", r.item_id)))?;
                Ok(EncodedDoc {
                    tokens: vocab.encode(&r.tokens),
                    user,
                    item,
                })
            })
            .collect()
    }

    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        let io = |e| Error::io("<writer>", e);
        writeln!(
            out,
            "{INDEX_MAGIC} {FORMAT_VERSION} {} {} {}",
            self.users.len(),
            self.items.len(),
            self.n_user_vocab
        )
        .map_err(io)?;
        for (p, name) in self.items.iter().enumerate() {
            let record = IndexRecord::Item {
                id: name.clone(),
                genres: self.item_genres[p].iter().cloned().collect(),
                vocab: self.item_vocab[p].clone(),
            };
            writeln!(out, "{}", serde_json::to_string(&record).expect("serializable")).map_err(io)?;
        }
        for (u, name) in self.users.iter().enumerate() {
            let record = IndexRecord::User {
                id: name.clone(),
                items: self.user_items[u].iter().map(|&p| self.items[p].clone()).collect(),
                vocab: self.user_vocab[u].clone(),
            };
            writeln!(out, "{}", serde_json::to_string(&record).expect("serializable")).map_err(io)?;
        }
        Ok(())
    }

    pub fn read_from(reader: impl BufRead) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Record { line, message };
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| bad(1, "empty index file".into()))?
            .map_err(|e| Error::io("<reader>", e))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let parse = |s: &str| s.parse::<usize>().map_err(|_| bad(1, format!("bad header field {s:?}")));
        let (n_users, n_items, n_user_vocab) = match fields.as_slice() {
            [INDEX_MAGIC, FORMAT_VERSION, u, p, n] => (parse(u)?, parse(p)?, parse(n)?),
            _ => return Err(bad(1, format!("bad index header {header:?}"))),
        };

        let mut items = Vec::with_capacity(n_items);
        let mut item_genres = Vec::with_capacity(n_items);
        let mut item_vocab = Vec::with_capacity(n_items);
        let mut user_rows = Vec::with_capacity(n_users);
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line.map_err(|e| Error::io("<reader>", e))?;
            let record: IndexRecord =
                serde_json::from_str(&line).map_err(|e| bad(line_no, format!("bad record: {e}")))?;
            match record {
                IndexRecord::Item { id, genres, vocab } => {
                    if !user_rows.is_empty() {
                        return Err(bad(line_no, "item record after user records".into()));
                    }
                    items.push(id);
                    item_genres.push(genres.into_iter().collect());
                    item_vocab.push(vocab);
                }
                IndexRecord::User { id, items, vocab } => user_rows.push((line_no, id, items, vocab)),
            }
        }
        if items.len() != n_items || user_rows.len() != n_users {
            return Err(bad(
                n_items + n_users + 2,
                format!(
                    "header declares {n_users} users and {n_items} items, found {} and {}",
                    user_rows.len(),
                    items.len()
                ),
            ));
        }
        let item_to_id: HashMap<String, usize> =
            items.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut users = Vec::with_capacity(n_users);
        let mut user_items = Vec::with_capacity(n_users);
        let mut user_vocab = Vec::with_capacity(n_users);
        for (line_no, id, reviewed, vocab) in user_rows {
            let rows = reviewed
                .iter()
                .map(|name| {
                    item_to_id
                        .get(name)
                        .copied()
                        .ok_or_else(|| bad(line_no, format!("unknown item {name:?}")))
                })
                .collect::<Result<BTreeSet<usize>>>()?;
            users.push(id);
            user_items.push(rows.into_iter().collect());
            user_vocab.push(vocab);
        }
        let user_to_id: HashMap<String, usize> =
            users.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        if user_to_id.len() != users.len() || item_to_id.len() != items.len() {
            return Err(bad(1, "duplicate entity ids".into()));
        }
        Ok(EntityIndex {
            users,
            items,
            user_to_id,
            item_to_id,
            user_vocab,
            item_vocab,
            user_items,
            item_genres,
            n_user_vocab,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum IndexRecord {
    Item {
        id: String,
        genres: Vec<String>,
        vocab: Vec<u32>,
    },
    User {
        id: String,
        items: Vec<String>,
        vocab: Vec<u32>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingDomain {
    Word,
    Item,
}

/// Discrete distribution with probabilities proportional to `count^power`,
/// sampled by binary search over the cumulative distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingTable {
    pub domain: SamplingDomain,
    cumulative: Vec<f64>,
    power: f64,
    /// Added to every drawn index, so a table can cover a suffix of an id
    /// space (word tables skip the unknown-word id).
    first_id: usize,
}

pub fn build_sampling_table(counts: &[u64], power: f64) -> Result<SamplingTable> {
    if counts.is_empty() {
        return Err(Error::invalid("sampling table needs at least one count"));
    }
    if !power.is_finite() {
        return Err(Error::invalid("sampling power must be finite"));
    }
    if let Some(i) = counts.iter().position(|&c| c == 0) {
        return Err(Error::invalid(format!("sampling count at index {i} is zero")));
    }
    let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(power)).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let mut cumulative: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc / total
        })
        .collect();
    *cumulative.last_mut().expect("non-empty") = 1.0;
    Ok(SamplingTable {
        domain: SamplingDomain::Word,
        cumulative,
        power,
        first_id: 0,
    })
}

impl SamplingTable {
    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Probability of drawing table entry `i` (before the id offset).
    pub fn probability(&self, i: usize) -> f64 {
        let prev = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        self.cumulative[i] - prev
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.cumulative.len() - 1) + self.first_id
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DatasetKind, Review};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn doc(id: &str, user: &str, item: &str, tokens: &[&str], genres: &[&str]) -> Review {
        Review {
            doc_id: id.into(),
            user_id: user.into(),
            item_id: item.into(),
            rating: 4.0,
            text: tokens.join(" "),
            genres: genres.iter().map(|g| g.to_string()).collect(),
            sentiment: None,
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
        }
    }

    fn set(reviews: Vec<Review>) -> ReviewSet {
        ReviewSet::new(DatasetKind::Yelp, reviews)
    }

    #[test]
    fn small_corpus_keeps_everything_plus_unk() {
        let corpus = set(vec![doc("d", "u", "i", &["a", "b", "c", "d", "e", "a"], &["g"])]);
        let vocab = build_vocab(&corpus, DEFAULT_MAX_WORDS).unwrap();
        assert_eq!(vocab.len(), 6);
        assert_eq!(vocab.token(0), UNK);
        assert_eq!(vocab.token(1), "a");
        assert_eq!(vocab.id("zzz"), Vocabulary::UNK_ID);
        for t in ["a", "b", "c", "d", "e"] {
            assert_eq!(vocab.token(vocab.id(t)), t);
        }
    }

    #[test]
    fn cap_keeps_lexicographically_smaller_on_ties() {
        let corpus = set(vec![doc("d", "u", "i", &["x", "x", "b", "a"], &["g"])]);
        let vocab = build_vocab(&corpus, 2).unwrap();
        assert_eq!(vocab.tokens(), [UNK, "x", "a"]);
        assert_eq!(vocab.counts(), [1, 2, 1]);
    }

    #[test]
    fn large_corpus_is_capped() {
        let tokens: Vec<String> = (0..25_000).map(|i| format!("t{i}")).collect();
        let refs: Vec<&str> = tokens.iter().map(String::as_str).collect();
        let corpus = set(vec![doc("d", "u", "i", &refs, &["g"])]);
        assert_eq!(build_vocab(&corpus, DEFAULT_MAX_WORDS).unwrap().len(), 20_001);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(build_vocab(&set(vec![]), 10).is_err());
    }

    #[test]
    fn entity_index_profiles() {
        let corpus = set(vec![
            doc("d1", "u1", "i1", &["a", "a", "b"], &["drama"]),
            doc("d2", "u2", "i1", &["c"], &["drama"]),
            doc("d3", "u2", "i2", &["d", "c"], &["action"]),
        ]);
        let vocab = build_vocab(&corpus, 100).unwrap();
        let index = build_entity_index(&corpus, &vocab, 1).unwrap();
        let u1 = index.user_id("u1").unwrap();
        let u2 = index.user_id("u2").unwrap();
        assert_eq!(index.user_vocab(u1), [vocab.id("a")]);
        assert_eq!(index.user_vocab(u2), [vocab.id("c")]);
        assert_eq!(
            index.user_genres(u2),
            BTreeSet::from(["drama".to_string(), "action".to_string()])
        );
        let i1 = index.item_id("i1").unwrap();
        let mut expected = vec![vocab.id("a"), vocab.id("b"), vocab.id("c")];
        expected.sort();
        assert_eq!(index.item_vocab(i1), expected);
        assert_eq!(index.user_items(u2).len(), 2);

        let wide = build_entity_index(&corpus, &vocab, 100).unwrap();
        assert_eq!(wide.user_vocab(u2).len(), 2);
    }

    #[test]
    fn index_and_vocab_persist() {
        let corpus = set(vec![
            doc("d1", "u1", "i1", &["a", "a", "b"], &["drama", "comedy"]),
            doc("d2", "u2", "i2", &["c", "a"], &["action"]),
        ]);
        let vocab = build_vocab(&corpus, 100).unwrap();
        let index = build_entity_index(&corpus, &vocab, 5).unwrap();
        let mut buf = Vec::new();
        vocab.write_to(&mut buf).unwrap();
        assert_eq!(Vocabulary::read_from(&buf[..]).unwrap(), vocab);
        let mut buf = Vec::new();
        index.write_to(&mut buf).unwrap();
        assert_eq!(EntityIndex::read_from(&buf[..]).unwrap(), index);
        assert!(EntityIndex::read_from(&buf[..buf.len() / 2]).is_err());
    }

    #[test]
    fn sampling_table_probabilities() {
        let t = build_sampling_table(&[1, 1], 1.0).unwrap();
        assert_eq!((t.probability(0), t.probability(1)), (0.5, 0.5));
        let t = build_sampling_table(&[8, 1], 0.0).unwrap();
        assert_eq!((t.probability(0), t.probability(1)), (0.5, 0.5));
        // oracle: 8^0.75 = 2^2.25
        let w = 2f64.powf(2.25);
        let t = build_sampling_table(&[8, 1], 0.75).unwrap();
        assert!((t.probability(0) - w / (w + 1.0)).abs() < 1e-15);
        assert!((t.probability(0) - 0.8262932).abs() < 1e-7);
        assert!((t.probability(1) - 0.1737068).abs() < 1e-7);
        assert!(build_sampling_table(&[], 1.0).is_err());
        assert!(build_sampling_table(&[3, 0], 1.0).is_err());
    }

    #[test]
    fn sampling_frequencies_converge() {
        let counts: Vec<u64> = (1..=10).map(|c| c * c).collect();
        let table = build_sampling_table(&counts, 0.75).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut hits = [0usize; 10];
        let n = 1_000_000;
        for _ in 0..n {
            hits[table.sample(&mut rng)] += 1;
        }
        for (i, &h) in hits.iter().enumerate() {
            let dev = (h as f64 / n as f64 - table.probability(i)).abs();
            assert!(dev < 0.005, "entry {i}: deviation {dev}");
        }
    }

    #[test]
    fn noise_table_never_draws_unk() {
        let corpus = set(vec![doc("d", "u", "i", &["a", "b", "b", "c"], &["g"])]);
        let vocab = build_vocab(&corpus, 2).unwrap();
        let table = vocab.noise_table(0.75).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let id = table.sample(&mut rng);
            assert!(id >= 1 && id < vocab.len());
        }
    }

    proptest::proptest! {
        #[test]
        fn cumulative_is_strictly_increasing(counts in proptest::collection::vec(1u64..10_000, 1..50), power in 0.0f64..1.5) {
            let table = build_sampling_table(&counts, power).unwrap();
            let c = table.cumulative();
            proptest::prop_assert!(c.windows(2).all(|w| w[0] < w[1]));
            proptest::prop_assert_eq!(*c.last().unwrap(), 1.0);
        }
    }
}
