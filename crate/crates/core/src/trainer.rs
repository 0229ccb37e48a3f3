//! Pair generation for the four joint tasks and the training loop.
//!
//! Each document contributes pairs to every enabled task:
//!
//! * word–word: skip-gram positives inside the context window;
//! * user–word: the author against words from the document and the
//!   author's frequent words;
//! * item–word: the rated item against words from the document and the
//!   item's vocabulary;
//! * user–item: the author against the rated item.
//!
//! Every positive is followed by `negatives` sampled negatives.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::ReviewSet;
use crate::error::{Error, Result};
use crate::sgns::{
    apply_rows, apply_self_pair, init_model, EmbeddingTable, Label, Model, RowMut, Scratch, Slot, TableKind,
    TrainConfig, TrainingPair,
};
use crate::vocab::{EntityIndex, SamplingTable, Vocabulary};

/// Attempts allowed when rejection-sampling a negative.
pub const MAX_REJECTIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    WordWord,
    UserWord,
    ItemWord,
    UserItem,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [
        TaskKind::WordWord,
        TaskKind::UserWord,
        TaskKind::ItemWord,
        TaskKind::UserItem,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::WordWord => "word_word",
            TaskKind::UserWord => "user_word",
            TaskKind::ItemWord => "item_word",
            TaskKind::UserItem => "user_item",
        }
    }

    /// Table kinds of (anchor, target) for this task's pairs.
    pub fn slot_kinds(self) -> (TableKind, TableKind) {
        match self {
            TaskKind::WordWord => (TableKind::Word, TableKind::Word),
            TaskKind::UserWord => (TableKind::User, TableKind::Word),
            TaskKind::ItemWord => (TableKind::Item, TableKind::Word),
            TaskKind::UserItem => (TableKind::User, TableKind::Item),
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Which tasks contribute to the joint loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskSet {
    pub word_word: bool,
    pub user_word: bool,
    pub item_word: bool,
    pub user_item: bool,
}

impl TaskSet {
    pub fn all() -> Self {
        TaskSet {
            word_word: true,
            user_word: true,
            item_word: true,
            user_item: true,
        }
    }

    pub fn none() -> Self {
        TaskSet {
            word_word: false,
            user_word: false,
            item_word: false,
            user_item: false,
        }
    }

    pub fn only(task: TaskKind) -> Self {
        Self::none().with(task, true)
    }

    pub fn with(mut self, task: TaskKind, enabled: bool) -> Self {
        *match task {
            TaskKind::WordWord => &mut self.word_word,
            TaskKind::UserWord => &mut self.user_word,
            TaskKind::ItemWord => &mut self.item_word,
            TaskKind::UserItem => &mut self.user_item,
        } = enabled;
        self
    }

    pub fn contains(&self, task: TaskKind) -> bool {
        match task {
            TaskKind::WordWord => self.word_word,
            TaskKind::UserWord => self.user_word,
            TaskKind::ItemWord => self.item_word,
            TaskKind::UserItem => self.user_item,
        }
    }

    pub fn enabled(&self) -> impl Iterator<Item = TaskKind> + '_ {
        TaskKind::ALL.into_iter().filter(|t| self.contains(*t))
    }
}

impl Default for TaskSet {
    fn default() -> Self {
        Self::all()
    }
}

/// How many positives an entity–word task emits for one document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Positives {
    /// Every element of the combined token list once.
    All,
    /// This many uniform draws from the combined token list.
    Sample(usize),
}

/// Membership marks over an id space, cleared in O(1) by bumping a stamp.
#[derive(Debug, Clone)]
struct Marks {
    stamps: Vec<u32>,
    current: u32,
}

impl Marks {
    fn new(size: usize) -> Self {
        Marks {
            stamps: vec![0; size],
            current: 1,
        }
    }

    fn reset(&mut self) {
        self.current = self.current.wrapping_add(1);
        if self.current == 0 {
            self.stamps.fill(0);
            self.current = 1;
        }
    }

    fn mark(&mut self, id: usize) {
        self.stamps[id] = self.current;
    }

    fn contains(&self, id: usize) -> bool {
        self.stamps[id] == self.current
    }
}

/// Reusable pair generator. Holds the sampling tables and scratch state
/// shared by all four tasks.
pub struct PairSampler<'a> {
    config: &'a TrainConfig,
    index: &'a EntityIndex,
    words: &'a SamplingTable,
    marks: Marks,
    combined: Vec<u32>,
}

impl<'a> PairSampler<'a> {
    pub fn new(config: &'a TrainConfig, index: &'a EntityIndex, words: &'a SamplingTable, vocab_size: usize) -> Self {
        PairSampler {
            config,
            index,
            words,
            marks: Marks::new(vocab_size),
            combined: Vec::new(),
        }
    }

    fn draw_word<R: Rng>(&self, rng: &mut R, reject: impl Fn(usize) -> bool, context: impl Fn() -> String) -> Result<usize> {
        for _ in 0..MAX_REJECTIONS {
            let w = self.words.sample(rng);
            if !reject(w) {
                return Ok(w);
            }
        }
        Err(Error::SamplingExhausted {
            attempts: MAX_REJECTIONS,
            context: context(),
        })
    }

    pub fn word_word<R: Rng>(&mut self, doc: &[u32], rng: &mut R, out: &mut Vec<TrainingPair>) -> Result<()> {
        let window = self.config.window;
        let unk = Vocabulary::UNK_ID;
        for (i, &center) in doc.iter().enumerate() {
            if center == unk {
                continue;
            }
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(doc.len() - 1);
            for (j, &context) in doc.iter().enumerate().take(hi + 1).skip(lo) {
                if j == i || context == unk {
                    continue;
                }
                let anchor = Slot::word(center as usize);
                out.push(TrainingPair {
                    anchor,
                    target: Slot::word(context as usize),
                    label: Label::Positive,
                });
                for _ in 0..self.config.negatives {
                    let w = self.draw_word(rng, |w| w == context as usize, || {
                        format!("word-word negatives for word {context}")
                    })?;
                    out.push(TrainingPair {
                        anchor,
                        target: Slot::word(w),
                        label: Label::Negative,
                    });
                }
            }
        }
        Ok(())
    }

    /// Shared body of the user–word and item–word tasks.
    fn entity_word<R: Rng>(
        &mut self,
        anchor: Slot,
        doc: &[u32],
        profile: &[u32],
        extend_with_profile: bool,
        positives: Positives,
        rng: &mut R,
        out: &mut Vec<TrainingPair>,
    ) -> Result<()> {
        let unk = Vocabulary::UNK_ID;
        self.combined.clear();
        self.combined.extend(doc.iter().copied().filter(|&w| w != unk));
        if extend_with_profile {
            self.combined.extend_from_slice(profile);
        }
        if self.combined.is_empty() {
            return Ok(());
        }
        // Negatives avoid the profile and the document; without the profile
        // extension only the positive word itself is excluded.
        self.marks.reset();
        if extend_with_profile {
            for &w in self.combined.iter() {
                self.marks.mark(w as usize);
            }
        }
        let n = match positives {
            Positives::All => self.combined.len(),
            Positives::Sample(n) => n,
        };
        for k in 0..n {
            let target = match positives {
                Positives::All => self.combined[k],
                Positives::Sample(_) => self.combined[rng.gen_range(0..self.combined.len())],
            };
            out.push(TrainingPair {
                anchor,
                target: Slot::word(target as usize),
                label: Label::Positive,
            });
            for _ in 0..self.config.negatives {
                let marks = &self.marks;
                let w = self.draw_word(
                    rng,
                    |w| w == target as usize || (extend_with_profile && marks.contains(w)),
                    || format!("{} {} vocabulary covers the noise table", anchor.kind.as_str(), anchor.row),
                )?;
                out.push(TrainingPair {
                    anchor,
                    target: Slot::word(w),
                    label: Label::Negative,
                });
            }
        }
        Ok(())
    }

    pub fn user_word<R: Rng>(
        &mut self,
        doc: &[u32],
        user: usize,
        positives: Positives,
        rng: &mut R,
        out: &mut Vec<TrainingPair>,
    ) -> Result<()> {
        let index = self.index;
        let extend = self.config.user_vocab_positives;
        self.entity_word(Slot::user(user), doc, index.user_vocab(user), extend, positives, rng, out)
    }

    pub fn item_word<R: Rng>(
        &mut self,
        doc: &[u32],
        item: usize,
        positives: Positives,
        rng: &mut R,
        out: &mut Vec<TrainingPair>,
    ) -> Result<()> {
        let index = self.index;
        self.entity_word(Slot::item(item), doc, index.item_vocab(item), true, positives, rng, out)
    }

    pub fn user_item<R: Rng>(&mut self, user: usize, item: usize, rng: &mut R, out: &mut Vec<TrainingPair>) -> Result<()> {
        let reviewed = self.index.user_items(user);
        let n_items = self.index.n_items();
        if reviewed.len() >= n_items {
            return Err(Error::SamplingExhausted {
                attempts: 0,
                context: format!("user {user} reviewed every item"),
            });
        }
        let anchor = Slot::user(user);
        out.push(TrainingPair {
            anchor,
            target: Slot::item(item),
            label: Label::Positive,
        });
        for _ in 0..self.config.negatives {
            let mut pick = None;
            for _ in 0..MAX_REJECTIONS {
                let p = rng.gen_range(0..n_items);
                if reviewed.binary_search(&p).is_err() {
                    pick = Some(p);
                    break;
                }
            }
            // Dense reviewers: draw from the complement directly, which is the
            // same uniform distribution.
            let p = match pick {
                Some(p) => p,
                None => {
                    let k = rng.gen_range(0..n_items - reviewed.len());
                    (0..n_items)
                        .filter(|p| reviewed.binary_search(p).is_err())
                        .nth(k)
                        .expect("complement is non-empty")
                }
            };
            out.push(TrainingPair {
                anchor,
                target: Slot::item(p),
                label: Label::Negative,
            });
        }
        Ok(())
    }
}

fn word_table(vocab: &Vocabulary, config: &TrainConfig) -> Result<SamplingTable> {
    if vocab.is_empty() {
        return Err(Error::invalid("vocabulary has no words besides the unknown token"));
    }
    vocab.noise_table(config.noise_power)
}

/// Skip-gram pairs for one encoded document.
pub fn pairs_word_word<R: Rng>(
    doc: &[u32],
    config: &TrainConfig,
    index: &EntityIndex,
    words: &SamplingTable,
    vocab_size: usize,
    rng: &mut R,
) -> Result<Vec<TrainingPair>> {
    let mut out = Vec::new();
    PairSampler::new(config, index, words, vocab_size).word_word(doc, rng, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
pub fn pairs_user_word<R: Rng>(
    doc: &[u32],
    user: usize,
    index: &EntityIndex,
    config: &TrainConfig,
    words: &SamplingTable,
    vocab_size: usize,
    positives: Positives,
    rng: &mut R,
) -> Result<Vec<TrainingPair>> {
    check_row("user", user, index.n_users())?;
    let mut out = Vec::new();
    PairSampler::new(config, index, words, vocab_size).user_word(doc, user, positives, rng, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
pub fn pairs_item_word<R: Rng>(
    doc: &[u32],
    item: usize,
    index: &EntityIndex,
    config: &TrainConfig,
    words: &SamplingTable,
    vocab_size: usize,
    positives: Positives,
    rng: &mut R,
) -> Result<Vec<TrainingPair>> {
    check_row("item", item, index.n_items())?;
    let mut out = Vec::new();
    PairSampler::new(config, index, words, vocab_size).item_word(doc, item, positives, rng, &mut out)?;
    Ok(out)
}

pub fn pairs_user_item<R: Rng>(
    user: usize,
    item: usize,
    index: &EntityIndex,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<Vec<TrainingPair>> {
    check_row("user", user, index.n_users())?;
    check_row("item", item, index.n_items())?;
    // the word table is unused by this task
    let words = crate::vocab::build_sampling_table(&[1], 1.0)?;
    let mut out = Vec::new();
    PairSampler::new(config, index, &words, 1).user_item(user, item, rng, &mut out)?;
    Ok(out)
}

fn check_row(what: &str, row: usize, len: usize) -> Result<()> {
    if row >= len {
        return Err(Error::invalid(format!("{what} {row} not in index ({len} entries)")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskStats {
    pub task: TaskKind,
    pub pairs: u64,
    pub loss_sum: f64,
}

impl TaskStats {
    pub fn mean_loss(&self) -> f64 {
        if self.pairs == 0 {
            0.0
        } else {
            self.loss_sum / self.pairs as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    pub tasks: Vec<TaskStats>,
}

impl EpochStats {
    /// Sum of the task losses over the epoch.
    pub fn total_loss(&self) -> f64 {
        self.tasks.iter().map(|t| t.loss_sum).sum()
    }

    pub fn total_pairs(&self) -> u64 {
        self.tasks.iter().map(|t| t.pairs).sum()
    }

    /// Sum over tasks of each task's mean loss.
    pub fn mean_total_loss(&self) -> f64 {
        self.tasks.iter().map(TaskStats::mean_loss).sum()
    }

    /// Loss per pair, pooling all tasks.
    pub fn pair_mean_loss(&self) -> f64 {
        self.total_loss() / self.total_pairs().max(1) as f64
    }

    pub fn task(&self, task: TaskKind) -> Option<&TaskStats> {
        self.tasks.iter().find(|t| t.task == task)
    }

    /// One progress record per task, for line-delimited logs.
    pub fn records(&self) -> Vec<ProgressRecord> {
        self.tasks
            .iter()
            .map(|t| ProgressRecord {
                epoch: self.epoch,
                task: t.task,
                mean_loss: t.mean_loss(),
                pairs: t.pairs,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressRecord {
    pub epoch: usize,
    pub task: TaskKind,
    pub mean_loss: f64,
    pub pairs: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    pub epochs: Vec<EpochStats>,
}

pub struct Trained {
    pub model: Model,
    pub stats: TrainStats,
}

#[derive(Debug, Clone, Copy, Default)]
struct Accum {
    pairs: [u64; 4],
    loss: [f64; 4],
}

impl Accum {
    fn merge(&mut self, other: &Accum) {
        for i in 0..4 {
            self.pairs[i] += other.pairs[i];
            self.loss[i] += other.loss[i];
        }
    }

    fn into_epoch(self, epoch: usize, tasks: &TaskSet) -> EpochStats {
        EpochStats {
            epoch,
            tasks: tasks
                .enabled()
                .map(|t| TaskStats {
                    task: t,
                    pairs: self.pairs[t.index()],
                    loss_sum: self.loss[t.index()],
                })
                .collect(),
        }
    }
}

/// Row storage the training loop writes into.
trait PairTarget {
    fn apply(&mut self, pair: &TrainingPair, config: &TrainConfig) -> Result<f64>;
}

struct Exclusive<'m> {
    model: &'m mut Model,
    scratch: Scratch,
}

impl PairTarget for Exclusive<'_> {
    fn apply(&mut self, pair: &TrainingPair, config: &TrainConfig) -> Result<f64> {
        self.model.apply_pair(pair, &config.adam, &mut self.scratch)
    }
}

/// Generates and applies every enabled task's pairs for one document.
#[allow(clippy::too_many_arguments)]
fn train_document<R: Rng, T: PairTarget>(
    doc: &crate::vocab::EncodedDoc,
    sampler: &mut PairSampler<'_>,
    target: &mut T,
    config: &TrainConfig,
    rng: &mut R,
    buf: &mut Vec<TrainingPair>,
    acc: &mut Accum,
) -> Result<()> {
    for task in config.tasks.enabled() {
        buf.clear();
        match task {
            TaskKind::WordWord => sampler.word_word(&doc.tokens, rng, buf)?,
            TaskKind::UserWord => {
                sampler.user_word(&doc.tokens, doc.user, Positives::Sample(doc.tokens.len()), rng, buf)?
            }
            TaskKind::ItemWord => {
                sampler.item_word(&doc.tokens, doc.item, Positives::Sample(doc.tokens.len()), rng, buf)?
            }
            TaskKind::UserItem => sampler.user_item(doc.user, doc.item, rng, buf)?,
        }
        let i = task.index();
        for pair in buf.iter() {
            acc.loss[i] += target.apply(pair, config)?;
        }
        acc.pairs[i] += buf.len() as u64;
    }
    Ok(())
}

/// Trains all enabled tasks jointly.
pub fn train(set: &ReviewSet, vocab: &Vocabulary, index: &EntityIndex, config: &TrainConfig) -> Result<Trained> {
    train_with_progress(set, vocab, index, config, |_| {})
}

/// [`train`], calling `on_epoch` after every epoch.
pub fn train_with_progress(
    set: &ReviewSet,
    vocab: &Vocabulary,
    index: &EntityIndex,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<Trained> {
    config.validate()?;
    if set.is_empty() {
        return Err(Error::invalid("cannot train on an empty corpus"));
    }
    let docs = index.encode_corpus(set, vocab)?;
    let words = word_table(vocab, config)?;
    let mut model = init_model(vocab.len(), index.n_users(), index.n_items(), config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..docs.len()).collect();
    let mut stats = TrainStats::default();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let acc = if config.threads <= 1 {
            let mut sampler = PairSampler::new(config, index, &words, vocab.len());
            let mut target = Exclusive {
                model: &mut model,
                scratch: Scratch::default(),
            };
            let mut acc = Accum::default();
            let mut buf = Vec::new();
            for &d in &order {
                train_document(&docs[d], &mut sampler, &mut target, config, &mut rng, &mut buf, &mut acc)?;
            }
            acc
        } else {
            let worker_seed: u64 = rng.gen();
            let (trained, acc) = parallel_epoch(model, &docs, &order, index, &words, vocab.len(), config, worker_seed)?;
            model = trained;
            acc
        };
        let epoch_stats = acc.into_epoch(epoch, &config.tasks);
        on_epoch(&epoch_stats);
        stats.epochs.push(epoch_stats);
    }
    Ok(Trained { model, stats })
}

/// Table mirror with atomically accessed cells. Workers read and write rows
/// without locks; concurrent updates of one row may interleave, and the
/// last write wins.
struct SharedTable {
    kind: TableKind,
    dim: usize,
    values: Vec<AtomicU64>,
    m: Vec<AtomicU64>,
    v: Vec<AtomicU64>,
    t: Vec<AtomicU64>,
}

fn to_atomic(xs: &[f64]) -> Vec<AtomicU64> {
    xs.iter().map(|x| AtomicU64::new(x.to_bits())).collect()
}

fn from_atomic(xs: Vec<AtomicU64>) -> Vec<f64> {
    xs.into_iter().map(|x| f64::from_bits(x.into_inner())).collect()
}

impl SharedTable {
    fn new(table: &EmbeddingTable) -> Self {
        let (values, m, v, t) = table.raw_parts();
        SharedTable {
            kind: table.kind,
            dim: table.dim(),
            values: to_atomic(values),
            m: to_atomic(m),
            v: to_atomic(v),
            t: t.iter().map(|&s| AtomicU64::new(s)).collect(),
        }
    }

    fn into_table(self) -> EmbeddingTable {
        EmbeddingTable::from_raw_parts(
            self.kind,
            self.dim,
            from_atomic(self.values),
            from_atomic(self.m),
            from_atomic(self.v),
            self.t.into_iter().map(AtomicU64::into_inner).collect(),
        )
    }

    fn load(&self, row: usize, local: &mut LocalRow) {
        let span = row * self.dim..(row + 1) * self.dim;
        let read = |src: &[AtomicU64], dst: &mut Vec<f64>| {
            dst.clear();
            dst.extend(src.iter().map(|x| f64::from_bits(x.load(Ordering::Relaxed))));
        };
        read(&self.values[span.clone()], &mut local.values);
        read(&self.m[span.clone()], &mut local.m);
        read(&self.v[span], &mut local.v);
        local.t = self.t[row].load(Ordering::Relaxed);
    }

    fn store(&self, row: usize, local: &LocalRow) {
        let span = row * self.dim..(row + 1) * self.dim;
        let write = |dst: &[AtomicU64], src: &[f64]| {
            for (d, s) in dst.iter().zip(src) {
                d.store(s.to_bits(), Ordering::Relaxed);
            }
        };
        write(&self.values[span.clone()], &local.values);
        write(&self.m[span.clone()], &local.m);
        write(&self.v[span], &local.v);
        self.t[row].store(local.t, Ordering::Relaxed);
    }
}

#[derive(Default)]
struct LocalRow {
    values: Vec<f64>,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl LocalRow {
    fn as_mut(&mut self) -> RowMut<'_> {
        RowMut {
            values: &mut self.values,
            m: &mut self.m,
            v: &mut self.v,
            t: &mut self.t,
        }
    }
}

struct SharedModel {
    word: SharedTable,
    user: SharedTable,
    item: SharedTable,
}

impl SharedModel {
    fn table(&self, kind: TableKind) -> &SharedTable {
        match kind {
            TableKind::Word => &self.word,
            TableKind::User => &self.user,
            TableKind::Item => &self.item,
        }
    }
}

struct Hogwild<'m> {
    model: &'m SharedModel,
    a: LocalRow,
    t: LocalRow,
    scratch: Scratch,
}

impl PairTarget for Hogwild<'_> {
    fn apply(&mut self, pair: &TrainingPair, config: &TrainConfig) -> Result<f64> {
        let y = pair.label.value();
        let ta = self.model.table(pair.anchor.kind);
        ta.load(pair.anchor.row, &mut self.a);
        if pair.anchor == pair.target {
            let loss = apply_self_pair(&mut self.a.as_mut(), y, &config.adam, &mut self.scratch, pair)?;
            ta.store(pair.anchor.row, &self.a);
            return Ok(loss);
        }
        let tt = self.model.table(pair.target.kind);
        tt.load(pair.target.row, &mut self.t);
        let loss = apply_rows(&mut self.a.as_mut(), &mut self.t.as_mut(), y, &config.adam, &mut self.scratch, pair)?;
        ta.store(pair.anchor.row, &self.a);
        tt.store(pair.target.row, &self.t);
        Ok(loss)
    }
}

#[allow(clippy::too_many_arguments)]
fn parallel_epoch(
    model: Model,
    docs: &[crate::vocab::EncodedDoc],
    order: &[usize],
    index: &EntityIndex,
    words: &SamplingTable,
    vocab_size: usize,
    config: &TrainConfig,
    seed: u64,
) -> Result<(Model, Accum)> {
    let shared = SharedModel {
        word: SharedTable::new(&model.word),
        user: SharedTable::new(&model.user),
        item: SharedTable::new(&model.item),
    };
    drop(model);
    let chunk = order.len().div_ceil(config.threads);
    let results: Vec<Result<Accum>> = std::thread::scope(|scope| {
        let handles: Vec<_> = order
            .chunks(chunk.max(1))
            .enumerate()
            .map(|(w, part)| {
                let shared = &shared;
                scope.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(w as u64 + 2);
                    let mut sampler = PairSampler::new(config, index, words, vocab_size);
                    let mut target = Hogwild {
                        model: shared,
                        a: LocalRow::default(),
                        t: LocalRow::default(),
                        scratch: Scratch::default(),
                    };
                    let mut acc = Accum::default();
                    let mut buf = Vec::new();
                    for &d in part {
                        train_document(&docs[d], &mut sampler, &mut target, config, &mut rng, &mut buf, &mut acc)?;
                    }
                    Ok(acc)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("training worker panicked")).collect()
    });
    let mut total = Accum::default();
    for r in results {
        total.merge(&r?);
    }
    let model = Model {
        word: shared.word.into_table(),
        user: shared.user.into_table(),
        item: shared.item.into_table(),
    };
    Ok((model, total))
}
