//! Scoring, binary cross-entropy loss, analytic gradients and lazy per-row
//! Adam over the word, user and item embedding tables.
//!
//! Every entity has a single vector that serves both as anchor and as
//! target. A pair `(a, t)` with label `y` scores `s = a·t` and costs
//!
//! ```text
//! loss = -[ y ln σ(s) + (1 - y) ln(1 - σ(s)) ]
//! ∂loss/∂a = (σ(s) - y) t        ∂loss/∂t = (σ(s) - y) a
//! ```

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trainer::TaskSet;

/// Floor applied inside the logarithms of the loss.
pub const LOSS_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Word,
    User,
    Item,
}

impl TableKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TableKind::Word => "word",
            TableKind::User => "user",
            TableKind::Item => "item",
        }
    }
}

impl std::str::FromStr for TableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(TableKind::Word),
            "user" => Ok(TableKind::User),
            "item" => Ok(TableKind::Item),
            other => Err(Error::invalid(format!("unknown table kind {other:?}"))),
        }
    }
}

/// A row in one of the three tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slot {
    pub kind: TableKind,
    pub row: usize,
}

impl Slot {
    pub fn word(row: usize) -> Self {
        Slot { kind: TableKind::Word, row }
    }
    pub fn user(row: usize) -> Self {
        Slot { kind: TableKind::User, row }
    }
    pub fn item(row: usize) -> Self {
        Slot { kind: TableKind::Item, row }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    /// Observed co-occurrence.
    Positive,
    /// Negative sample.
    Negative,
}

impl Label {
    pub fn value(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainingPair {
    pub anchor: Slot,
    pub target: Slot,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-5,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Hyperparameters of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub dim: usize,
    pub epochs: usize,
    /// Negative samples per positive pair.
    pub negatives: usize,
    /// Skip-gram context radius.
    pub window: usize,
    pub adam: AdamConfig,
    /// Half-width of the uniform initializer; `None` means `0.5 / dim`.
    pub init_scale: Option<f64>,
    /// Exponent of the unigram noise distribution for words.
    pub noise_power: f64,
    pub tasks: TaskSet,
    /// Draw user-word positives from the document plus the user's frequent
    /// words. Without it only the document's tokens are used.
    pub user_vocab_positives: bool,
    /// Worker threads. 1 is deterministic; more runs lock-free and
    /// nondeterministic.
    pub threads: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 300,
            epochs: 5,
            negatives: 5,
            window: 5,
            adam: AdamConfig::default(),
            init_scale: None,
            noise_power: 0.75,
            tasks: TaskSet::all(),
            user_vocab_positives: true,
            threads: 1,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn init_scale(&self) -> f64 {
        self.init_scale.unwrap_or(0.5 / self.dim as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::invalid("dim must be at least 1"));
        }
        if self.negatives == 0 {
            return Err(Error::invalid("negatives must be at least 1"));
        }
        let a = &self.adam;
        if !(a.learning_rate > 0.0 && a.learning_rate.is_finite()) {
            return Err(Error::invalid("learning_rate must be positive"));
        }
        if !((0.0..1.0).contains(&a.beta1) && (0.0..1.0).contains(&a.beta2) && a.eps > 0.0) {
            return Err(Error::invalid("Adam betas must lie in [0, 1) and eps must be positive"));
        }
        if !(self.init_scale() > 0.0 && self.init_scale().is_finite()) {
            return Err(Error::invalid("init_scale must be positive"));
        }
        if self.threads == 0 {
            return Err(Error::invalid("threads must be at least 1"));
        }
        Ok(())
    }
}

/// Dense vectors for one entity family plus per-row Adam state.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub kind: TableKind,
    dim: usize,
    values: Vec<f64>,
    adam_m: Vec<f64>,
    adam_v: Vec<f64>,
    adam_t: Vec<u64>,
}

/// Mutable view of one row and its optimizer state.
pub(crate) struct RowMut<'a> {
    pub values: &'a mut [f64],
    pub m: &'a mut [f64],
    pub v: &'a mut [f64],
    pub t: &'a mut u64,
}

fn two_chunks_mut(buf: &mut [f64], dim: usize, r1: usize, r2: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert_ne!(r1, r2);
    if r1 < r2 {
        let (lo, hi) = buf.split_at_mut(r2 * dim);
        (&mut lo[r1 * dim..(r1 + 1) * dim], &mut hi[..dim])
    } else {
        let (lo, hi) = buf.split_at_mut(r1 * dim);
        (&mut hi[..dim], &mut lo[r2 * dim..(r2 + 1) * dim])
    }
}

impl EmbeddingTable {
    pub fn zeros(kind: TableKind, rows: usize, dim: usize) -> Self {
        EmbeddingTable {
            kind,
            dim,
            values: vec![0.0; rows * dim],
            adam_m: vec![0.0; rows * dim],
            adam_v: vec![0.0; rows * dim],
            adam_t: vec![0; rows],
        }
    }

    /// Builds a table from row-major values with fresh optimizer state.
    pub fn from_values(kind: TableKind, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || values.len() % dim != 0 {
            return Err(Error::invalid(format!(
                "{} values do not form rows of width {dim}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("{} table row {}", kind.as_str(), i / dim),
            });
        }
        let rows = values.len() / dim;
        let mut table = Self::zeros(kind, rows, dim);
        table.values = values;
        Ok(table)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.adam_t.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.dim..(r + 1) * self.dim]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.values[r * self.dim..(r + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of Adam steps applied to row `r`.
    pub fn steps(&self, r: usize) -> u64 {
        self.adam_t[r]
    }

    pub fn moments(&self, r: usize) -> (&[f64], &[f64]) {
        let span = r * self.dim..(r + 1) * self.dim;
        (&self.adam_m[span.clone()], &self.adam_v[span])
    }

    pub(crate) fn state_mut(&mut self, r: usize) -> RowMut<'_> {
        let span = r * self.dim..(r + 1) * self.dim;
        RowMut {
            values: &mut self.values[span.clone()],
            m: &mut self.adam_m[span.clone()],
            v: &mut self.adam_v[span],
            t: &mut self.adam_t[r],
        }
    }

    pub(crate) fn two_states_mut(&mut self, r1: usize, r2: usize) -> (RowMut<'_>, RowMut<'_>) {
        let dim = self.dim;
        let (v1, v2) = two_chunks_mut(&mut self.values, dim, r1, r2);
        let (m1, m2) = two_chunks_mut(&mut self.adam_m, dim, r1, r2);
        let (s1, s2) = two_chunks_mut(&mut self.adam_v, dim, r1, r2);
        let (t1, t2) = if r1 < r2 {
            let (lo, hi) = self.adam_t.split_at_mut(r2);
            (&mut lo[r1], &mut hi[0])
        } else {
            let (lo, hi) = self.adam_t.split_at_mut(r1);
            (&mut hi[0], &mut lo[r2])
        };
        (
            RowMut { values: v1, m: m1, v: s1, t: t1 },
            RowMut { values: v2, m: m2, v: s2, t: t2 },
        )
    }

    pub(crate) fn raw_parts(&self) -> (&[f64], &[f64], &[f64], &[u64]) {
        (&self.values, &self.adam_m, &self.adam_v, &self.adam_t)
    }

    pub(crate) fn from_raw_parts(
        kind: TableKind,
        dim: usize,
        values: Vec<f64>,
        adam_m: Vec<f64>,
        adam_v: Vec<f64>,
        adam_t: Vec<u64>,
    ) -> Self {
        EmbeddingTable {
            kind,
            dim,
            values,
            adam_m,
            adam_v,
            adam_t,
        }
    }
}

/// The three jointly trained tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub word: EmbeddingTable,
    pub user: EmbeddingTable,
    pub item: EmbeddingTable,
}

impl Model {
    pub fn table(&self, kind: TableKind) -> &EmbeddingTable {
        match kind {
            TableKind::Word => &self.word,
            TableKind::User => &self.user,
            TableKind::Item => &self.item,
        }
    }

    pub fn table_mut(&mut self, kind: TableKind) -> &mut EmbeddingTable {
        match kind {
            TableKind::Word => &mut self.word,
            TableKind::User => &mut self.user,
            TableKind::Item => &mut self.item,
        }
    }

    pub fn dim(&self) -> usize {
        self.word.dim
    }

    /// One stochastic step on `pair`: loss and gradients from the current
    /// vectors, then an Adam update of both rows. Returns the pair's loss.
    pub fn apply_pair(&mut self, pair: &TrainingPair, adam: &AdamConfig, scratch: &mut Scratch) -> Result<f64> {
        let (a, t) = (pair.anchor, pair.target);
        let y = pair.label.value();
        if a == t {
            let mut row = self.table_mut(a.kind).state_mut(a.row);
            return apply_self_pair(&mut row, y, adam, scratch, pair);
        }
        if a.kind == t.kind {
            let (mut ra, mut rt) = self.table_mut(a.kind).two_states_mut(a.row, t.row);
            return apply_rows(&mut ra, &mut rt, y, adam, scratch, pair);
        }
        let (ta, tt) = self.two_tables_mut(a.kind, t.kind);
        apply_rows(&mut ta.state_mut(a.row), &mut tt.state_mut(t.row), y, adam, scratch, pair)
    }

    fn two_tables_mut(&mut self, a: TableKind, b: TableKind) -> (&mut EmbeddingTable, &mut EmbeddingTable) {
        use TableKind::*;
        let Model { word, user, item } = self;
        match (a, b) {
            (Word, User) => (word, user),
            (Word, Item) => (word, item),
            (User, Word) => (user, word),
            (User, Item) => (user, item),
            (Item, Word) => (item, word),
            (Item, User) => (item, user),
            _ => unreachable!("same-kind pairs are handled by the caller"),
        }
    }
}

/// Reusable gradient buffers.
#[derive(Debug, Default)]
pub struct Scratch {
    grad_a: Vec<f64>,
    grad_t: Vec<f64>,
}

pub(crate) fn apply_rows(
    a: &mut RowMut<'_>,
    t: &mut RowMut<'_>,
    y: f64,
    adam: &AdamConfig,
    scratch: &mut Scratch,
    pair: &TrainingPair,
) -> Result<f64> {
    let s = dot(a.values, t.values);
    if !s.is_finite() {
        return Err(non_finite(pair));
    }
    let coef = sigmoid(s) - y;
    scratch.grad_a.clear();
    scratch.grad_a.extend(t.values.iter().map(|x| coef * x));
    scratch.grad_t.clear();
    scratch.grad_t.extend(a.values.iter().map(|x| coef * x));
    adam_step(a, &scratch.grad_a, adam);
    adam_step(t, &scratch.grad_t, adam);
    Ok(bce(s, y))
}

/// A row paired with itself: `s = a·a`, so the gradient is `2 (σ(s) - y) a`.
pub(crate) fn apply_self_pair(
    a: &mut RowMut<'_>,
    y: f64,
    adam: &AdamConfig,
    scratch: &mut Scratch,
    pair: &TrainingPair,
) -> Result<f64> {
    let s = dot(a.values, a.values);
    if !s.is_finite() {
        return Err(non_finite(pair));
    }
    let coef = 2.0 * (sigmoid(s) - y);
    scratch.grad_a.clear();
    scratch.grad_a.extend(a.values.iter().map(|x| coef * x));
    adam_step(a, &scratch.grad_a, adam);
    Ok(bce(s, y))
}

fn non_finite(pair: &TrainingPair) -> Error {
    Error::NonFinite {
        context: format!(
            "score of {} {} / {} {}",
            pair.anchor.kind.as_str(),
            pair.anchor.row,
            pair.target.kind.as_str(),
            pair.target.row
        ),
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Logistic function, evaluated without overflow for any finite input.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn bce(s: f64, y: f64) -> f64 {
    // 1 - σ(s) = σ(-s), computed directly to avoid cancellation
    let pos = sigmoid(s).max(LOSS_EPS).ln();
    let neg = sigmoid(-s).max(LOSS_EPS).ln();
    -(y * pos + (1.0 - y) * neg)
}

/// σ(a·t).
pub fn score(a: &[f64], t: &[f64]) -> Result<f64> {
    if a.len() != t.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: t.len(),
        });
    }
    Ok(sigmoid(dot(a, t)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairGradient {
    pub loss: f64,
    pub grad_anchor: Vec<f64>,
    pub grad_target: Vec<f64>,
}

pub fn loss_and_grad(a: &[f64], t: &[f64], label: Label) -> Result<PairGradient> {
    if a.len() != t.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: t.len(),
        });
    }
    let s = dot(a, t);
    if !s.is_finite() {
        return Err(Error::NonFinite {
            context: "pair score".into(),
        });
    }
    let y = label.value();
    let coef = sigmoid(s) - y;
    Ok(PairGradient {
        loss: bce(s, y),
        grad_anchor: t.iter().map(|x| coef * x).collect(),
        grad_target: a.iter().map(|x| coef * x).collect(),
    })
}

pub(crate) fn adam_step(row: &mut RowMut<'_>, grad: &[f64], cfg: &AdamConfig) {
    *row.t += 1;
    let t = *row.t as i32;
    let bias1 = 1.0 - cfg.beta1.powi(t);
    let bias2 = 1.0 - cfg.beta2.powi(t);
    for (((x, m), v), &g) in row.values.iter_mut().zip(row.m.iter_mut()).zip(row.v.iter_mut()).zip(grad) {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / bias1;
        let v_hat = *v / bias2;
        *x -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.eps);
    }
}

/// Lazy Adam: only `row` moves, and only its own step counter advances.
pub fn adam_update(table: &mut EmbeddingTable, row: usize, grad: &[f64], cfg: &AdamConfig) -> Result<()> {
    if grad.len() != table.dim {
        return Err(Error::DimensionMismatch {
            expected: table.dim,
            actual: grad.len(),
        });
    }
    if row >= table.rows() {
        return Err(Error::invalid(format!(
            "row {row} out of range for {} table of {} rows",
            table.kind.as_str(),
            table.rows()
        )));
    }
    adam_step(&mut table.state_mut(row), grad, cfg);
    Ok(())
}

/// Uniform initialization in `[-init_scale, init_scale]`, filling the word,
/// user and item tables in that order from one seeded stream.
pub fn init_model(vocab_size: usize, n_users: usize, n_items: usize, config: &TrainConfig) -> Result<Model> {
    config.validate()?;
    if vocab_size == 0 || n_users == 0 || n_items == 0 {
        return Err(Error::invalid("every table needs at least one row"));
    }
    let scale = config.init_scale();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut fill = |kind, rows| {
        let mut table = EmbeddingTable::zeros(kind, rows, config.dim);
        for x in &mut table.values {
            *x = rng.gen_range(-scale..=scale);
        }
        table
    };
    Ok(Model {
        word: fill(TableKind::Word, vocab_size),
        user: fill(TableKind::User, n_users),
        item: fill(TableKind::Item, n_items),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sigmoid_values() {
        assert_eq!(score(&[0.0, 0.0], &[3.0, -1.0]).unwrap(), 0.5);
        // closed form 1 / (1 + e^-1)
        let s1 = 1.0 / (1.0 + (-1f64).exp());
        assert!(close(score(&[1.0], &[1.0]).unwrap(), 0.7310586, 1e-7));
        assert!(close(score(&[1.0], &[-1.0]).unwrap(), 1.0 - s1, 1e-15));
        assert!(close(sigmoid(-1.0), 0.2689414, 1e-7));
        assert!(sigmoid(700.0) <= 1.0 && sigmoid(-700.0) >= 0.0);
        assert!(sigmoid(-745.0).is_finite());
        assert!(score(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn loss_examples() {
        let g = loss_and_grad(&[0.0; 3], &[0.0; 3], Label::Positive).unwrap();
        assert!(close(g.loss, std::f64::consts::LN_2, 1e-15));
        assert!(g.grad_anchor.iter().chain(&g.grad_target).all(|&x| x == 0.0));

        let g = loss_and_grad(&[1.0], &[1.0], Label::Positive).unwrap();
        assert!(close(g.loss, 0.3132617, 1e-7));
        assert!(close(g.grad_anchor[0], -0.2689414, 1e-7));
        let g = loss_and_grad(&[1.0], &[1.0], Label::Negative).unwrap();
        assert!(close(g.loss, 1.3132617, 1e-7));
        assert!(close(g.grad_anchor[0], 0.7310586, 1e-7));
    }

    #[test]
    fn loss_is_floored_for_extreme_scores() {
        let g = loss_and_grad(&[30.0], &[30.0], Label::Negative).unwrap();
        assert!(close(g.loss, -LOSS_EPS.ln(), 1e-9));
        assert!(g.loss.is_finite());
        assert!(loss_and_grad(&[f64::MAX], &[f64::MAX], Label::Positive).is_err());
    }

    #[test]
    fn zero_gradient_leaves_row_but_counts_step() {
        let mut table = EmbeddingTable::from_values(TableKind::User, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        adam_update(&mut table, 1, &[0.0, 0.0], &AdamConfig::default()).unwrap();
        assert_eq!(table.row(1), [0.3, 0.4]);
        assert_eq!(table.steps(1), 1);
        assert_eq!(table.steps(0), 0);
        assert!(adam_update(&mut table, 0, &[0.0], &AdamConfig::default()).is_err());
    }

    #[test]
    fn first_adam_step_is_sign_like() {
        let cfg = AdamConfig {
            learning_rate: 0.01,
            ..Default::default()
        };
        let mut table = EmbeddingTable::from_values(TableKind::Word, 3, vec![0.0; 3]).unwrap();
        let g = [0.5, -2.0, 1e-3];
        adam_update(&mut table, 0, &g, &cfg).unwrap();
        for (x, gi) in table.row(0).iter().zip(g) {
            let expected = -cfg.learning_rate * gi / (gi.abs() + cfg.eps);
            assert!(close(*x, expected, 1e-15), "{x} vs {expected}");
        }
    }

    #[test]
    fn untouched_rows_unchanged() {
        let mut table = EmbeddingTable::from_values(TableKind::Item, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        adam_update(&mut table, 0, &[1.0, 1.0], &AdamConfig::default()).unwrap();
        assert_eq!(table.row(1), [3.0, 4.0]);
        assert_eq!(table.moments(1), (&[0.0, 0.0][..], &[0.0, 0.0][..]));
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let cfg = TrainConfig::default();
        let a = init_model(50, 10, 5, &cfg).unwrap();
        let b = init_model(50, 10, 5, &cfg).unwrap();
        assert_eq!(a, b);
        let bound = 0.5 / 300.0;
        for t in [&a.word, &a.user, &a.item] {
            assert!(t.values().iter().all(|x| x.abs() <= bound));
        }
        let other = init_model(50, 10, 5, &TrainConfig { seed: 7, ..cfg }).unwrap();
        assert_ne!(a.word, other.word);
    }

    #[test]
    fn init_mean_is_zero_within_three_standard_errors() {
        let cfg = TrainConfig::default();
        let model = init_model(1000, 1, 1, &cfg).unwrap();
        let values = model.word.values();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        // uniform on [-s, s] has variance s²/3
        let s = cfg.init_scale();
        let se = (s * s / 3.0 / n).sqrt();
        assert!(mean.abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn apply_pair_matches_explicit_steps() {
        let cfg = TrainConfig {
            dim: 4,
            ..Default::default()
        };
        let adam = AdamConfig {
            learning_rate: 0.05,
            ..Default::default()
        };
        let model = init_model(3, 2, 2, &cfg).unwrap();
        let pair = TrainingPair {
            anchor: Slot::user(1),
            target: Slot::word(2),
            label: Label::Positive,
        };
        let mut fast = model.clone();
        let loss = fast.apply_pair(&pair, &adam, &mut Scratch::default()).unwrap();

        let mut slow = model.clone();
        let g = loss_and_grad(slow.user.row(1), slow.word.row(2), Label::Positive).unwrap();
        adam_update(&mut slow.user, 1, &g.grad_anchor, &adam).unwrap();
        adam_update(&mut slow.word, 2, &g.grad_target, &adam).unwrap();
        assert_eq!(loss, g.loss);
        assert_eq!(fast, slow);
    }

    #[test]
    fn self_pair_uses_doubled_gradient() {
        let adam = AdamConfig {
            learning_rate: 0.01,
            ..Default::default()
        };
        let word = EmbeddingTable::from_values(TableKind::Word, 3, vec![0.5, -0.3, 0.2]).unwrap();
        let mut model = Model {
            word,
            user: EmbeddingTable::zeros(TableKind::User, 1, 3),
            item: EmbeddingTable::zeros(TableKind::Item, 1, 3),
        };
        let pair = TrainingPair {
            anchor: Slot::word(0),
            target: Slot::word(0),
            label: Label::Negative,
        };
        let loss = model.apply_pair(&pair, &adam, &mut Scratch::default()).unwrap();
        assert!(close(loss, -sigmoid(-0.38).ln(), 1e-15));
        assert_eq!(model.word.steps(0), 1);
        // first Adam step moves each coordinate by lr against the gradient sign
        let expected = [0.49, -0.29, 0.19];
        for (a, e) in model.word.row(0).iter().zip(expected) {
            assert!(close(*a, e, 1e-9), "{a} vs {e}");
        }
    }
}
