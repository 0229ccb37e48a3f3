//! Spectral clustering of user vectors and the pairwise genre F1 metric.
//!
//! Users are compared by clamped cosine affinity, clustered with the
//! normalized-Laplacian embedding plus k-means, and scored over all user
//! pairs: a pair is gold-positive when the two users' genre sets intersect
//! and predicted-positive when they share a cluster.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::UserEmbeddings;
use crate::error::{Error, Result};
use crate::vocab::EntityIndex;

pub const DEFAULT_KS: [usize; 3] = [4, 8, 12];
pub const KMEANS_RESTARTS: usize = 10;
const KMEANS_MAX_ITER: usize = 300;
const SYMMETRY_TOL: f64 = 1e-9;

/// Symmetric, non-negative, unit-diagonal similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl AffinityMatrix {
    /// `values` is row-major `n × n`.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: values.len(),
            });
        }
        for i in 0..n {
            if values[i * n + i] != 1.0 {
                return Err(Error::invalid(format!("affinity diagonal at {i} is not 1")));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::invalid(format!("affinity ({i}, {j}) = {v} outside [0, 1]")));
                }
                if (v - values[j * n + i]).abs() > SYMMETRY_TOL {
                    return Err(Error::invalid(format!("affinity not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(AffinityMatrix { n, values })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `max(0, cos(v_i, v_j))` for row-major `vectors` of width `dim`.
pub fn cosine_affinity(vectors: &[f64], dim: usize) -> Result<AffinityMatrix> {
    if dim == 0 || vectors.len() % dim != 0 {
        return Err(Error::invalid("vectors do not form rows of the given width"));
    }
    let n = vectors.len() / dim;
    let mut unit = Vec::with_capacity(vectors.len());
    for (i, row) in vectors.chunks(dim).enumerate() {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid(format!("row {i} has zero or non-finite norm")));
        }
        unit.extend(row.iter().map(|x| x / norm));
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        let a = &unit[i * dim..(i + 1) * dim];
        for j in i + 1..n {
            let b = &unit[j * dim..(j + 1) * dim];
            let c = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().clamp(0.0, 1.0);
            values[i * n + j] = c;
            values[j * n + i] = c;
        }
    }
    AffinityMatrix::new(n, values)
}

/// Rows of the spectral embedding: eigenvectors of `D^-1/2 A D^-1/2` for its
/// `k` largest eigenvalues (the `k` smallest of the normalized Laplacian),
/// each row scaled to unit length.
pub fn spectral_embedding(a: &AffinityMatrix, k: usize) -> Result<Vec<f64>> {
    let n = a.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let degree: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a.get(i, j)).sum()).collect();
    if let Some(i) = degree.iter().position(|&d| d <= 0.0) {
        return Err(Error::invalid(format!("node {i} has zero degree")));
    }
    let scale: Vec<f64> = degree.iter().map(|d| 1.0 / d.sqrt()).collect();
    let m = DMatrix::from_fn(n, n, |i, j| scale[i] * a.get(i, j) * scale[j]);
    let eig = SymmetricEigen::try_new(m, 1e-14, 10_000 * n.max(1)).ok_or_else(|| Error::Numeric {
        message: format!("symmetric eigensolver did not converge on {n} nodes"),
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]).then(x.cmp(&y)));

    let mut rows = vec![0.0; n * k];
    for (c, &e) in order.iter().take(k).enumerate() {
        let col = eig.eigenvectors.column(e);
        // fix the sign so the largest-magnitude entry is positive
        let pivot = (0..n).fold(0, |p, i| if col[i].abs() > col[p].abs() { i } else { p });
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            rows[i * k + c] = sign * col[i];
        }
    }
    for row in rows.chunks_mut(k) {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|x| *x /= norm);
        }
    }
    Ok(rows)
}

/// Normalized spectral clustering. Labels lie in `0..k`, numbered by first
/// appearance.
pub fn spectral_cluster(a: &AffinityMatrix, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::invalid("spectral clustering needs k >= 2"));
    }
    let rows = spectral_embedding(a, k)?;
    Ok(kmeans(&rows, k, k, KMEANS_RESTARTS, seed)?.labels)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub labels: Vec<usize>,
    pub inertia: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm from k-means++ seeds; keeps the restart with the
/// lowest inertia.
pub fn kmeans(points: &[f64], dim: usize, k: usize, restarts: usize, seed: u64) -> Result<KMeans> {
    if dim == 0 || points.len() % dim != 0 {
        return Err(Error::invalid("points do not form rows of the given width"));
    }
    let n = points.len() / dim;
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeans> = None;
    for _ in 0..restarts.max(1) {
        let run = kmeans_once(points, dim, n, k, &mut rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let mut best = best.expect("at least one restart");
    let mut rename = BTreeMap::new();
    for l in best.labels.iter_mut() {
        let next = rename.len();
        *l = *rename.entry(*l).or_insert(next);
    }
    Ok(best)
}

fn kmeans_once(points: &[f64], dim: usize, n: usize, k: usize, rng: &mut ChaCha8Rng) -> KMeans {
    let point = |i: usize| &points[i * dim..(i + 1) * dim];
    let mut centers = Vec::with_capacity(k * dim);
    centers.extend_from_slice(point(rng.gen_range(0..n)));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(point(i), &centers[..dim])).collect();
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if r < d {
                    pick = i;
                    break;
                }
                r -= d;
            }
            pick
        } else {
            rng.gen_range(0..n)
        };
        let c = centers.len();
        centers.extend_from_slice(point(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(point(i), &centers[c..c + dim]));
        }
    }

    let mut labels = vec![usize::MAX; n];
    let mut dist = vec![0.0; n];
    for _ in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        for i in 0..n {
            let (mut best, mut best_d) = (0, f64::INFINITY);
            for c in 0..k {
                let d = sq_dist(point(i), &centers[c * dim..(c + 1) * dim]);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            dist[i] = best_d;
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        let mut sizes = vec![0usize; k];
        let mut sums = vec![0.0; k * dim];
        for i in 0..n {
            sizes[labels[i]] += 1;
            for (s, x) in sums[labels[i] * dim..(labels[i] + 1) * dim].iter_mut().zip(point(i)) {
                *s += x;
            }
        }
        for c in 0..k {
            if sizes[c] == 0 {
                // reseed an empty cluster with the worst-fitting point
                let far = (0..n)
                    .filter(|&i| sizes[labels[i]] > 1)
                    .fold(None, |f: Option<usize>, i| match f {
                        Some(j) if dist[j] >= dist[i] => Some(j),
                        _ => Some(i),
                    })
                    .expect("k <= n leaves a cluster with two points");
                sizes[labels[far]] -= 1;
                labels[far] = c;
                dist[far] = 0.0;
                centers[c * dim..(c + 1) * dim].copy_from_slice(point(far));
                changed = true;
            } else {
                for (ctr, s) in centers[c * dim..(c + 1) * dim].iter_mut().zip(&sums[c * dim..(c + 1) * dim]) {
                    *ctr = s / sizes[c] as f64;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let inertia = (0..n)
        .map(|i| sq_dist(point(i), &centers[labels[i] * dim..(labels[i] + 1) * dim]))
        .sum();
    KMeans { labels, inertia }
}

/// Pair-level confusion counts and the F1 of the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl PairScore {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if tp == 0 { 0.0 } else { 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64 };
        PairScore {
            f1,
            precision,
            recall,
            tp,
            fp,
            fn_,
            tn,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

fn check_pair_inputs(labels: &[usize], genres: &[BTreeSet<String>]) -> Result<()> {
    if labels.len() != genres.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            actual: genres.len(),
        });
    }
    if labels.len() < 2 {
        return Err(Error::invalid("pairwise F1 needs at least two users"));
    }
    if let Some(i) = genres.iter().position(BTreeSet::is_empty) {
        return Err(Error::invalid(format!("user {i} has no genres")));
    }
    Ok(())
}

fn choose2(m: u64) -> u64 {
    m * m.saturating_sub(1) / 2
}

/// Exact pairwise genre F1 over all `n(n-1)/2` user pairs.
///
/// Users are grouped by genre set and cluster, so the cost grows with the
/// number of distinct genre sets rather than with `n²`.
pub fn pairwise_genre_f1(labels: &[usize], genres: &[BTreeSet<String>]) -> Result<PairScore> {
    check_pair_inputs(labels, genres)?;
    let mut signatures: BTreeMap<&BTreeSet<String>, usize> = BTreeMap::new();
    let mut clusters: BTreeMap<usize, usize> = BTreeMap::new();
    let mut members: Vec<(usize, usize)> = Vec::with_capacity(labels.len());
    for (l, g) in labels.iter().zip(genres) {
        let s = signatures.len();
        let s = *signatures.entry(g).or_insert(s);
        let c = clusters.len();
        let c = *clusters.entry(*l).or_insert(c);
        members.push((s, c));
    }
    let (ns, nc) = (signatures.len(), clusters.len());
    let mut counts = vec![0u64; ns * nc];
    for &(s, c) in &members {
        counts[s * nc + c] += 1;
    }
    let sets: Vec<&BTreeSet<String>> = {
        let mut v = vec![None; ns];
        for (g, &s) in &signatures {
            v[s] = Some(*g);
        }
        v.into_iter().map(Option::unwrap).collect()
    };
    let mut tp = 0;
    let mut gold = 0;
    for s in 0..ns {
        let size_s: u64 = counts[s * nc..(s + 1) * nc].iter().sum();
        gold += choose2(size_s);
        tp += counts[s * nc..(s + 1) * nc].iter().map(|&m| choose2(m)).sum::<u64>();
        for t in s + 1..ns {
            if sets[s].is_disjoint(sets[t]) {
                continue;
            }
            let size_t: u64 = counts[t * nc..(t + 1) * nc].iter().sum();
            gold += size_s * size_t;
            tp += (0..nc).map(|c| counts[s * nc + c] * counts[t * nc + c]).sum::<u64>();
        }
    }
    let mut cluster_sizes = vec![0u64; nc];
    for &(_, c) in &members {
        cluster_sizes[c] += 1;
    }
    let same: u64 = cluster_sizes.iter().map(|&m| choose2(m)).sum();
    let total = choose2(labels.len() as u64);
    let (fp, fn_) = (same - tp, gold - tp);
    Ok(PairScore::from_counts(tp, fp, fn_, total - tp - fp - fn_))
}

/// Pairwise genre F1 estimated from `n_pairs` uniformly drawn pairs, for
/// populations too large to enumerate.
pub fn pairwise_genre_f1_sampled(
    labels: &[usize],
    genres: &[BTreeSet<String>],
    n_pairs: usize,
    seed: u64,
) -> Result<PairScore> {
    check_pair_inputs(labels, genres)?;
    let n = labels.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for _ in 0..n_pairs {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let gold = !genres[i].is_disjoint(&genres[j]);
        let pred = labels[i] == labels[j];
        match (gold, pred) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(PairScore::from_counts(tp, fp, fn_, tn))
}

/// Fraction of user pairs whose genre sets intersect.
pub fn gold_positive_rate(genres: &[BTreeSet<String>]) -> Result<f64> {
    let labels = vec![0; genres.len()];
    let s = pairwise_genre_f1(&labels, genres)?;
    Ok(s.tp as f64 / s.total() as f64)
}

/// Fraction of pairs sharing a cluster when `n` items are split into `k`
/// clusters as evenly as possible.
pub fn balanced_same_cluster_rate(n: usize, k: usize) -> f64 {
    let (q, r) = (n / k, n % k);
    let same = r as u64 * choose2(q as u64 + 1) + (k - r) as u64 * choose2(q as u64);
    same as f64 / choose2(n as u64) as f64
}

/// Expected F1 when cluster membership is independent of genre: precision
/// equals the gold-positive rate and recall equals the same-cluster rate.
pub fn chance_f1(gold_rate: f64, same_cluster_rate: f64) -> f64 {
    if gold_rate + same_cluster_rate == 0.0 {
        return 0.0;
    }
    2.0 * gold_rate * same_cluster_rate / (gold_rate + same_cluster_rate)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRow {
    pub k: usize,
    pub score: PairScore,
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub method: String,
    pub users: Vec<String>,
    pub rows: Vec<ClusterRow>,
}

impl ClusterReport {
    pub fn f1_at(&self, k: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.k == k).map(|r| r.score.f1)
    }

    /// One line per k: `method,k,f1,tp,fp,fn,tn`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,k,f1,tp,fp,fn,tn\n");
        for r in &self.rows {
            let s = &r.score;
            out.push_str(&format!(
                "{},{},{:.6},{},{},{},{}\n",
                self.method, r.k, s.f1, s.tp, s.fp, s.fn_, s.tn
            ));
        }
        out
    }
}

/// Clusters `embeddings` at each k and scores them against the users'
/// genre sets from `index`.
pub fn evaluate_clustering(
    embeddings: &UserEmbeddings,
    index: &EntityIndex,
    ks: &[usize],
    seed: u64,
) -> Result<ClusterReport> {
    let genres = embeddings
        .users()
        .iter()
        .map(|u| {
            index
                .user_id(u)
                .map(|r| index.user_genres(r))
                .ok_or_else(|| Error::invalid(format!("user {u:?} is not in the index")))
        })
        .collect::<Result<Vec<_>>>()?;
    let affinity = cosine_affinity(embeddings.vectors(), embeddings.dim())?;
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let labels = spectral_cluster(&affinity, k, seed)?;
        let score = pairwise_genre_f1(&labels, &genres)?;
        rows.push(ClusterRow { k, score, labels });
    }
    Ok(ClusterReport {
        method: embeddings.method.as_str().to_string(),
        users: embeddings.users().to_vec(),
        rows,
    })
}
