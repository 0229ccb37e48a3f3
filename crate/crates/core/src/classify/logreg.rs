use serde::{Deserialize, Serialize};

use super::SparseRows;
use crate::corpus::Sentiment;
use crate::error::{Error, Result};

pub const N_CLASSES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogRegConfig {
    /// Inverse L2 strength: the penalty is `‖W‖² / (2C)`.
    pub c: f64,
    pub max_iter: usize,
    /// Stop once the gradient's largest absolute entry is below this.
    pub tol: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            c: 1.0,
            max_iter: 1000,
            tol: 1e-4,
        }
    }
}

/// Multinomial logistic regression over the three sentiment classes.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    pub config: LogRegConfig,
    n_features: usize,
    /// `n_features × 3`, row-major.
    weights: Vec<f64>,
    bias: [f64; N_CLASSES],
    pub converged: bool,
    pub iterations: usize,
    pub final_loss: f64,
    pub grad_inf_norm: f64,
}

impl LogRegModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> [f64; N_CLASSES] {
        self.bias
    }

    pub fn predict_proba(&self, x: &SparseRows) -> Result<Vec<[f64; N_CLASSES]>> {
        if x.cols() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: x.cols(),
            });
        }
        Ok((0..x.rows())
            .map(|r| softmax(logits(x, r, &self.weights, &self.bias)))
            .collect())
    }

    /// Most probable class per row; ties go to the earlier class.
    pub fn predict(&self, x: &SparseRows) -> Result<Vec<Sentiment>> {
        Ok(self
            .predict_proba(x)?
            .into_iter()
            .map(|p| {
                let best = (0..N_CLASSES).fold(0, |b, c| if p[c] > p[b] { c } else { b });
                Sentiment::ALL[best]
            })
            .collect())
    }
}

fn logits(x: &SparseRows, r: usize, w: &[f64], b: &[f64; N_CLASSES]) -> [f64; N_CLASSES] {
    let mut z = *b;
    let (idx, val) = x.row(r);
    for (&i, &v) in idx.iter().zip(val) {
        let row = &w[i as usize * N_CLASSES..(i as usize + 1) * N_CLASSES];
        for c in 0..N_CLASSES {
            z[c] += v * row[c];
        }
    }
    z
}

fn softmax(z: [f64; N_CLASSES]) -> [f64; N_CLASSES] {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = z.map(|v| (v - m).exp());
    let s: f64 = e.iter().sum();
    e.map(|v| v / s)
}

/// Summed cross-entropy plus `‖W‖² / (2C)`; the bias is not penalized.
pub fn objective(x: &SparseRows, y: &[usize], w: &[f64], b: &[f64; N_CLASSES], c: f64) -> f64 {
    let mut loss = 0.0;
    for (r, &label) in y.iter().enumerate() {
        let z = logits(x, r, w, b);
        let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        loss += lse - z[label];
    }
    loss + w.iter().map(|v| v * v).sum::<f64>() / (2.0 * c)
}

fn gradient(
    x: &SparseRows,
    y: &[usize],
    w: &[f64],
    b: &[f64; N_CLASSES],
    c: f64,
    gw: &mut [f64],
    gb: &mut [f64; N_CLASSES],
) {
    for (g, v) in gw.iter_mut().zip(w) {
        *g = v / c;
    }
    *gb = [0.0; N_CLASSES];
    for (r, &label) in y.iter().enumerate() {
        let mut p = softmax(logits(x, r, w, b));
        p[label] -= 1.0;
        let (idx, val) = x.row(r);
        for (&i, &v) in idx.iter().zip(val) {
            let row = &mut gw[i as usize * N_CLASSES..(i as usize + 1) * N_CLASSES];
            for k in 0..N_CLASSES {
                row[k] += v * p[k];
            }
        }
        for k in 0..N_CLASSES {
            gb[k] += p[k];
        }
    }
}

/// Full-batch gradient descent with Armijo backtracking. Hitting
/// `max_iter` leaves `converged` false rather than failing.
pub fn train_logreg(x: &SparseRows, y: &[Sentiment], config: &LogRegConfig) -> Result<LogRegModel> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::invalid("cannot fit a classifier on zero rows"));
    }
    if !(config.c > 0.0 && config.tol > 0.0) {
        return Err(Error::invalid("C and tolerance must be positive"));
    }
    let labels: Vec<usize> = y.iter().map(|s| s.index()).collect();
    let d = x.cols();
    let mut w = vec![0.0; d * N_CLASSES];
    let mut b = [0.0; N_CLASSES];
    let mut gw = vec![0.0; d * N_CLASSES];
    let mut gb = [0.0; N_CLASSES];
    let mut trial_w = vec![0.0; d * N_CLASSES];
    let mut f = objective(x, &labels, &w, &b, config.c);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut inf_norm;
    loop {
        gradient(x, &labels, &w, &b, config.c, &mut gw, &mut gb);
        inf_norm = gw.iter().chain(&gb).fold(0.0f64, |m, g| m.max(g.abs()));
        if inf_norm < config.tol {
            converged = true;
            break;
        }
        if iterations == config.max_iter {
            break;
        }
        let g2: f64 = gw.iter().chain(&gb).map(|g| g * g).sum();
        // grow the step a little each iteration, then backtrack
        step *= 2.0;
        let mut accepted = false;
        for _ in 0..60 {
            for ((t, wi), gi) in trial_w.iter_mut().zip(&w).zip(&gw) {
                *t = wi - step * gi;
            }
            let mut trial_b = b;
            for k in 0..N_CLASSES {
                trial_b[k] -= step * gb[k];
            }
            let ft = objective(x, &labels, &trial_w, &trial_b, config.c);
            if ft <= f - 0.5 * step * g2 {
                std::mem::swap(&mut w, &mut trial_w);
                b = trial_b;
                f = ft;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        if !accepted {
            // no representable descent step remains
            break;
        }
    }
    if !f.is_finite() || w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric {
            message: "logistic regression diverged".into(),
        });
    }
    Ok(LogRegModel {
        config: *config,
        n_features: d,
        weights: w,
        bias: b,
        converged,
        iterations,
        final_loss: f,
        grad_inf_norm: inf_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_one_dimensional() {
        let x = SparseRows::from_dense(1, &[vec![-1.0], vec![1.0]]).unwrap();
        let y = [Sentiment::Positive, Sentiment::Negative];
        let m = train_logreg(&x, &y, &LogRegConfig::default()).unwrap();
        assert_eq!(m.predict(&x).unwrap(), y);
    }

    #[test]
    fn no_signal_gives_uniform_probabilities() {
        let rows = vec![vec![0.5, 0.5]; 6];
        let x = SparseRows::from_dense(2, &rows).unwrap();
        let y = [
            Sentiment::Positive,
            Sentiment::Negative,
            Sentiment::Neutral,
            Sentiment::Positive,
            Sentiment::Negative,
            Sentiment::Neutral,
        ];
        let m = train_logreg(&x, &y, &LogRegConfig::default()).unwrap();
        assert!(m.converged);
        for p in m.predict_proba(&x).unwrap() {
            assert!(p.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-3));
        }
    }

    #[test]
    fn iteration_cap_sets_warning() {
        let x = SparseRows::from_dense(1, &[vec![-1.0], vec![1.0], vec![2.0]]).unwrap();
        let y = [Sentiment::Positive, Sentiment::Negative, Sentiment::Negative];
        let cfg = LogRegConfig {
            max_iter: 2,
            ..Default::default()
        };
        let m = train_logreg(&x, &y, &cfg).unwrap();
        assert!(!m.converged);
        assert_eq!(m.iterations, 2);
    }

    #[test]
    fn rejects_shape_errors() {
        let x = SparseRows::from_dense(1, &[vec![1.0]]).unwrap();
        assert!(train_logreg(&x, &[], &LogRegConfig::default()).is_err());
        let m = train_logreg(&x, &[Sentiment::Neutral], &LogRegConfig::default()).unwrap();
        assert!(m.predict(&SparseRows::new(2)).is_err());
    }
}
