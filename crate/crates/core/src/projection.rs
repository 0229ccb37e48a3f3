//! Two-dimensional projection of embeddings for plotting.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Principal-component projection of row vectors onto the top `dims`
/// directions of the centred covariance. Component signs are fixed so the
/// largest-magnitude loading is positive.
pub fn pca(vectors: &[f64], dim: usize, dims: usize) -> Result<Vec<f64>> {
    if dim == 0 || vectors.len() % dim != 0 {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: vectors.len(),
        });
    }
    let n = vectors.len() / dim;
    if n < 2 || dims == 0 || dims > dim {
        return Err(Error::invalid(format!(
            "cannot project {n} vectors of dimension {dim} onto {dims} components"
        )));
    }
    let x = DMatrix::from_row_slice(n, dim, vectors);
    let mean = x.row_mean();
    let centred = DMatrix::from_fn(n, dim, |i, j| x[(i, j)] - mean[j]);
    let cov = centred.transpose() * &centred / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut out = vec![0.0; n * dims];
    for (c, &col) in order.iter().take(dims).enumerate() {
        let mut v = eig.eigenvectors.column(col).into_owned();
        let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if pivot < 0.0 {
            v.neg_mut();
        }
        let scores = &centred * v;
        for i in 0..n {
            out[i * dims + c] = scores[i];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_on_a_line_project_to_first_axis() {
        // (t, 2t, 0) for t = -1, 0, 1
        let v = [-1.0, -2.0, 0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 0.0];
        let p = pca(&v, 3, 2).unwrap();
        let s5 = 5f64.sqrt();
        let expected = [-s5, 0.0, 0.0, 0.0, s5, 0.0];
        for (a, b) in p.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn projection_preserves_centred_distances_in_full_rank() {
        let v = [0.3, -1.2, 2.0, 0.5, -0.7, 0.1, 1.1, 1.9];
        let p = pca(&v, 2, 2).unwrap();
        let d = |a: &[f64], i: usize, j: usize| {
            ((a[2 * i] - a[2 * j]).powi(2) + (a[2 * i + 1] - a[2 * j + 1]).powi(2)).sqrt()
        };
        for i in 0..4 {
            for j in 0..4 {
                assert!((d(&v, i, j) - d(&p, i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(pca(&[1.0, 2.0, 3.0], 2, 1).is_err());
        assert!(pca(&[1.0, 2.0], 2, 1).is_err());
        assert!(pca(&[1.0, 2.0, 3.0, 4.0], 2, 3).is_err());
    }
}
