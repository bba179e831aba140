//! Thin bridge between the `ndarray` containers used throughout the crate and
//! the dense decompositions provided by `nalgebra`.

use nalgebra::DMatrix;
use ndarray::Array2;

pub fn to_dmatrix(a: &Array2<f64>) -> DMatrix<f64> {
    let (r, c) = a.dim();
    DMatrix::from_fn(r, c, |i, j| a[[i, j]])
}

pub fn from_dmatrix(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
/// Column `k` of the returned matrix is the eigenvector of value `k`.
pub fn symmetric_eigh(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let eig = to_dmatrix(a).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(i, c)| eig.eigenvectors[(i, order[c])]);
    (values, vectors)
}

/// Matrix exponential (Padé with scaling and squaring).
pub fn expm(a: &Array2<f64>) -> Array2<f64> {
    from_dmatrix(&to_dmatrix(a).exp())
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn determinant(a: &Array2<f64>) -> f64 {
    to_dmatrix(a).determinant()
}
