use nalgebra::SymmetricEigen;

use super::{Scalar, SparseHermitian};

/// Lowest `k` eigenpairs by dense Hermitian decomposition.
pub fn dense_eigenpairs<T: Scalar>(a: &SparseHermitian<T>, k: usize) -> (Vec<f64>, Vec<Vec<T>>) {
    let eig = SymmetricEigen::new(a.to_dense());
    let mut order: Vec<usize> = (0..a.dim()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().take(k).map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .take(k)
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    (values, vectors)
}

/// All eigenpairs of a small dense Hermitian matrix, ascending.
pub(crate) fn dense_hermitian<T: Scalar>(a: nalgebra::DMatrix<T>) -> (Vec<f64>, nalgebra::DMatrix<T>) {
    let n = a.nrows();
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = nalgebra::DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vecs)
}
