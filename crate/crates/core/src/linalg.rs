use nalgebra::DMatrix;

/// Smallest eigenvalue of the symmetric part `(M + M^T) / 2`.
pub fn min_symmetric_eigenvalue(matrix: &DMatrix<f64>) -> f64 {
    let sym = (matrix + matrix.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

/// Largest singular value.
pub fn spectral_norm(matrix: &DMatrix<f64>) -> f64 {
    if matrix.is_empty() {
        return 0.0;
    }
    matrix.singular_values().max()
}
