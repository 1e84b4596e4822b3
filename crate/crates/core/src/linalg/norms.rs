use super::matrix::DenseMatrix;
use super::svd::singular_values_lenient;

/// `sqrt(sum a_ij^2)`.
pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    frobenius_norm_sq(a).sqrt()
}

pub fn frobenius_norm_sq(a: &DenseMatrix) -> f64 {
    a.as_slice().iter().map(|v| v * v).sum()
}

/// Largest singular value, from the Jacobi reference routine.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    singular_values_lenient(a).first().copied().unwrap_or(0.0)
}

/// `‖QᵀQ − I‖_max`.
pub fn orthonormality_defect(q: &DenseMatrix) -> f64 {
    let g = q.gram();
    let mut worst = 0.0_f64;
    for j in 0..g.cols() {
        for i in 0..g.rows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}
