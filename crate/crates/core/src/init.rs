//! Gaussian initialization, the nullspace-restricted start block `XZ`, and
//! principal-angle measurement.
//!
//! For an orthogonal `U = [u_1, …, u_n]` and a start block `X` (`n x p`),
//! write `C = UᵀX` and split its rows into `C₁` (first `k`), `C₂` (next
//! `p − k`) and `C₃` (the rest). Any orthonormal `Z` with `C₂ Z = 0` makes
//! `XZ` blind to `u_{k+1}, …, u_p`, so the angle between `range(U_k)` and
//! `range(XZ)` is governed by `‖C₃‖₂ / σ_k(C₁)` alone. For Gaussian `X`
//! that ratio is at most `(√(n−p) + √p + α) / (√p − √k − α)` with
//! probability at least `1 − 2·exp(−α²/2)`.

use crate::error::{Error, Result};
use crate::linalg::{
    orthonormality_defect, pseudo_inverse, qr_thin, right_singular_basis, singular_values,
    spectral_norm, DenseMatrix,
};
use crate::rng::gaussian_matrix;

/// Cosines below this make the tangent unbounded.
pub const SINGULAR_COSINE: f64 = 1e-12;

/// Outcome of one Gaussian draw against a fixed orthogonal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct InitializationReport {
    /// `p x k` with orthonormal columns and `C₂ Z = 0`.
    pub z: DenseMatrix,
    /// `tan θ(U_k, XZ)`; infinite when `U_kᵀ XZ` is singular.
    pub tan_theta_xz: f64,
    pub theoretical_bound: f64,
    pub alpha: f64,
    pub failure_probability: f64,
    /// `‖C₂ Z‖_max`, the measured nullspace residual.
    pub nullspace_residual: f64,
}

impl InitializationReport {
    pub fn within_bound(&self) -> bool {
        self.tan_theta_xz <= self.theoretical_bound
    }
}

/// `(√(n−p) + √p + α) / (√p − √k − α)`.
pub fn init_angle_bound(n: usize, p: usize, k: usize, alpha: f64) -> Result<f64> {
    check_kpn(n, p, k)?;
    let denominator = (p as f64).sqrt() - (k as f64).sqrt() - alpha;
    if !(denominator > 0.0) {
        return Err(Error::InvalidAlpha { denominator });
    }
    Ok((((n - p) as f64).sqrt() + (p as f64).sqrt() + alpha) / denominator)
}

/// `2·exp(−α²/2)`, the failure probability attached to the bound above.
pub fn failure_probability(alpha: f64) -> f64 {
    2.0 * (-alpha * alpha / 2.0).exp()
}

fn check_kpn(n: usize, p: usize, k: usize) -> Result<()> {
    if k >= p {
        return Err(Error::Dimension(format!("need k < p, got k={k}, p={p}")));
    }
    if p > n {
        return Err(Error::Dimension(format!("need p <= n, got p={p}, n={n}")));
    }
    Ok(())
}

/// `p x k` orthonormal `Z` spanning the trailing right singular directions
/// of `C₂ = [u_{k+1}, …, u_p]ᵀ X`, so that `C₂ Z ≈ 0`.
pub fn construct_z(u: &DenseMatrix, x: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    let (n, p) = x.shape();
    check_kpn(n, p, k)?;
    if u.rows() != n || u.cols() < p {
        return Err(Error::Dimension(format!(
            "basis is {}x{}, start block is {n}x{p}",
            u.rows(),
            u.cols()
        )));
    }
    let c2 = u.columns(k..p).t_matmul(x);
    let (_, v) = right_singular_basis(&c2)?;
    Ok(v.columns(p - k..p))
}

/// Checks that `u` is square and orthogonal to 1e-8.
pub fn check_orthogonal(u: &DenseMatrix) -> Result<()> {
    if u.rows() != u.cols() {
        return Err(Error::Dimension(format!(
            "orthogonal basis must be square, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    let deviation = orthonormality_defect(u);
    if deviation > 1e-8 {
        return Err(Error::NotOrthonormal { deviation });
    }
    Ok(())
}

/// `tan θ(U_k, W)` for `rank(W) = k`: the largest tangent of the principal
/// angles between `range(U_k)` and `range(W)`.
///
/// Computed as `‖(I − U_k U_kᵀ) Q_W (U_kᵀ Q_W)⁻¹‖₂` with `Q_W` from a thin QR
/// of `W`. Returns `f64::INFINITY` when `U_kᵀ Q_W` has a singular value
/// at or below [`SINGULAR_COSINE`].
pub fn tan_angle_kdim(u_k: &DenseMatrix, w: &DenseMatrix) -> Result<f64> {
    if u_k.rows() != w.rows() || u_k.cols() != w.cols() {
        return Err(Error::Dimension(format!(
            "subspace bases {}x{} and {}x{} differ in shape",
            u_k.rows(),
            u_k.cols(),
            w.rows(),
            w.cols()
        )));
    }
    if w.cols() == 0 {
        return Ok(0.0);
    }
    let (q, _) = qr_thin(w)?;
    let cosines = u_k.t_matmul(&q);
    let smallest = singular_values(&cosines)?
        .last()
        .copied()
        .unwrap_or(0.0);
    if smallest <= SINGULAR_COSINE {
        return Ok(f64::INFINITY);
    }
    let residual = q.sub(&u_k.matmul(&cosines));
    let inv = pseudo_inverse(&cosines, 0.0)?;
    Ok(spectral_norm(&residual.matmul(&inv)))
}

/// Draws Gaussian `X` (`n x p`), builds `Z` against the orthogonal `u`,
/// and measures `tan θ(U_k, XZ)` alongside its high-probability bound.
pub fn initialize(
    u: &DenseMatrix,
    n: usize,
    p: usize,
    k: usize,
    alpha: f64,
    seed: u64,
) -> Result<InitializationReport> {
    let theoretical_bound = init_angle_bound(n, p, k, alpha)?;
    check_orthogonal(u)?;
    if u.rows() != n {
        return Err(Error::Dimension(format!(
            "basis has {} rows, expected n={n}",
            u.rows()
        )));
    }
    let x = gaussian_matrix(n, p, seed);
    let z = construct_z(u, &x, k)?;
    let xz = x.matmul(&z);
    let nullspace_residual = u.columns(k..p).t_matmul(&xz).max_abs();
    let tan_theta_xz = tan_angle_kdim(&u.columns(0..k), &xz)?;
    Ok(InitializationReport {
        z,
        tan_theta_xz,
        theoretical_bound,
        alpha,
        failure_probability: failure_probability(alpha),
        nullspace_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm, spectral_norm};
    use crate::rng::random_orthogonal;

    #[test]
    fn bound_worked_value() {
        let b = init_angle_bound(100, 25, 5, 2.0).unwrap();
        let direct = (75f64.sqrt() + 5.0 + 2.0) / (5.0 - 5f64.sqrt() - 2.0);
        assert!((b - direct).abs() < 1e-12);
        assert!((b - 20.500).abs() < 1e-3);
    }

    #[test]
    fn degenerate_alpha_rejected() {
        let alpha = 5.0 - 5f64.sqrt();
        assert!(matches!(
            init_angle_bound(100, 25, 5, alpha),
            Err(Error::InvalidAlpha { .. })
        ));
        let u = DenseMatrix::identity(100);
        assert!(matches!(
            initialize(&u, 100, 25, 5, alpha, 0),
            Err(Error::InvalidAlpha { .. })
        ));
    }

    #[test]
    fn k_must_be_below_p() {
        let u = DenseMatrix::identity(6);
        let x = gaussian_matrix(6, 3, 0);
        assert!(matches!(construct_z(&u, &x, 3), Err(Error::Dimension(_))));
    }

    #[test]
    fn single_row_nullspace() {
        // p = k + 1: C₂ is one row, Z must lie in its (p−1)-dim nullspace.
        let u = DenseMatrix::identity(5);
        let x = gaussian_matrix(5, 3, 8);
        let z = construct_z(&u, &x, 2).unwrap();
        assert_eq!(z.shape(), (3, 2));
        assert!(orthonormality_defect(&z) < 1e-13);
        let c2 = x.row_block(2..3);
        assert!(c2.matmul(&z).max_abs() < 1e-13);
    }

    #[test]
    fn already_null_block() {
        let mut x = gaussian_matrix(6, 4, 3);
        for j in 0..4 {
            x[(2, j)] = 0.0;
            x[(3, j)] = 0.0;
        }
        let z = construct_z(&DenseMatrix::identity(6), &x, 2).unwrap();
        assert!(orthonormality_defect(&z) < 1e-13);
        assert!(x.row_block(2..4).matmul(&z).max_abs() < 1e-15);
    }

    #[test]
    fn random_basis_residual() {
        let u = random_orthogonal(20, 1);
        let x = gaussian_matrix(20, 8, 2);
        let z = construct_z(&u, &x, 3).unwrap();
        let c2z = u.columns(3..8).t_matmul(&x).matmul(&z);
        assert!(c2z.max_abs() <= 1e-9 * frobenius_norm(&x));
        // Rows k+1..p of U_{-k}ᵀ X Z vanish, so norms through U_{-k} and U_{-p} agree.
        let xz = x.matmul(&z);
        for s in 0..100 {
            let w = z.matmul(&z.t_matmul(&gaussian_matrix(8, 1, 100 + s)));
            let lhs = spectral_norm(&u.columns(3..20).t_matmul(&x.matmul(&w)));
            let rhs = spectral_norm(&u.columns(8..20).t_matmul(&x.matmul(&w)));
            assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(1e-300));
        }
        assert_eq!(xz.cols(), 3);
    }

    #[test]
    fn zero_angle_and_orthogonal_subspace() {
        let u = random_orthogonal(6, 4);
        let uk = u.columns(0..2);
        assert!(tan_angle_kdim(&uk, &uk).unwrap() < 1e-14);
        assert_eq!(tan_angle_kdim(&uk, &u.columns(2..4)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn planar_rotation_angle() {
        let theta = std::f64::consts::PI / 6.0;
        let u1 = DenseMatrix::from_rows(&[&[1.0], &[0.0]]).unwrap();
        let w = DenseMatrix::from_rows(&[&[theta.cos()], &[theta.sin()]]).unwrap();
        let t = tan_angle_kdim(&u1, &w).unwrap();
        assert!((t - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn angle_depends_only_on_range() {
        let u = random_orthogonal(9, 11);
        let uk = u.columns(0..3);
        let w = gaussian_matrix(9, 3, 12);
        let base = tan_angle_kdim(&uk, &w).unwrap();
        let scaled = tan_angle_kdim(&uk, &w.scale_columns(&[3.0, -0.01, 70.0])).unwrap();
        let mixed = tan_angle_kdim(&uk, &w.matmul(&gaussian_matrix(3, 3, 13))).unwrap();
        assert!((base - scaled).abs() <= 1e-10 * base);
        assert!((base - mixed).abs() <= 1e-9 * base);
        let g = gaussian_matrix(3, 3, 14);
        assert!(tan_angle_kdim(&uk, &uk.matmul(&g)).unwrap() < 1e-12);
    }

    #[test]
    fn shape_mismatch() {
        let a = DenseMatrix::identity(3).columns(0..1);
        let b = DenseMatrix::identity(3).columns(0..2);
        assert!(matches!(tan_angle_kdim(&a, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn initialize_reports_consistent_fields() {
        let u = random_orthogonal(100, 77);
        let rep = initialize(&u, 100, 25, 5, 2.0, 3).unwrap();
        assert!(orthonormality_defect(&rep.z) < 1e-10);
        assert!((rep.failure_probability - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
        assert!(rep.nullspace_residual < 1e-9);
        assert!(rep.tan_theta_xz.is_finite());
    }
}
