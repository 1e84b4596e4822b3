//! Orthogonal projection onto a column space and the Frobenius-optimal
//! rank-k projection `Q (QᵀM)_k`.

use super::matrix::{dot, norm2, DenseMatrix};
use super::norms::{frobenius_norm, orthonormality_defect};
use super::svd::svd_reference;
use crate::error::{Error, Result};

/// Tolerance for treating a supplied basis as orthonormal.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

/// Orthonormal basis of `range(C)`, dropping columns whose residual after
/// orthogonalization is at most `rel_tol * ‖C‖_F`.
///
/// Uses classical Gram–Schmidt with one reorthogonalization pass. Returns a
/// `rows x r` matrix, possibly with `r = 0`.
pub fn range_basis(c: &DenseMatrix, rel_tol: f64) -> DenseMatrix {
    let m = c.rows();
    let threshold = rel_tol * frobenius_norm(c);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for j in 0..c.cols() {
        let mut w = c.col(j).to_vec();
        for _ in 0..2 {
            for q in &basis {
                let s = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= s * qi);
            }
        }
        let nrm = norm2(&w);
        if nrm > threshold && nrm > 0.0 {
            basis.push(w.into_iter().map(|x| x / nrm).collect());
        }
    }
    DenseMatrix::from_columns(m, &basis)
}

/// `C C† M`, the orthogonal projection of `M` onto `range(C)`.
///
/// Dependent columns of `C` are pruned before projecting, so rank-deficient
/// and wide `C` are accepted. A zero `C` projects everything to zero.
pub fn project_onto_range(c: &DenseMatrix, m: &DenseMatrix) -> Result<DenseMatrix> {
    if c.rows() != m.rows() {
        return Err(Error::Dimension(format!(
            "projector has {} rows, target has {}",
            c.rows(),
            m.rows()
        )));
    }
    let q = range_basis(c, super::qr::RANK_TOL);
    Ok(project_with_basis(&q, m))
}

/// `Q Qᵀ M` for an orthonormal `Q`.
pub fn project_with_basis(q: &DenseMatrix, m: &DenseMatrix) -> DenseMatrix {
    if q.cols() == 0 {
        return DenseMatrix::zeros(m.rows(), m.cols());
    }
    q.matmul(&q.t_matmul(m))
}

/// Frobenius-optimal rank-`k` approximation of `M` inside `range(Q)`:
/// `Q · truncate(svd(QᵀM), k)`.
pub fn rank_k_project_f(q: &DenseMatrix, m: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    if q.rows() != m.rows() {
        return Err(Error::Dimension(format!(
            "basis has {} rows, target has {}",
            q.rows(),
            m.rows()
        )));
    }
    if k > q.cols() {
        return Err(Error::Dimension(format!(
            "rank {k} exceeds basis width {}",
            q.cols()
        )));
    }
    let deviation = orthonormality_defect(q);
    if deviation > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal { deviation });
    }
    if k == 0 || m.cols() == 0 {
        return Ok(DenseMatrix::zeros(m.rows(), m.cols()));
    }
    let b = q.t_matmul(m);
    let bk = svd_reference(&b)?.truncate(k);
    Ok(q.matmul(&bk))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norms::{frobenius_norm, spectral_norm};
    use crate::linalg::qr::orthonormalize;
    use crate::rng::gaussian_matrix;

    #[test]
    fn identity_projector_is_noop() {
        let m = gaussian_matrix(5, 3, 1);
        let p = project_onto_range(&DenseMatrix::identity(5), &m).unwrap();
        assert!(p.sub(&m).max_abs() < 1e-14);
    }

    #[test]
    fn orthogonal_range_projects_to_zero() {
        let c = DenseMatrix::from_fn(4, 2, |i, j| if i == j { 1.0 } else { 0.0 });
        let m = DenseMatrix::from_fn(4, 3, |i, j| if i >= 2 { (i + j) as f64 } else { 0.0 });
        assert!(project_onto_range(&c, &m).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn projection_is_idempotent_and_prunes_duplicates() {
        let base = gaussian_matrix(6, 2, 3);
        let c = base.hstack(&base.columns(0..1).scale(2.0));
        let m = gaussian_matrix(6, 4, 4);
        let once = project_onto_range(&c, &m).unwrap();
        let twice = project_onto_range(&c, &once).unwrap();
        assert!(twice.sub(&once).max_abs() < 1e-10);
        assert_eq!(range_basis(&c, 1e-12).cols(), 2);
    }

    #[test]
    fn projector_beats_sampled_competitors() {
        let c = gaussian_matrix(6, 3, 10);
        let m = gaussian_matrix(6, 4, 11);
        let best = frobenius_norm(&m.sub(&project_onto_range(&c, &m).unwrap()));
        for s in 0..1000 {
            let y = gaussian_matrix(3, 4, 1000 + s);
            let other = frobenius_norm(&m.sub(&c.matmul(&y)));
            assert!(best <= other + 1e-12);
        }
    }

    #[test]
    fn rank_k_projection_identity_and_optimal_subspace() {
        let m = gaussian_matrix(6, 4, 21);
        let full = rank_k_project_f(&DenseMatrix::identity(6), &m, 4).unwrap();
        assert!(full.sub(&m).max_abs() < 1e-12);

        let svd = svd_reference(&m).unwrap();
        let uk = svd.u.columns(0..2);
        let p = rank_k_project_f(&uk, &m, 2).unwrap();
        assert!(p.sub(&svd.truncate(2)).max_abs() < 1e-12);
    }

    #[test]
    fn rank_k_projection_beats_sampled_rank_k_competitors() {
        let q = orthonormalize(&gaussian_matrix(10, 5, 30)).unwrap();
        let m = gaussian_matrix(10, 8, 31);
        let best = frobenius_norm(&m.sub(&rank_k_project_f(&q, &m, 2).unwrap()));
        for s in 0..1000 {
            let b = gaussian_matrix(5, 2, 2000 + s).matmul(&gaussian_matrix(2, 8, 5000 + s));
            let other = frobenius_norm(&m.sub(&q.matmul(&b)));
            assert!(best <= other + 1e-12);
        }
        // Spectral error of the projection can never beat the best rank-2 error.
        let sv = svd_reference(&m).unwrap();
        let err2 = spectral_norm(&m.sub(&rank_k_project_f(&q, &m, 2).unwrap()));
        assert!(err2 + 1e-12 >= sv.sigma[2]);
    }

    #[test]
    fn rejects_non_orthonormal_basis() {
        let q = DenseMatrix::from_fn(4, 2, |i, j| (i + j) as f64);
        let m = DenseMatrix::identity(4);
        assert!(matches!(
            rank_k_project_f(&q, &m, 1),
            Err(Error::NotOrthonormal { .. })
        ));
    }
}
