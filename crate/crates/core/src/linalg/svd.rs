//! One-sided (Hestenes) Jacobi SVD.
//!
//! This is the deterministic reference every randomized result is compared
//! against. It orthogonalizes the columns of the working matrix with plane
//! rotations until every pair `(i, j)` satisfies
//! `|a_iᵀ a_j| <= tol * ‖a_i‖ ‖a_j‖` with `tol = sqrt(rows) * eps`. That
//! pairwise test is stricter than an absolute residual against `‖A‖_F²`, and
//! it keeps small singular values accurate to high relative precision.

use super::matrix::{dot, DenseMatrix};
use crate::error::{Error, Result};

/// Sweep cap before reporting [`Error::NoConvergence`].
pub const MAX_SWEEPS: usize = 60;

/// `A = U diag(sigma) Vᵀ` with `r = min(rows, cols)` triples.
///
/// Singular values are descending. Each column of `u` has its
/// largest-magnitude entry positive.
#[derive(Debug, Clone)]
pub struct SvdFactorization {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdFactorization {
    /// Number of stored triples.
    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// `sigma_{i+1}` in 1-based terms, or 0 past the stored triples.
    pub fn sigma_or_zero(&self, i: usize) -> f64 {
        self.sigma.get(i).copied().unwrap_or(0.0)
    }

    /// Count of singular values above `rel_tol * sigma_1`.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        let top = self.sigma_or_zero(0);
        self.sigma.iter().filter(|&&s| s > rel_tol * top).count()
    }

    /// `‖A − A_k‖_F² = Σ_{i>k} σ_i²`.
    pub fn tail_energy(&self, k: usize) -> f64 {
        self.sigma.iter().skip(k).map(|s| s * s).sum()
    }

    /// Best rank-`k` approximation `U_k Σ_k V_kᵀ`.
    ///
    /// # Panics
    /// When `k` exceeds the number of stored triples.
    pub fn truncate(&self, k: usize) -> DenseMatrix {
        assert!(
            k <= self.sigma.len(),
            "truncation rank {k} exceeds {} stored singular triples",
            self.sigma.len()
        );
        let uk = self.u.columns(0..k).scale_columns(&self.sigma[..k]);
        let vk = self.v.columns(0..k);
        uk.matmul(&vk.transpose())
    }

    /// `U diag(sigma) Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.truncate(self.sigma.len())
    }
}

/// Materializes `M_k` from a factorization.
pub fn truncate(svd: &SvdFactorization, k: usize) -> DenseMatrix {
    svd.truncate(k)
}

/// Full-accuracy SVD of a nonempty matrix.
pub fn svd_reference(a: &DenseMatrix) -> Result<SvdFactorization> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::Dimension("svd of an empty matrix".into()));
    }
    if m < n {
        let t = svd_tall(&a.transpose())?;
        let mut out = SvdFactorization {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
        fix_signs(&mut out);
        return Ok(out);
    }
    let mut out = svd_tall(a)?;
    fix_signs(&mut out);
    Ok(out)
}

/// Moore–Penrose pseudo-inverse, treating singular values at or below
/// `rel_tol * sigma_1` as zero.
pub fn pseudo_inverse(a: &DenseMatrix, rel_tol: f64) -> Result<DenseMatrix> {
    let svd = svd_reference(a)?;
    let cutoff = rel_tol * svd.sigma_or_zero(0);
    let inv: Vec<f64> = svd
        .sigma
        .iter()
        .map(|&s| if s > cutoff && s > 0.0 { 1.0 / s } else { 0.0 })
        .collect();
    Ok(svd.v.scale_columns(&inv).matmul(&svd.u.transpose()))
}

/// Singular values only (descending), `min(rows, cols)` of them.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    let mut w = if a.rows() < a.cols() {
        a.transpose()
    } else {
        a.clone()
    };
    jacobi(&mut w, None)?;
    Ok(sorted_column_norms(&w).0)
}

/// As [`singular_values`] but returns the best available estimate when the
/// sweep cap is hit.
pub(crate) fn singular_values_lenient(a: &DenseMatrix) -> Vec<f64> {
    let mut w = if a.rows() < a.cols() {
        a.transpose()
    } else {
        a.clone()
    };
    let _ = jacobi(&mut w, None);
    sorted_column_norms(&w).0
}

/// Full `cols x cols` orthogonal basis of right singular vectors, paired
/// with the column norms of `A V` in descending order.
///
/// Unlike [`svd_reference`] this works directly on the columns even for a
/// wide `A`, so the trailing `cols - rows` columns of `V` span `null(A)`.
pub fn right_singular_basis(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = a.cols();
    let mut w = a.clone();
    let mut v = DenseMatrix::identity(n);
    jacobi(&mut w, Some(&mut v))?;
    let (norms, order) = sorted_column_norms(&w);
    Ok((norms, v.select_columns(&order)))
}

fn svd_tall(a: &DenseMatrix) -> Result<SvdFactorization> {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = DenseMatrix::identity(n);
    jacobi(&mut w, Some(&mut v))?;
    let (sigma, order) = sorted_column_norms(&w);
    let floor = negligible_sq(&w).sqrt();

    let mut ucols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let s = sigma[slot];
        if s > floor && s.is_normal() {
            ucols.push(w.col(j).iter().map(|x| x / s).collect());
        } else {
            ucols.push(vec![0.0; m]);
            missing.push(slot);
        }
    }
    if !missing.is_empty() {
        complete_orthonormal(&mut ucols, &missing, m);
    }
    Ok(SvdFactorization {
        u: DenseMatrix::from_columns(m, &ucols),
        sigma,
        v: v.select_columns(&order),
    })
}

/// Fills the `missing` slots with unit vectors orthogonal to every other column.
fn complete_orthonormal(cols: &mut [Vec<f64>], missing: &[usize], m: usize) {
    let mut candidate = 0usize;
    for &slot in missing {
        loop {
            assert!(candidate < m, "cannot complete orthonormal basis");
            let mut e = vec![0.0; m];
            e[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for (idx, c) in cols.iter().enumerate() {
                    if idx == slot || (missing.contains(&idx) && c.iter().all(|&x| x == 0.0)) {
                        continue;
                    }
                    let s = dot(c, &e);
                    e.iter_mut().zip(c).for_each(|(ei, ci)| *ei -= s * ci);
                }
            }
            let nrm = dot(&e, &e).sqrt();
            if nrm > 0.5 {
                cols[slot] = e.into_iter().map(|x| x / nrm).collect();
                break;
            }
        }
    }
}

fn sorted_column_norms(w: &DenseMatrix) -> (Vec<f64>, Vec<usize>) {
    let norms: Vec<f64> = (0..w.cols()).map(|j| dot(w.col(j), w.col(j)).sqrt()).collect();
    let mut order: Vec<usize> = (0..w.cols()).collect();
    // Stable: equal values keep their original index order.
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    (order.iter().map(|&j| norms[j]).collect(), order)
}

fn fix_signs(svd: &mut SvdFactorization) {
    for j in 0..svd.u.cols() {
        let col = svd.u.col(j);
        let mut best = 0usize;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            svd.u.col_mut(j).iter_mut().for_each(|x| *x = -*x);
            svd.v.col_mut(j).iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Rotates the columns of `w` (and `v` alongside) until they are mutually
/// orthogonal.
fn jacobi(w: &mut DenseMatrix, mut v: Option<&mut DenseMatrix>) -> Result<()> {
    let (m, n) = w.shape();
    if n < 2 {
        return Ok(());
    }
    let tol = f64::EPSILON * (m.max(1) as f64).sqrt();
    let floor = negligible_sq(w);
    let mut norms: Vec<f64> = vec![0.0; n];
    for _ in 0..MAX_SWEEPS {
        for (j, nj) in norms.iter_mut().enumerate() {
            *nj = dot(w.col(j), w.col(j));
        }
        let mut rotated = false;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let a = norms[i];
                let b = norms[j];
                if a <= floor || b <= floor {
                    continue;
                }
                let g = dot(w.col(i), w.col(j));
                if g.abs() <= tol * (a * b).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (b - a) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(w, i, j, c, s);
                if let Some(v) = v.as_deref_mut() {
                    rotate(v, i, j, c, s);
                }
                norms[i] = (a - t * g).max(0.0);
                norms[j] = (b + t * g).max(0.0);
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::NoConvergence { sweeps: MAX_SWEEPS })
}

/// Squared column norm below which a column is roundoff: `(ε‖A‖_F)²`.
fn negligible_sq(w: &DenseMatrix) -> f64 {
    let total: f64 = w.as_slice().iter().map(|x| x * x).sum();
    f64::EPSILON * f64::EPSILON * total
}

#[inline]
fn rotate(w: &mut DenseMatrix, i: usize, j: usize, c: f64, s: f64) {
    let (ci, cj) = w.col_pair_mut(i, j);
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let xi = *x;
        let xj = *y;
        *x = c * xi - s * xj;
        *y = s * xi + c * xj;
    }
}
