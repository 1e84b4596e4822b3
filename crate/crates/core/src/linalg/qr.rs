//! Householder thin QR.

use super::matrix::{axpy, dot, DenseMatrix};
use super::norms::frobenius_norm;
use crate::error::{Error, Result};

/// Relative threshold on `|R[j,j]|` below which a column counts as dependent.
pub const RANK_TOL: f64 = 1e-12;

/// Thin QR factorization `A = Q R` of a tall matrix.
///
/// `Q` is `rows x cols` with orthonormal columns and `R` is `cols x cols`
/// upper triangular with a nonnegative diagonal. Fails with
/// [`Error::RankDeficient`] when some `|R[j,j]| <= 1e-12 * ‖A‖_F`.
pub fn qr_thin(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    householder(a)
}

/// Orthonormal basis of `range(A)` for a full-column-rank `A`.
pub fn orthonormalize(a: &DenseMatrix) -> Result<DenseMatrix> {
    qr_thin(a).map(|(q, _)| q)
}

fn householder(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::Dimension(format!(
            "qr_thin needs rows >= cols, got {m}x{n}"
        )));
    }
    let scale = frobenius_norm(a);
    let mut w = a.clone();
    // Reflector j acts on rows j..m; stored without the leading zeros.
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut diag = vec![0.0; n];

    for j in 0..n {
        let x = &w.col(j)[j..];
        let alpha = dot(x, x).sqrt();
        if alpha <= RANK_TOL * scale || alpha == 0.0 {
            return Err(Error::RankDeficient { column: j });
        }
        let x0 = x[0];
        let r_jj = if x0 >= 0.0 { -alpha } else { alpha };
        let mut v = x.to_vec();
        v[0] -= r_jj;
        let vnorm2 = dot(&v, &v);
        diag[j] = r_jj;
        {
            let col = w.col_mut(j);
            col[j] = r_jj;
            col[j + 1..].iter_mut().for_each(|e| *e = 0.0);
        }
        if vnorm2 > 0.0 {
            let beta = 2.0 / vnorm2;
            for c in j + 1..n {
                let tail = &mut w.col_mut(c)[j..];
                let s = beta * dot(&v, tail);
                axpy(-s, &v, tail);
            }
            reflectors.push(v.into_iter().map(|e| e * beta.sqrt()).collect());
        } else {
            reflectors.push(Vec::new());
        }
    }

    // Accumulate Q = H_0 H_1 ... H_{n-1} [I_n; 0].
    let mut q = DenseMatrix::from_fn(m, n, |i, j| if i == j { 1.0 } else { 0.0 });
    for j in (0..n).rev() {
        let v = &reflectors[j];
        if v.is_empty() {
            continue;
        }
        for c in j..n {
            let tail = &mut q.col_mut(c)[j..];
            let s = dot(v, tail);
            axpy(-s, v, tail);
        }
    }

    let mut r = DenseMatrix::from_fn(n, n, |i, c| if i <= c { w[(i, c)] } else { 0.0 });
    // Nonnegative diagonal convention.
    for (j, &d) in diag.iter().enumerate() {
        if d < 0.0 {
            q.col_mut(j).iter_mut().for_each(|e| *e = -*e);
            for c in j..n {
                r[(j, c)] = -r[(j, c)];
            }
        }
    }
    Ok((q, r))
}
