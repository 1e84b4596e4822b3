//! Block power iteration, block Krylov (Lanczos) subspaces, and rank-k
//! extraction from a sketch basis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    dot, frobenius_norm, frobenius_norm_sq, norm2, qr_thin, rank_k_project_f, spectral_norm,
    DenseMatrix,
};
use crate::rng::gaussian_matrix;

/// Residual columns at or below this fraction of the incoming block's
/// Frobenius norm are dropped from a Krylov basis.
pub const KRYLOV_DROP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Power,
    Lanczos,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Power => "power",
            Method::Lanczos => "lanczos",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(Method::Power),
            "lanczos" | "krylov" => Ok(Method::Lanczos),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

fn check_start(m: &DenseMatrix, x: &DenseMatrix) -> Result<()> {
    if m.cols() != x.rows() {
        return Err(Error::Dimension(format!(
            "operator is {}x{}, start block has {} rows",
            m.rows(),
            m.cols(),
            x.rows()
        )));
    }
    Ok(())
}

/// Orthonormal `Q` spanning `(M Mᵀ)^t M X`, re-orthonormalized after every
/// application of `M` or `Mᵀ`.
pub fn power_iterate(m: &DenseMatrix, x: &DenseMatrix, t: usize) -> Result<DenseMatrix> {
    check_start(m, x)?;
    let (mut q, _) = qr_thin(&m.matmul(x))?;
    for _ in 0..t {
        let (z, _) = qr_thin(&m.t_matmul(&q))?;
        let (next, _) = qr_thin(&m.matmul(&z))?;
        q = next;
    }
    Ok(q)
}

/// Orthonormal basis of `[S, (MMᵀ)S, …, (MMᵀ)^d S]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovBasis {
    /// Orthonormalized increment contributed by each power, `d + 1` entries.
    /// An entry may have fewer than `p` columns (or none) after deflation.
    pub blocks: Vec<DenseMatrix>,
    pub q: DenseMatrix,
    pub degree: usize,
    pub block_size: usize,
    /// `(d + 1)·p − rank`, the number of columns removed as dependent.
    pub dropped: usize,
}

impl KrylovBasis {
    pub fn rank(&self) -> usize {
        self.q.cols()
    }
}

/// Krylov basis started from `M X`: `[MX, (MMᵀ)MX, …, (MMᵀ)^d MX]`.
pub fn build_krylov(m: &DenseMatrix, x: &DenseMatrix, d: usize) -> Result<KrylovBasis> {
    check_start(m, x)?;
    build_krylov_from_start(m, &m.matmul(x), d)
}

/// Krylov basis `[S, (MMᵀ)S, …, (MMᵀ)^d S]` for an explicit `m x p` start.
pub fn build_krylov_from_start(m: &DenseMatrix, start: &DenseMatrix, d: usize) -> Result<KrylovBasis> {
    if start.rows() != m.rows() {
        return Err(Error::Dimension(format!(
            "operator has {} rows, start block has {}",
            m.rows(),
            start.rows()
        )));
    }
    let rows = m.rows();
    let p = start.cols();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut blocks = Vec::with_capacity(d + 1);
    let mut current = start.clone();
    for j in 0..=d {
        let threshold = KRYLOV_DROP_TOL * frobenius_norm(&current);
        let first_new = basis.len();
        for c in 0..current.cols() {
            let mut w = current.col(c).to_vec();
            for _ in 0..2 {
                for q in &basis {
                    let s = dot(q, &w);
                    w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= s * qi);
                }
            }
            let nrm = norm2(&w);
            if nrm > threshold && nrm > 0.0 {
                basis.push(w.into_iter().map(|v| v / nrm).collect());
            }
        }
        let block = DenseMatrix::from_columns(rows, &basis[first_new..]);
        if j == 0 && block.cols() == 0 {
            return Err(Error::EmptyBasis);
        }
        let exhausted = block.cols() == 0;
        if !exhausted && j < d {
            current = m.matmul(&m.t_matmul(&block));
        }
        blocks.push(block);
        if exhausted {
            while blocks.len() < d + 1 {
                blocks.push(DenseMatrix::zeros(rows, 0));
            }
            break;
        }
    }
    let q = DenseMatrix::from_columns(rows, &basis);
    let dropped = (d + 1) * p - q.cols();
    Ok(KrylovBasis { blocks, q, degree: d, block_size: p, dropped })
}

/// Rank-`k` approximation extracted from a sketch basis, with its errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchResult {
    pub q_sketch: DenseMatrix,
    pub approx_k: DenseMatrix,
    /// `‖M − approx_k‖₂²`.
    pub spectral_err_sq: f64,
    /// `‖M − approx_k‖_F²`.
    pub frobenius_err_sq: f64,
    pub iterations_used: usize,
}

/// `Q (QᵀM)_k` and its spectral and Frobenius errors.
pub fn extract_rank_k(m: &DenseMatrix, q: &DenseMatrix, k: usize) -> Result<SketchResult> {
    let approx_k = rank_k_project_f(q, m, k)?;
    let residual = m.sub(&approx_k);
    let spectral = spectral_norm(&residual);
    Ok(SketchResult {
        q_sketch: q.clone(),
        spectral_err_sq: spectral * spectral,
        frobenius_err_sq: frobenius_norm_sq(&residual),
        approx_k,
        iterations_used: 0,
    })
}

/// Sketch basis for `method` with `iterations` steps (power count `t` or
/// Krylov degree `d`) from the start block `X`.
pub fn sketch_basis(
    m: &DenseMatrix,
    x: &DenseMatrix,
    method: Method,
    iterations: usize,
) -> Result<DenseMatrix> {
    match method {
        Method::Power => power_iterate(m, x, iterations),
        Method::Lanczos => Ok(build_krylov(m, x, iterations)?.q),
    }
}

/// Randomized rank-`k` SVD approximation with a Gaussian `n x p` start.
pub fn randomized_svd(
    m: &DenseMatrix,
    k: usize,
    p: usize,
    method: Method,
    iterations: usize,
    seed: u64,
) -> Result<SketchResult> {
    let (rows, cols) = m.shape();
    if k == 0 || k > p || p > rows.min(cols) {
        return Err(Error::Dimension(format!(
            "need 1 <= k <= p <= min(m, n), got k={k}, p={p}, shape {rows}x{cols}"
        )));
    }
    let x = gaussian_matrix(cols, p, seed);
    let q = sketch_basis(m, &x, method, iterations)?;
    let mut out = extract_rank_k(m, &q, k)?;
    out.iterations_used = iterations;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{orthonormality_defect, svd_reference};

    #[test]
    fn power_zero_iterations_spans_mx() {
        let m = gaussian_matrix(10, 7, 1);
        let x = gaussian_matrix(7, 3, 2);
        let q = power_iterate(&m, &x, 0).unwrap();
        let mx = m.matmul(&x);
        let back = q.matmul(&q.t_matmul(&mx));
        assert!(back.sub(&mx).max_abs() < 1e-12 * mx.max_abs());
    }

    #[test]
    fn power_on_diagonal_recovers_top_coordinates() {
        let diag: Vec<f64> = (0..8).map(|i| 0.5f64.powi(i)).collect();
        let m = DenseMatrix::from_diag(8, 8, &diag);
        let x = gaussian_matrix(8, 2, 3);
        let q = power_iterate(&m, &x, 40).unwrap();
        let top = q.row_block(0..2);
        let s = svd_reference(&top).unwrap();
        assert!(s.sigma.iter().all(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn krylov_degree_zero_matches_start() {
        let m = gaussian_matrix(9, 6, 5);
        let x = gaussian_matrix(6, 2, 6);
        let kb = build_krylov(&m, &x, 0).unwrap();
        assert_eq!(kb.blocks.len(), 1);
        assert_eq!(kb.rank(), 2);
        assert_eq!(kb.dropped, 0);
    }

    #[test]
    fn krylov_rank_and_dropping() {
        let m = gaussian_matrix(15, 10, 7);
        let x = gaussian_matrix(10, 3, 8);
        let kb = build_krylov(&m, &x, 3).unwrap();
        assert_eq!(kb.rank(), 10);
        assert_eq!(kb.dropped, 12 - 10);
        assert!(orthonormality_defect(&kb.q) < 1e-10);
        assert_eq!(kb.blocks.len(), 4);
        let total: usize = kb.blocks.iter().map(|b| b.cols()).sum();
        assert_eq!(total, kb.rank());
    }

    #[test]
    fn krylov_zero_start_is_empty() {
        let m = gaussian_matrix(5, 4, 9);
        let x = DenseMatrix::zeros(4, 2);
        assert!(matches!(build_krylov(&m, &x, 2), Err(Error::EmptyBasis)));
    }

    #[test]
    fn krylov_contains_power_iterate() {
        let m = gaussian_matrix(20, 12, 10);
        let x = gaussian_matrix(12, 2, 11);
        let q = build_krylov(&m, &x, 3).unwrap().q;
        let pq = power_iterate(&m, &x, 3).unwrap();
        let back = q.matmul(&q.t_matmul(&pq));
        assert!(back.sub(&pq).max_abs() < 1e-8);
    }

    #[test]
    fn extract_with_exact_basis_is_optimal() {
        let m = gaussian_matrix(8, 6, 12);
        let svd = svd_reference(&m).unwrap();
        let r = extract_rank_k(&m, &svd.u.columns(0..3), 2).unwrap();
        let tail: f64 = svd.sigma[2..].iter().map(|s| s * s).sum();
        assert!((r.spectral_err_sq - svd.sigma[2].powi(2)).abs() < 1e-10);
        assert!((r.frobenius_err_sq - tail).abs() < 1e-10);
    }

    #[test]
    fn randomized_svd_validates_sizes() {
        let m = gaussian_matrix(6, 5, 0);
        assert!(randomized_svd(&m, 3, 2, Method::Power, 1, 0).is_err());
        assert!(randomized_svd(&m, 2, 6, Method::Power, 1, 0).is_err());
        let r = randomized_svd(&m, 2, 3, Method::Lanczos, 1, 0).unwrap();
        assert_eq!(r.iterations_used, 1);
    }

    #[test]
    fn method_parsing() {
        assert_eq!("power".parse::<Method>().unwrap(), Method::Power);
        assert_eq!("lanczos".parse::<Method>().unwrap(), Method::Lanczos);
        assert!("qr".parse::<Method>().is_err());
    }
}
