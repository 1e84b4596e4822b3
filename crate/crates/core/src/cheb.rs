//! Chebyshev polynomials and the gap-amplifying filter built from them.
//!
//! With threshold `α > 0`, gap `γ > 0` and odd or even degree `d ≥ 1`, the
//! filter is
//!
//! ```text
//! p(x) = (1 + γ)·α · T_d(x / α) / T_d(1 + γ)
//! ```
//!
//! It is small on `[0, α]`, equals `(1+γ)α` at `x = (1+γ)α`, and grows
//! faster than `x` beyond that point. `φ` is `p` clipped to zero on
//! `(−∞, 0]`.

use crate::error::{Error, Result};
use crate::linalg::{svd_reference, DenseMatrix};

/// `T_d(y)` by the three-term recurrence `T_{j+1} = 2y T_j − T_{j−1}`.
pub fn chebyshev_t(degree: usize, y: f64) -> f64 {
    match degree {
        0 => 1.0,
        1 => y,
        _ => {
            let (mut prev, mut cur) = (1.0, y);
            for _ in 1..degree {
                let next = 2.0 * y * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Validated filter parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebParams {
    alpha: f64,
    gamma: f64,
    degree: usize,
}

impl ChebParams {
    pub fn new(alpha: f64, gamma: f64, degree: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
        }
        if degree == 0 {
            return Err(Error::InvalidParameter("degree must be at least 1".into()));
        }
        Ok(Self { alpha, gamma, degree })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `(1 + γ)α`, the point where the filter is pinned to the identity.
    pub fn pivot(&self) -> f64 {
        (1.0 + self.gamma) * self.alpha
    }

    fn normalizer(&self) -> f64 {
        chebyshev_t(self.degree, 1.0 + self.gamma)
    }

    /// `p(x)`.
    pub fn poly(&self, x: f64) -> f64 {
        self.pivot() * chebyshev_t(self.degree, x / self.alpha) / self.normalizer()
    }

    /// `φ(x)`: zero for `x ≤ 0`, `p(x)` otherwise.
    pub fn phi(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            self.poly(x)
        }
    }

    /// Monomial counterpart `(1+γ)α · (x/α)^t / (1+γ)^t`, with `t` the degree.
    pub fn monomial(&self, x: f64) -> f64 {
        let t = self.degree as i32;
        self.pivot() * (x / self.alpha).powi(t) / (1.0 + self.gamma).powi(t)
    }
}

/// `p(A) X` for the symmetric operator `A` given as a closure, evaluated by
/// the block three-term recurrence in the scaled variable `A / α`.
///
/// Returns [`Error::Overflow`] if any intermediate block is non-finite.
pub fn apply_filter_with<F>(apply: F, x: &DenseMatrix, params: &ChebParams) -> Result<DenseMatrix>
where
    F: Fn(&DenseMatrix) -> DenseMatrix,
{
    let normalizer = params.normalizer();
    if !normalizer.is_finite() {
        return Err(Error::Overflow);
    }
    let inv_alpha = 1.0 / params.alpha;
    let mut prev = x.clone();
    let mut cur = apply(x).scale(inv_alpha);
    check_finite(&cur)?;
    for _ in 1..params.degree {
        let next = apply(&cur).scale(2.0 * inv_alpha).sub(&prev);
        check_finite(&next)?;
        prev = cur;
        cur = next;
    }
    let out = cur.scale(params.pivot() / normalizer);
    check_finite(&out)?;
    Ok(out)
}

fn check_finite(b: &DenseMatrix) -> Result<()> {
    if b.is_finite() {
        Ok(())
    } else {
        Err(Error::Overflow)
    }
}

/// `p(M Mᵀ) X`. The product `M Mᵀ` is never formed.
pub fn apply_filter_block(m: &DenseMatrix, x: &DenseMatrix, params: &ChebParams) -> Result<DenseMatrix> {
    if m.rows() != x.rows() {
        return Err(Error::Dimension(format!(
            "operator has {} rows, block has {}",
            m.rows(),
            x.rows()
        )));
    }
    apply_filter_with(|b| m.matmul(&m.t_matmul(b)), x, params)
}

/// `Σ_{i<r} f(σ_i²) u_i u_iᵀ`, a scalar function of `M_r M_rᵀ` where `M_r`
/// is the best rank-`r` approximation of `M`.
pub fn gram_function<F>(m: &DenseMatrix, r: usize, f: F) -> Result<DenseMatrix>
where
    F: Fn(f64) -> f64,
{
    let svd = svd_reference(m)?;
    let r = r.min(svd.len());
    let u = svd.u.columns(0..r);
    let weights: Vec<f64> = svd.sigma[..r].iter().map(|s| f(s * s)).collect();
    Ok(u.scale_columns(&weights).matmul(&u.transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::gaussian_matrix;

    fn closed_form(d: usize, y: f64) -> f64 {
        let s = (y * y - 1.0).sqrt();
        0.5 * ((y + s).powi(d as i32) + (y - s).powi(d as i32))
    }

    #[test]
    fn low_degrees() {
        assert_eq!(chebyshev_t(0, 0.3), 1.0);
        assert_eq!(chebyshev_t(1, 0.3), 0.3);
        assert!((chebyshev_t(2, 0.3) - (2.0 * 0.09 - 1.0)).abs() < 1e-15);
        assert!((chebyshev_t(3, 0.3) - (4.0 * 0.027 - 3.0 * 0.3)).abs() < 1e-15);
    }

    #[test]
    fn bounded_on_unit_interval() {
        for d in 0..40 {
            for i in 0..=200 {
                let y = -1.0 + i as f64 / 100.0;
                let t = chebyshev_t(d, y);
                assert!(t.abs() <= 1.0 + 1e-12);
                assert!((t - (d as f64 * y.acos()).cos()).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn closed_form_agreement() {
        for d in 0..30 {
            for &y in &[1.0, 1.01, 1.3, 2.0, 5.0] {
                let a = chebyshev_t(d, y);
                let b = closed_form(d, y);
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "d={d} y={y}");
            }
        }
    }

    #[test]
    fn growth_at_one_plus_gamma() {
        assert_eq!(chebyshev_t(2, 2.0), 7.0);
        assert_eq!(chebyshev_t(3, 2.0), 26.0);
        assert!(chebyshev_t(3, 2.0) >= 8.0);
        // The halved form holds throughout; without the half it fails for small d·√γ.
        for d in 0..=60 {
            for i in 1..=100 {
                let gamma = i as f64 / 100.0;
                let t = chebyshev_t(d, 1.0 + gamma);
                assert!(t > 0.0);
                assert!(t >= 2f64.powf(d as f64 * gamma.sqrt() - 1.0), "d={d} gamma={gamma}");
            }
        }
        assert!(chebyshev_t(1, 1.01) < 2f64.powf(0.1));
    }

    #[test]
    fn parameters_validated() {
        assert!(ChebParams::new(0.0, 0.1, 2).is_err());
        assert!(ChebParams::new(1.0, 0.0, 2).is_err());
        assert!(ChebParams::new(1.0, 0.1, 0).is_err());
        assert!(ChebParams::new(1.0, f64::NAN, 2).is_err());
    }

    #[test]
    fn pinned_at_pivot() {
        let p = ChebParams::new(0.7, 0.3, 9).unwrap();
        assert!((p.poly(p.pivot()) - p.pivot()).abs() < 1e-12);
        assert_eq!(p.phi(-1.0), 0.0);
        assert_eq!(p.phi(0.0), 0.0);
    }

    #[test]
    fn degree_one_is_identity() {
        let p = ChebParams::new(2.0, 0.5, 1).unwrap();
        for &x in &[0.1, 1.0, 3.0, 10.0] {
            assert!((p.phi(x) - x).abs() < 1e-14);
        }
    }

    #[test]
    fn block_recurrence_matches_spectral_evaluation() {
        let m = gaussian_matrix(12, 9, 3);
        let x = gaussian_matrix(12, 2, 4);
        let params = ChebParams::new(4.0, 0.2, 6).unwrap();
        let filtered = apply_filter_block(&m, &x, &params).unwrap();
        let expected = gram_function(&m, 12, |l| params.poly(l))
            .unwrap()
            .matmul(&x)
            // Eigenvalue-zero directions of MMᵀ contribute p(0) u uᵀ.
            .add(&null_part(&m, &x, params.poly(0.0)));
        let scale = expected.max_abs();
        assert!(filtered.sub(&expected).max_abs() <= 1e-9 * scale);
    }

    fn null_part(m: &DenseMatrix, x: &DenseMatrix, p0: f64) -> DenseMatrix {
        let svd = svd_reference(m).unwrap();
        let r = svd.len();
        let u = svd.u.columns(0..r);
        // I − U Uᵀ projects onto the nullspace of M Mᵀ.
        let px = x.sub(&u.matmul(&u.t_matmul(x)));
        px.scale(p0)
    }

    #[test]
    fn overflow_is_reported() {
        let m = DenseMatrix::identity(3).scale(1e100);
        let x = DenseMatrix::identity(3);
        let params = ChebParams::new(1e-3, 0.5, 30).unwrap();
        assert!(matches!(apply_filter_block(&m, &x, &params), Err(Error::Overflow)));
    }
}
