//! Synthetic test matrices with prescribed singular values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng::{derive_seed, random_orthogonal, random_orthonormal};

/// Law for the singular values `σ_1 ≥ σ_2 ≥ …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpectrumKind {
    /// `σ_i = ratio^(i−1)`.
    Geometric { ratio: f64 },
    /// `σ_i = i^(−exponent)`.
    Polynomial { exponent: f64 },
    /// `σ_i = gap_ratio` for `i ≤ gap_position`, `1` afterwards.
    Step { gap_position: usize, gap_ratio: f64 },
    /// Given values, sorted descending and zero-padded.
    Explicit { values: Vec<f64> },
}

impl Default for SpectrumKind {
    fn default() -> Self {
        SpectrumKind::Geometric { ratio: 0.9 }
    }
}

impl SpectrumKind {
    /// Checks the parameters, reporting the offending field name.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        match self {
            SpectrumKind::Geometric { ratio } if !(*ratio > 0.0 && *ratio <= 1.0) => {
                Err(("ratio", format!("must lie in (0, 1], got {ratio}")))
            }
            SpectrumKind::Polynomial { exponent } if !(*exponent >= 0.0 && exponent.is_finite()) => {
                Err(("exponent", format!("must be finite and non-negative, got {exponent}")))
            }
            SpectrumKind::Step { gap_ratio, .. } if !(*gap_ratio >= 1.0 && gap_ratio.is_finite()) => {
                Err(("gap_ratio", format!("must be at least 1, got {gap_ratio}")))
            }
            SpectrumKind::Explicit { values }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) =>
            {
                Err(("values", "must be finite and non-negative".into()))
            }
            _ => Ok(()),
        }
    }

    /// The first `len` singular values.
    pub fn values(&self, len: usize) -> Result<Vec<f64>> {
        self.validate()
            .map_err(|(field, msg)| Error::InvalidParameter(format!("{field} {msg}")))?;
        Ok(match self {
            SpectrumKind::Geometric { ratio } => (0..len).map(|i| ratio.powi(i as i32)).collect(),
            SpectrumKind::Polynomial { exponent } => {
                (1..=len).map(|i| (i as f64).powf(-exponent)).collect()
            }
            SpectrumKind::Step { gap_position, gap_ratio } => (1..=len)
                .map(|i| if i <= *gap_position { *gap_ratio } else { 1.0 })
                .collect(),
            SpectrumKind::Explicit { values } => {
                if values.len() > len {
                    return Err(Error::InvalidParameter(format!(
                        "{} singular values do not fit a rank-{len} matrix",
                        values.len()
                    )));
                }
                let mut v = values.clone();
                v.sort_by(|a, b| b.total_cmp(a));
                v.resize(len, 0.0);
                v
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub kind: SpectrumKind,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
}

/// `M = U diag(σ) V_rᵀ` together with its factors.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMatrix {
    pub matrix: DenseMatrix,
    /// `m x r` left singular vectors, `r = min(m, n)`.
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    /// Full `n x n` orthogonal right factor; the first `r` columns pair with `sigma`.
    pub v: DenseMatrix,
}

pub fn synth_matrix(spec: &SpectrumSpec) -> Result<SyntheticMatrix> {
    if spec.m == 0 || spec.n == 0 {
        return Err(Error::Dimension(format!("empty shape {}x{}", spec.m, spec.n)));
    }
    let r = spec.m.min(spec.n);
    let sigma = spec.kind.values(r)?;
    let u = random_orthonormal(spec.m, r, derive_seed(spec.seed, 1));
    let v = random_orthogonal(spec.n, derive_seed(spec.seed, 2));
    let matrix = u.scale_columns(&sigma).matmul(&v.columns(0..r).transpose());
    Ok(SyntheticMatrix { matrix, u, sigma, v })
}
