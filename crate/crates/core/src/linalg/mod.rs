//! Dense linear-algebra kernels: QR, the reference SVD, projections and norms.

mod matrix;
mod norms;
mod project;
mod qr;
mod svd;

pub use matrix::DenseMatrix;
pub(crate) use matrix::{dot, norm2};
pub use norms::{frobenius_norm, frobenius_norm_sq, orthonormality_defect, spectral_norm};
pub use project::{
    project_onto_range, project_with_basis, range_basis, rank_k_project_f, ORTHONORMAL_TOL,
};
pub use qr::{orthonormalize, qr_thin, RANK_TOL};
pub use svd::{
    pseudo_inverse, right_singular_basis, singular_values, svd_reference, truncate,
    SvdFactorization, MAX_SWEEPS,
};
