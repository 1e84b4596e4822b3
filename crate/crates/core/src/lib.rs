//! Randomized truncated SVD by block power iteration and block Krylov
//! (Lanczos) methods, with iteration-budget calculators and a Monte-Carlo
//! harness for checking the accompanying error bounds.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cheb;
pub mod error;
pub mod harness;
pub mod init;
pub mod linalg;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use linalg::DenseMatrix;
