//! A numerical laboratory for random unitary and orthogonal perturbations of
//! fixed matrices: from-scratch dense complex linear algebra, Haar ensemble
//! samplers, Monte Carlo tail estimation for smallest singular values, a
//! battery of matrix-analysis inequality verifiers, and single-ring spectral
//! simulations.

pub mod eig;
pub mod ensembles;
pub mod error;
pub mod lemmas;
pub mod lu;
pub mod matrix;
pub mod qr;
pub mod ring;
pub mod rng;
pub mod stats;
pub mod svd;
pub mod tail;

pub use eig::{eigenvalues, Spectrum};
pub use ensembles::{DiagonalMatrix, Ensemble};
pub use error::{Error, Result};
pub use lu::{determinant, solve_linear};
pub use matrix::{DenseMatrix, Scalar};
pub use qr::qr_decompose;
pub use rng::RngStream;
pub use svd::{operator_norm, smallest_singular_value, svd, SvdResult};
