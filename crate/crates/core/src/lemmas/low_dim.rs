//! Low-dimensional tail bound: for a 2x2 or 3x3 complex B that is far from
//! complex orthogonal, ||B B^T - I|| >= delta ||B||^2, the perturbation
//! B + U by a Haar O(n) draw is well invertible with high probability and
//! P(s_min(B + U) <= t) decays polynomially. The rank-one family with
//! B B^T = 0 shows the ||B||^2 factor cannot be dropped.

use crate::ensembles::Ensemble;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::RngStream;
use crate::svd::operator_norm;
use crate::tail::{tail_estimate, TailEstimate};

/// Verify the hypothesis and estimate the tail over Haar O(n). The
/// hypothesis failure error distinguishes the near-complex-orthogonal
/// regime where the bound genuinely fails.
pub fn low_dim_theorem_check(
    b: &DenseMatrix,
    delta: f64,
    t_grid: &[f64],
    trials: u64,
    rng: &RngStream,
) -> Result<TailEstimate> {
    let n = b.rows();
    if !b.is_square() || (n != 2 && n != 3) {
        return Err(Error::DimensionMismatch(format!(
            "expected 2x2 or 3x3, got {}x{}",
            b.rows(),
            b.cols()
        )));
    }
    let norm = operator_norm(b)?;
    let defect = operator_norm(&(&(b * &b.transpose()) - &DenseMatrix::identity(n)))?;
    if defect < delta * norm * norm {
        return Err(Error::InvalidArgument(format!(
            "hypothesis fails: ||B B^T - I|| = {defect:.3e} < delta ||B||^2 = {:.3e} (near complex orthogonal)",
            delta * norm * norm
        )));
    }
    tail_estimate(b, Ensemble::Orthogonal, t_grid, trials, rng)
}
