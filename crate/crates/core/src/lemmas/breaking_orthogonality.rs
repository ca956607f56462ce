//! Breaking complex orthogonality by a random change of basis: with
//! D = diag(d_i), |d_1^2 - d_2^2| >= delta and Q Haar on SO(n), the matrix
//! B = T Q D Q^T is with high probability far from complex orthogonal, i.e.
//! P( ||B B^T - I|| <= t ||B||^2 ) decays as t -> 0.

use rayon::prelude::*;

use crate::ensembles::{haar_so2, hurwitz_so3, DiagonalMatrix};
use crate::error::{Error, Result};
use crate::lemmas::LemmaReport;
use crate::matrix::DenseMatrix;
use crate::rng::RngStream;
use crate::svd::operator_norm;

/// Estimate the near-orthogonality probability on an ascending t grid and
/// check monotone decay to at most `p_max_at_smallest` at the first point.
pub fn verify_breaking_orthogonality(
    t_matrix: &DenseMatrix,
    d: &DiagonalMatrix,
    t_grid: &[f64],
    trials: u64,
    p_max_at_smallest: f64,
    rng: &RngStream,
) -> Result<(LemmaReport, Vec<f64>)> {
    let n = d.len();
    if n != 2 && n != 3 {
        return Err(Error::InvalidArgument(format!(
            "dimension must be 2 or 3, got {n}"
        )));
    }
    if t_matrix.rows() != n || t_matrix.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "T is {}x{}, expected {n}x{n}",
            t_matrix.rows(),
            t_matrix.cols()
        )));
    }
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty t grid".into()));
    }
    let delta = (d.diag[0] * d.diag[0] - d.diag[1] * d.diag[1]).norm();
    if delta == 0.0 {
        return Err(Error::InvalidArgument(
            "d_1^2 = d_2^2: the separation hypothesis fails".into(),
        ));
    }

    let d_dense = d.to_dense();
    let id = DenseMatrix::identity(n);
    // Per trial: the relative defect ||B B^T - I|| / ||B||^2.
    let defects: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut stream = rng.substream(trial);
            let q = if n == 2 {
                haar_so2(&mut stream)
            } else {
                hurwitz_so3(&mut stream)
            };
            let b = &(t_matrix * &(&q * &d_dense)) * &q.transpose();
            let bbt = &(&b * &b.transpose()) - &id;
            let defect = operator_norm(&bbt).expect("finite");
            let norm = operator_norm(&b).expect("finite");
            defect / (norm * norm).max(f64::MIN_POSITIVE)
        })
        .collect();

    let p_hat: Vec<f64> = t_grid
        .iter()
        .map(|&t| defects.iter().filter(|&&x| x <= t).count() as f64 / trials as f64)
        .collect();

    let mut report = LemmaReport::new("breaking-orthogonality");
    for (k, w) in p_hat.windows(2).enumerate() {
        report.record(w[1] - w[0], || {
            format!(
                "monotonicity break between t={} and t={}",
                t_grid[k],
                t_grid[k + 1]
            )
        });
    }
    report.record(p_max_at_smallest - p_hat[0], || {
        format!(
            "p_hat({}) = {} exceeds {}",
            t_grid[0], p_hat[0], p_max_at_smallest
        )
    });
    Ok((report, p_hat))
}
