//! Monte Carlo tail estimation for the smallest singular value of D + U,
//! exponent fitting, assumption checks and the explicit rank-one
//! counterexample family.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::{DiagonalMatrix, Ensemble};
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, I};
use crate::rng::RngStream;
use crate::stats::{fmt_f64, linear_fit, wilson_interval, Z_95};
use crate::svd::smallest_singular_value;

/// Monte Carlo estimate of t -> P(s_min(D + U) <= t) on an ascending grid.
#[derive(Debug, Clone)]
pub struct TailEstimate {
    pub t_grid: Vec<f64>,
    pub hits: Vec<u64>,
    pub trials: u64,
    pub p_hat: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub ensemble: Ensemble,
}

impl TailEstimate {
    /// Cumulative threshold counts over one sample of s_min values; p_hat is
    /// nondecreasing along the grid by construction.
    pub fn from_smin_samples(
        t_grid: Vec<f64>,
        smin: &[f64],
        ensemble: Ensemble,
    ) -> Result<TailEstimate> {
        if smin.is_empty() {
            return Err(Error::InvalidArgument("no trials".into()));
        }
        check_grid(&t_grid)?;
        let trials = smin.len() as u64;
        let hits: Vec<u64> = t_grid
            .iter()
            .map(|&t| smin.iter().filter(|&&s| s <= t).count() as u64)
            .collect();
        let p_hat: Vec<f64> = hits.iter().map(|&h| h as f64 / trials as f64).collect();
        let (ci_low, ci_high): (Vec<f64>, Vec<f64>) = hits
            .iter()
            .map(|&h| wilson_interval(h, trials, Z_95))
            .unzip();
        Ok(TailEstimate {
            t_grid,
            hits,
            trials,
            p_hat,
            ci_low,
            ci_high,
            ensemble,
        })
    }

    /// CSV rows under the exact header `t,hits,trials,p_hat,ci_low,ci_high`,
    /// floats at 17 significant digits.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "t,hits,trials,p_hat,ci_low,ci_high")?;
        for k in 0..self.t_grid.len() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_f64(self.t_grid[k]),
                self.hits[k],
                self.trials,
                fmt_f64(self.p_hat[k]),
                fmt_f64(self.ci_low[k]),
                fmt_f64(self.ci_high[k])
            )?;
        }
        Ok(())
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty t grid".into()));
    }
    for w in t_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidArgument(format!(
                "t grid must be strictly ascending, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    if t_grid[0] <= 0.0 {
        return Err(Error::InvalidArgument("t grid must be positive".into()));
    }
    Ok(())
}

/// Power-law fit of the estimated tail on nondegenerate grid points.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentFit {
    pub c_hat: f64,
    #[serde(rename = "logC_hat")]
    pub log_c_hat: f64,
    pub r_squared: f64,
    pub t_min: f64,
    pub t_max: f64,
}

/// Assumption report for the orthogonal-perturbation bounds: the diagonal
/// norm bound, the squared-entry spread and the distance to the orthogonal
/// group.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub k_observed: f64,
    pub delta_sq_observed: f64,
    pub dist_to_orthogonal: f64,
    /// max_i |d_i| <= K and max_{i,j} |d_i^2 - d_j^2| >= delta (the
    /// complex-diagonal form of the assumptions).
    pub passes_spread_condition: bool,
    /// max_i |d_i| <= K and distance to O(n) at least delta (the real
    /// form, reduced to the diagonal).
    pub passes_distance_condition: bool,
}

/// s_min(D + U) for one fresh draw from the ensemble.
pub fn perturbed_smin(d: &DenseMatrix, ensemble: Ensemble, rng: &mut RngStream) -> Result<f64> {
    if !d.is_square() {
        return Err(Error::NotSquare {
            rows: d.rows(),
            cols: d.cols(),
        });
    }
    let u = ensemble.sample(d.rows(), rng);
    smallest_singular_value(&(d + &u))
}

/// Parallel tail estimator. Trial i draws from the stream with id i derived
/// from `rng`'s seed, so results are independent of scheduling.
pub fn tail_estimate(
    d: &DenseMatrix,
    ensemble: Ensemble,
    t_grid: &[f64],
    trials: u64,
    rng: &RngStream,
) -> Result<TailEstimate> {
    if trials < 1 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    check_grid(t_grid)?;
    let smin: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut stream = rng.substream(trial);
            perturbed_smin(d, ensemble, &mut stream).expect("finite square input")
        })
        .collect();
    TailEstimate::from_smin_samples(t_grid.to_vec(), &smin, ensemble)
}

/// Log-log least squares over grid points with 0 < p_hat < 1.
pub fn fit_tail_exponent(est: &TailEstimate) -> Result<ExponentFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut t_min = f64::INFINITY;
    let mut t_max = f64::NEG_INFINITY;
    for (&t, &p) in est.t_grid.iter().zip(&est.p_hat) {
        if p > 0.0 && p < 1.0 {
            xs.push(t.ln());
            ys.push(p.ln());
            t_min = t_min.min(t);
            t_max = t_max.max(t);
        }
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            found: xs.len(),
        });
    }
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    Ok(ExponentFit {
        c_hat: slope,
        log_c_hat: intercept,
        r_squared: r2,
        t_min,
        t_max,
    })
}

/// Check the diagonal assumptions behind the orthogonal-perturbation bounds:
/// max_i |d_i| <= K together with either max_{i,j} |d_i^2 - d_j^2| >= delta
/// (full version) or distance to O(n) at least delta (real version).
pub fn check_assumptions(d: &DiagonalMatrix, k: f64, delta: f64) -> Result<AssumptionReport> {
    if d.is_empty() {
        return Err(Error::InvalidArgument("empty diagonal".into()));
    }
    let k_observed = d.diag.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut delta_sq_observed = 0.0f64;
    for i in 0..d.len() {
        for j in (i + 1)..d.len() {
            let di2 = d.diag[i] * d.diag[i];
            let dj2 = d.diag[j] * d.diag[j];
            delta_sq_observed = delta_sq_observed.max((di2 - dj2).norm());
        }
    }
    // The operator-norm distance to O(n) of a diagonal matrix is realized by
    // its orthogonal polar factor: max_i | s_i(D) - 1 | with s_i(D) = |d_i|.
    let dist_to_orthogonal = d
        .diag
        .iter()
        .map(|z| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(AssumptionReport {
        k_observed,
        delta_sq_observed,
        dist_to_orthogonal,
        passes_spread_condition: k_observed <= k && delta_sq_observed >= delta,
        passes_distance_condition: k_observed <= k && dist_to_orthogonal >= delta,
    })
}

/// The rank-one family B = M [[1, i], [i, -1]]: B B^T = 0 exactly, and
/// det(B + U) = 1 for every rotation U in SO(2), while ||B|| = 2M. Random
/// rotations therefore leave B + U poorly invertible no matter how large M
/// is. (On the reflection coset of O(2) the determinant is -1 - 2M e^{i phi}
/// instead and B + U is well invertible.)
pub fn counterexample_matrix(m: f64) -> Result<DenseMatrix> {
    if m <= 0.0 || !m.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scale must be positive and finite, got {m}"
        )));
    }
    let mm = Complex64::new(m, 0.0);
    Ok(DenseMatrix::from_vec(2, 2, vec![mm, mm * I, mm * I, -mm]).unwrap())
}

/// Helper shared by tests and the CLI: one scalar per trial, computed in
/// parallel with per-trial streams, in deterministic trial order.
pub fn per_trial_samples<F>(trials: u64, rng: &RngStream, f: F) -> Vec<f64>
where
    F: Fn(&mut RngStream) -> f64 + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut stream = rng.substream(trial);
            f(&mut stream)
        })
        .collect()
}
