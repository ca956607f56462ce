//! Null covectors and the quadratic-form identity: with A split as
//! [[A11, Y^T], [X, B^T]] and h the unit vector bilinearly orthogonal to
//! columns 2..n of A,
//!
//!   |h^T A_1| = |A11 - X^T B^{-1} Y| / sqrt(1 + ||B^{-1} Y||^2).

use rayon::prelude::*;

use crate::ensembles::gaussian_complex_matrix;
use crate::error::{Error, Result};
use crate::lemmas::{BlockMatrix2, LemmaReport};
use crate::lu::solve_linear;
use crate::matrix::{dot_bilinear, vec_norm, DenseMatrix, Scalar};
use crate::rng::RngStream;
use crate::svd::svd;

/// Unit vector h with h^T A_i = 0 for columns i = 2..n (bilinear product,
/// no conjugation). Computed from the SVD of the transposed column block:
/// the right singular vector of its smallest singular value spans the
/// kernel.
pub fn null_covector(a: &DenseMatrix) -> Result<Vec<Scalar>> {
    if !a.is_square() || a.rows() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "null covector needs a square matrix of order >= 2, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    // Rows of C are the transposed columns 2..n; pad with a zero row so the
    // kernel direction appears as the last right singular vector.
    let mut c = DenseMatrix::zeros(n, n);
    for i in 0..n - 1 {
        for j in 0..n {
            c[(i, j)] = a[(j, i + 1)];
        }
    }
    let f = svd(&c)?;
    // sigma_{n-1} is the smallest singular value of the block itself; the
    // final (padded) one is an exact zero.
    let second_smallest = f.singular_values[n - 2];
    if second_smallest <= 1e-10 * f.singular_values[0].max(1.0) {
        return Err(Error::RankDeficient(format!(
            "columns 2..n nearly dependent (sigma = {second_smallest:.3e})"
        )));
    }
    Ok(f.right.col(n - 1))
}

/// Both-sides evaluation of the quadratic-form identity on a k = 1 block
/// split. Records the relative error against a 1e-8 tolerance.
pub fn verify_quadratic_form(block: &BlockMatrix2) -> Result<LemmaReport> {
    if block.k() != 1 {
        return Err(Error::InvalidArgument(format!(
            "expected a 1 x (n-1) split, got k = {}",
            block.k()
        )));
    }
    let mut report = LemmaReport::new("quadratic-form");
    let rel = quadratic_form_relative_error(block)?;
    report.record(1e-8 - rel, || format!("relative error {rel:.3e}"));
    Ok(report)
}

/// Relative discrepancy between |h^T A_1| and the closed form.
pub fn quadratic_form_relative_error(block: &BlockMatrix2) -> Result<f64> {
    let (lhs, rhs) = quadratic_form_both_sides(block)?;
    Ok((lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE))
}

/// (|h^T A_1| via the null covector, closed form via B^{-1}).
pub fn quadratic_form_both_sides(block: &BlockMatrix2) -> Result<(f64, f64)> {
    let a11 = block.top_left[(0, 0)];
    // The stored blocks are Y^T (row) and B^T, per the split layout.
    let y: Vec<Scalar> = block.top_right.row(0);
    let x: Vec<Scalar> = block.bottom_left.col(0);
    let b = block.bottom_right.transpose();

    let fb = svd(&b)?;
    if fb.smallest() <= 1e-10 * fb.largest() {
        return Err(Error::NearSingular {
            pivot_ratio: fb.smallest() / fb.largest().max(f64::MIN_POSITIVE),
        });
    }
    let binv_y = solve_linear(&b, &y)?;
    let xt_binv_y = dot_bilinear(&x, &binv_y);
    let closed = (a11 - xt_binv_y).norm() / (1.0 + vec_norm(&binv_y).powi(2)).sqrt();

    let assembled = block.assemble();
    let h = null_covector(&assembled)?;
    let a1 = assembled.col(0);
    let lhs = dot_bilinear(&h, &a1).norm();
    Ok((lhs, closed))
}

/// Random-instance suite for the quadratic-form identity.
pub fn quadratic_form_suite(n: usize, instances: u64, rng: &RngStream) -> Result<LemmaReport> {
    let reports: Vec<LemmaReport> = (0..instances)
        .into_par_iter()
        .map(|k| {
            let mut stream = rng.substream(k);
            let mut report = LemmaReport::new("quadratic-form");
            let a = gaussian_complex_matrix(n, n, &mut stream);
            let block = BlockMatrix2::split(&a, 1).expect("n >= 2");
            match quadratic_form_relative_error(&block) {
                Ok(rel) => report.record(1e-8 - rel, || format!("n={n} relative error {rel:.3e}")),
                Err(_) => report.skip(),
            }
            report
        })
        .collect();
    Ok(reports
        .into_iter()
        .fold(LemmaReport::new("quadratic-form"), LemmaReport::merge))
}
