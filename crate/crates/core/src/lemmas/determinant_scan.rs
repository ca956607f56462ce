//! Determinants of rotated shifts. For 2x2 B the determinant along the
//! rotation circle is the trigonometric polynomial
//!
//!   det(B + U(phi)) = k0 + k1 cos(phi) + k2 sin(phi),
//!   k0 = det(B) + 1,  k1 = B11 + B22,  k2 = B12 - B21,
//!
//! and a matrix whose shifted determinant stays small on all of SO(n)
//! (n = 2, 3) must be nearly complex orthogonal:
//! ||B B^T - I|| <= C sup|det(B + U)| ||B||.

use crate::ensembles::{hurwitz_rotation, rotation2};
use crate::error::{Error, Result};
use crate::lu::determinant;
use crate::matrix::{DenseMatrix, Scalar, ONE};
use crate::svd::operator_norm;

/// Coefficients of det(B + U(phi)) as a degree-one trigonometric polynomial.
pub fn det_trig_coefficients(b: &DenseMatrix) -> Result<(Scalar, Scalar, Scalar)> {
    if b.rows() != 2 || b.cols() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected 2x2, got {}x{}",
            b.rows(),
            b.cols()
        )));
    }
    let det_b = b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)];
    let k0 = det_b + ONE;
    let k1 = b[(0, 0)] + b[(1, 1)];
    let k2 = b[(0, 1)] - b[(1, 0)];
    Ok((k0, k1, k2))
}

/// Largest deviation of det(B + U(phi)) from the trig-coefficient form on
/// an equispaced phi grid.
pub fn trig_identity_residual(b: &DenseMatrix, grid: usize) -> Result<f64> {
    let (k0, k1, k2) = det_trig_coefficients(b)?;
    let mut worst = 0.0f64;
    for i in 0..grid {
        let phi = std::f64::consts::TAU * i as f64 / grid as f64;
        let u = rotation2(phi);
        let lhs = determinant(&(b + &u))?;
        let rhs = k0 + k1 * phi.cos() + k2 * phi.sin();
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Scan |det(B + U)| over a deterministic grid of SO(n) and report the
/// supremum together with the complex-orthogonality defect ||B B^T - I||.
/// Callers assert orth_defect <= C * sup_det * ||B||.
pub fn vanishing_determinant_scan(b: &DenseMatrix, grid_size: usize) -> Result<(f64, f64)> {
    let n = b.rows();
    if !b.is_square() || (n != 2 && n != 3) {
        return Err(Error::DimensionMismatch(format!(
            "scan needs a 2x2 or 3x3 matrix, got {}x{}",
            b.rows(),
            b.cols()
        )));
    }
    let norm = operator_norm(b)?;
    if norm < 0.5 {
        return Err(Error::InvalidArgument(format!(
            "hypothesis ||B|| >= 1/2 fails (||B|| = {norm:.3e})"
        )));
    }

    let mut sup_det = 0.0f64;
    if n == 2 {
        for i in 0..grid_size {
            let phi = std::f64::consts::TAU * i as f64 / grid_size as f64;
            let u = rotation2(phi);
            sup_det = sup_det.max(determinant(&(b + &u))?.norm());
        }
    } else {
        // Product grid over the Hurwitz parameters: plane angle, azimuth and
        // polar cosine. Degree <= 6 trig polynomials are resolved at 16^3.
        for i in 0..grid_size {
            let phi = std::f64::consts::TAU * i as f64 / grid_size as f64;
            for j in 0..grid_size {
                let alpha = std::f64::consts::TAU * j as f64 / grid_size as f64;
                for k in 0..grid_size {
                    let u = -1.0 + 2.0 * (k as f64 + 0.5) / grid_size as f64;
                    let rot = hurwitz_rotation(phi, alpha, u);
                    sup_det = sup_det.max(determinant(&(b + &rot))?.norm());
                }
            }
        }
    }

    let defect = operator_norm(&(&(b * &b.transpose()) - &DenseMatrix::identity(n)))?;
    Ok((sup_det, defect))
}
