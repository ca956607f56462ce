//! Singular value decomposition by one-sided Jacobi.
//!
//! The method rotates column pairs of a working copy of `A` until all
//! columns are mutually orthogonal; the column norms are then the singular
//! values and the accumulated rotations form the right factor. It is slow
//! compared to bidiagonalization but reaches close to full relative
//! accuracy, which the verification suites lean on.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Scalar, ONE, ZERO};

/// Jacobi sweep limit before reporting non-convergence.
pub const SVD_SWEEP_LIMIT: usize = 60;
/// Relative off-diagonal Gram threshold for convergence.
pub const SVD_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Left factor with orthonormal columns (m x min(m,n) thin for tall input).
    pub left: DenseMatrix,
    /// Singular values sorted descending.
    pub singular_values: Vec<f64>,
    /// Right factor with orthonormal columns (square for square input);
    /// `A = left * diag(singular_values) * right^*`.
    pub right: DenseMatrix,
}

impl SvdResult {
    pub fn smallest(&self) -> f64 {
        *self.singular_values.last().expect("nonempty spectrum")
    }

    pub fn largest(&self) -> f64 {
        *self.singular_values.first().expect("nonempty spectrum")
    }

    /// `U * diag(sigma) * V^*`, for residual checks.
    pub fn reconstruct(&self) -> DenseMatrix {
        let k = self.singular_values.len();
        let mut us = self.left.clone();
        for j in 0..k {
            let s = self.singular_values[j];
            for i in 0..us.rows() {
                us[(i, j)] *= s;
            }
        }
        &us * &self.right.adjoint()
    }
}

/// One-sided Jacobi SVD. Wide inputs are handled through the adjoint.
pub fn svd(a: &DenseMatrix) -> Result<SvdResult> {
    a.check_finite()?;
    if a.rows().max(a.cols()) > 2048 {
        return Err(Error::InvalidArgument(format!(
            "svd limited to dimensions <= 2048, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.rows() < a.cols() {
        let t = svd_tall(&a.adjoint())?;
        // A = (A^*)^* = (U S V^*)^* = V S U^*.
        return Ok(SvdResult {
            left: t.right,
            singular_values: t.singular_values,
            right: t.left,
        });
    }
    svd_tall(a)
}

fn svd_tall(a: &DenseMatrix) -> Result<SvdResult> {
    let (m, n) = (a.rows(), a.cols());
    let mut w = a.clone(); // working columns
    let mut v = DenseMatrix::identity(n);

    // Columns at rounding-noise level are numerically null; rotating against
    // them never settles because their direction is pure cancellation noise.
    let col_floor = a.hs_norm() * f64::EPSILON * (m.max(n) as f64) * 8.0;

    let mut converged = false;
    let mut worst = 0.0f64;
    for _sweep in 0..SVD_SWEEP_LIMIT {
        worst = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = 0.0f64;
                let mut beta = 0.0f64;
                let mut gamma = ZERO;
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    alpha += wp.norm_sqr();
                    beta += wq.norm_sqr();
                    gamma += wp.conj() * wq;
                }
                let denom = (alpha * beta).sqrt();
                if denom == 0.0 || alpha.sqrt() <= col_floor || beta.sqrt() <= col_floor {
                    continue;
                }
                let rel = gamma.norm() / denom;
                worst = worst.max(rel);
                if rel <= SVD_TOL {
                    continue;
                }
                // Unitary 2x2 that orthogonalizes the pair: strip the phase
                // of gamma, then solve the real symmetric Jacobi equation.
                let g_abs = gamma.norm();
                let phase = gamma / g_abs;
                let zeta = (beta - alpha) / (2.0 * g_abs);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let sp = s * phase; // multiplies column p contribution of w_q
                let spc = sp.conj();
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = c * wp - spc * wq;
                    w[(i, q)] = sp * wp + c * wq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - spc * vq;
                    v[(i, q)] = sp * vp + c * vq;
                }
            }
        }
        if worst <= SVD_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged {
            algorithm: "jacobi-svd",
            iterations: SVD_SWEEP_LIMIT,
            residual: worst,
        });
    }

    let mut sigma: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| w[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    sigma = order.iter().map(|&j| sigma[j]).collect();

    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    // Columns below this are treated as numerically null and replaced by an
    // orthonormal completion of the range.
    let null_tol = sigma_max * (m.max(n) as f64) * f64::EPSILON * 16.0;

    let mut u = DenseMatrix::zeros(m, n);
    let mut v_sorted = DenseMatrix::zeros(n, n);
    let mut null_cols: Vec<usize> = Vec::new();
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            v_sorted[(i, new_j)] = v[(i, old_j)];
        }
        if sigma[new_j] > null_tol && sigma[new_j] > 0.0 {
            let inv = 1.0 / sigma[new_j];
            for i in 0..m {
                u[(i, new_j)] = w[(i, old_j)] * inv;
            }
        } else {
            null_cols.push(new_j);
        }
    }
    if !null_cols.is_empty() {
        complete_orthonormal(&mut u, &null_cols);
    }

    Ok(SvdResult {
        left: u,
        singular_values: sigma,
        right: v_sorted,
    })
}

/// Fill the listed columns of `u` with unit vectors orthogonal to all other
/// columns, via doubly re-orthogonalized Gram-Schmidt over the canonical
/// basis.
fn complete_orthonormal(u: &mut DenseMatrix, fill: &[usize]) {
    let m = u.rows();
    let n = u.cols();
    let filled: Vec<usize> = (0..n).filter(|j| !fill.contains(j)).collect();
    let mut done: Vec<usize> = filled;
    for &target in fill {
        let mut best: Option<Vec<Scalar>> = None;
        let mut best_norm = -1.0;
        for k in 0..m {
            let mut cand: Vec<Scalar> = vec![ZERO; m];
            cand[k] = ONE;
            for _pass in 0..2 {
                for &j in &done {
                    let col = u.col(j);
                    let proj: Scalar = col.iter().zip(&cand).map(|(a, b)| a.conj() * b).sum();
                    for i in 0..m {
                        cand[i] -= proj * col[i];
                    }
                }
            }
            let norm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > best_norm {
                best_norm = norm;
                best = Some(cand);
            }
            if norm > 0.5 {
                break;
            }
        }
        let mut vec = best.expect("nonzero completion");
        let norm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in vec.iter_mut() {
            *z /= Complex64::new(norm, 0.0);
        }
        for i in 0..m {
            u[(i, target)] = vec[i];
        }
        done.push(target);
    }
}

/// Smallest singular value of a square matrix.
pub fn smallest_singular_value(a: &DenseMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    Ok(svd(a)?.smallest())
}

/// Operator (spectral) norm, i.e. the largest singular value.
pub fn operator_norm(a: &DenseMatrix) -> Result<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0.0);
    }
    Ok(svd(a)?.largest())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::I;
    use crate::rng::RngStream;

    fn unitarity_defect(u: &DenseMatrix) -> f64 {
        (&u.adjoint() * u).max_abs_diff(&DenseMatrix::identity(u.cols()))
    }

    #[test]
    fn diagonal_case() {
        let a = DenseMatrix::diag(&[Complex64::new(3.0, 0.0), Complex64::new(1.0, 0.0)]);
        let r = svd(&a).unwrap();
        assert!((r.singular_values[0] - 3.0).abs() < 1e-14);
        assert!((r.singular_values[1] - 1.0).abs() < 1e-14);
    }

    // Oracle: B = [[1,i],[i,-1]] has B B^* = [[2,-2i],[2i,2]] with eigenvalues
    // {4, 0}, so the singular values are exactly (2, 0).
    #[test]
    fn rank_one_complex_matrix() {
        let a = DenseMatrix::from_vec(2, 2, vec![ONE, I, I, -ONE]).unwrap();
        let r = svd(&a).unwrap();
        assert!((r.singular_values[0] - 2.0).abs() < 1e-13);
        assert!(r.singular_values[1].abs() < 1e-13);
        // Orthonormal factors even in the rank-deficient case.
        assert!(unitarity_defect(&r.left) < 1e-12);
        assert!(unitarity_defect(&r.right) < 1e-12);
        assert!(r.reconstruct().max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn haar_unitary_has_unit_singular_values() {
        let mut rng = RngStream::new(5, 1);
        let u = crate::ensembles::haar_unitary(5, &mut rng);
        let r = svd(&u).unwrap();
        for s in r.singular_values {
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn reconstruction_on_random_rectangular() {
        let mut rng = RngStream::new(13, 2);
        for &(m, n) in &[(5usize, 5usize), (8, 3), (3, 8), (12, 12)] {
            let a = DenseMatrix::from_fn(m, n, |_, _| rng.next_complex_normal());
            let r = svd(&a).unwrap();
            let resid = r.reconstruct().max_abs_diff(&a);
            let s1 = r.singular_values[0];
            assert!(resid <= 1e-9 * s1.max(1.0), "residual {resid} at {m}x{n}");
            assert!(unitarity_defect(&r.left) < 1e-9);
            assert!(unitarity_defect(&r.right) < 1e-9);
            // Sorted descending.
            for w in r.singular_values.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn smallest_singular_value_of_diag() {
        let a = DenseMatrix::diag(&[Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.0)]);
        assert!((smallest_singular_value(&a).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn operator_norm_of_diag() {
        let a = DenseMatrix::diag(&[Complex64::new(1.0, 0.0), Complex64::new(-4.0, 0.0)]);
        assert!((operator_norm(&a).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let r = svd(&DenseMatrix::zeros(3, 3)).unwrap();
        assert!(r.singular_values.iter().all(|&s| s == 0.0));
        assert!(unitarity_defect(&r.left) < 1e-12);
    }
}
