//! Pivoted LU factorization: determinants and linear solves.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Scalar, ZERO};

/// Relative pivot-ratio threshold below which a solve is refused.
pub const SOLVE_PIVOT_TOL: f64 = 1e-12;

struct LuFactors {
    lu: DenseMatrix,
    perm_sign: f64,
    min_pivot: f64,
    max_pivot: f64,
    perm: Vec<usize>,
}

fn lu_factor(a: &DenseMatrix) -> Result<LuFactors> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    a.check_finite()?;
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut min_pivot = f64::INFINITY;
    let mut max_pivot = 0.0f64;

    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_mag = lu[(k, k)].norm();
        for i in (k + 1)..n {
            let mag = lu[(i, k)].norm();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if pivot_row != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(pivot_row, j)];
                lu[(pivot_row, j)] = t;
            }
            perm.swap(k, pivot_row);
            sign = -sign;
        }
        min_pivot = min_pivot.min(pivot_mag);
        max_pivot = max_pivot.max(pivot_mag);
        if pivot_mag == 0.0 {
            continue; // singular; elimination of this column is a no-op
        }
        let inv = lu[(k, k)].inv();
        for i in (k + 1)..n {
            let factor = lu[(i, k)] * inv;
            lu[(i, k)] = factor;
            for j in (k + 1)..n {
                let upd = factor * lu[(k, j)];
                lu[(i, j)] -= upd;
            }
        }
    }

    Ok(LuFactors {
        lu,
        perm_sign: sign,
        min_pivot,
        max_pivot,
        perm,
    })
}

/// Determinant via pivoted LU. Singular input yields zero, not an error.
pub fn determinant(a: &DenseMatrix) -> Result<Scalar> {
    let f = lu_factor(a)?;
    let n = a.rows();
    let mut det = Complex64::new(f.perm_sign, 0.0);
    for k in 0..n {
        det *= f.lu[(k, k)];
    }
    Ok(det)
}

/// Solve `A x = b`, refusing near-singular systems.
pub fn solve_linear(a: &DenseMatrix, b: &[Scalar]) -> Result<Vec<Scalar>> {
    let n = a.rows();
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "rhs length {} vs matrix order {}",
            b.len(),
            n
        )));
    }
    let f = lu_factor(a)?;
    let ratio = if f.max_pivot > 0.0 {
        f.min_pivot / f.max_pivot
    } else {
        0.0
    };
    if ratio < SOLVE_PIVOT_TOL {
        return Err(Error::NearSingular { pivot_ratio: ratio });
    }

    // Forward substitution with the permuted rhs, then back substitution.
    let mut y: Vec<Scalar> = f.perm.iter().map(|&p| b[p]).collect();
    for i in 1..n {
        for j in 0..i {
            let upd = f.lu[(i, j)] * y[j];
            y[i] -= upd;
        }
    }
    let mut x = vec![ZERO; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for (j, &xj) in x.iter().enumerate().skip(i + 1) {
            s -= f.lu[(i, j)] * xj;
        }
        x[i] = s * f.lu[(i, i)].inv();
    }
    Ok(x)
}

/// Explicit inverse, column by column. Intended for small matrices in the
/// verification suites.
pub fn inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows();
    let mut out = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![ZERO; n];
        e[j] = Complex64::new(1.0, 0.0);
        let col = solve_linear(a, &e)?;
        out.set_col(j, &col);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{vec_norm, ONE};
    use crate::rng::RngStream;

    #[test]
    fn determinant_of_rotation_shift() {
        // det(-I + U(phi)) at phi = pi equals 2 - 2 cos(pi) = 4: the shifted
        // rotation is -2I there.
        let phi = std::f64::consts::PI;
        let u =
            DenseMatrix::from_real(2, 2, &[phi.cos(), phi.sin(), -phi.sin(), phi.cos()]).unwrap();
        let a = &u - &DenseMatrix::identity(2);
        let det = determinant(&a).unwrap();
        assert!((det - Complex64::new(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn solve_residual_small() {
        let mut rng = RngStream::new(3, 9);
        let a = DenseMatrix::from_fn(6, 6, |_, _| rng.next_complex_normal());
        let b: Vec<_> = (0..6).map(|_| rng.next_complex_normal()).collect();
        let x = solve_linear(&a, &b).unwrap();
        let ax = a.matvec(&x);
        let resid: Vec<_> = ax.iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(vec_norm(&resid) <= 1e-8 * vec_norm(&b).max(1.0));
    }

    #[test]
    fn near_singular_is_refused() {
        let a = DenseMatrix::diag(&[ONE, Complex64::new(1e-15, 0.0)]);
        assert!(matches!(
            solve_linear(&a, &[ONE, ONE]),
            Err(Error::NearSingular { .. })
        ));
    }

    #[test]
    fn determinant_of_singular_matrix_is_zero() {
        let a = DenseMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(determinant(&a).unwrap().norm() < 1e-14);
    }

    #[test]
    fn smallest_singular_value_inverts_operator_norm() {
        // s_min(A) * ||A^{-1}|| = 1 within relative 1e-6 away from
        // singularity.
        let mut rng = RngStream::new(12, 5);
        for n in [3usize, 6, 10] {
            let a = DenseMatrix::from_fn(n, n, |_, _| rng.next_complex_normal());
            let smin = crate::svd::smallest_singular_value(&a).unwrap();
            if smin < 1e-6 {
                continue;
            }
            let inv_norm = crate::svd::operator_norm(&inverse(&a).unwrap()).unwrap();
            let prod = smin * inv_norm;
            assert!((prod - 1.0).abs() <= 1e-6, "product {prod}");
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let mut rng = RngStream::new(8, 8);
        let a = DenseMatrix::from_fn(5, 5, |_, _| rng.next_complex_normal());
        let inv = inverse(&a).unwrap();
        assert!((&a * &inv).max_abs_diff(&DenseMatrix::identity(5)) < 1e-10);
    }
}
