//! Householder QR for complex matrices.
//!
//! `R` is normalized to a real non-negative diagonal by absorbing column
//! phases into `Q`. Without this normalization the QR of a Gaussian matrix
//! is not Haar distributed, so the convention is load-bearing for the
//! ensemble samplers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Scalar, ONE, ZERO};

/// Factor `A = QR` with `Q` (m x n, orthonormal columns) and `R` (n x n upper
/// triangular, real non-negative diagonal). Requires `rows >= cols`.
pub fn qr_decompose(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::DimensionMismatch(format!(
            "qr requires rows >= cols, got {m}x{n}"
        )));
    }
    a.check_finite()?;

    let mut r = a.clone();
    // Householder vectors, one per column, stored with their tau factors.
    let mut reflectors: Vec<(Vec<Scalar>, f64)> = Vec::with_capacity(n);

    for k in 0..n {
        let mut v: Vec<Scalar> = (k..m).map(|i| r[(i, k)]).collect();
        let norm_x = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            reflectors.push((vec![ZERO; m - k], 0.0));
            continue;
        }
        // Phase chosen so the update v = x + e^{i phi} |x| e1 never cancels.
        let phase = if v[0].norm() > 0.0 {
            v[0] / v[0].norm()
        } else {
            ONE
        };
        v[0] += phase * norm_x;
        let vnorm_sq = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let tau = if vnorm_sq > 0.0 { 2.0 / vnorm_sq } else { 0.0 };

        // Apply H = I - tau v v^* to the trailing columns of R.
        for j in k..n {
            let dot: Scalar = (0..m - k).map(|i| v[i].conj() * r[(k + i, j)]).sum();
            let c = dot * tau;
            for i in 0..m - k {
                let upd = v[i] * c;
                r[(k + i, j)] -= upd;
            }
        }
        reflectors.push((v, tau));
    }

    // Accumulate Q by applying the reflectors to the thin identity.
    let mut q = DenseMatrix::zeros(m, n);
    for i in 0..n {
        q[(i, i)] = ONE;
    }
    for k in (0..n).rev() {
        let (v, tau) = &reflectors[k];
        if *tau == 0.0 {
            continue;
        }
        for j in 0..n {
            let dot: Scalar = (0..m - k).map(|i| v[i].conj() * q[(k + i, j)]).sum();
            let c = dot * *tau;
            for i in 0..m - k {
                let upd = v[i] * c;
                q[(k + i, j)] -= upd;
            }
        }
    }

    // Make the R diagonal real non-negative: R <- P^* R, Q <- Q P with
    // P = diag(phase of R_kk).
    for k in 0..n {
        let d = r[(k, k)];
        if d.norm() == 0.0 {
            continue;
        }
        let phase = d / d.norm();
        let inv = phase.conj();
        for j in k..n {
            r[(k, j)] *= inv;
        }
        // Force the exact real value on the diagonal.
        r[(k, k)] = Complex64::new(r[(k, k)].re.abs(), 0.0);
        for i in 0..m {
            q[(i, k)] *= phase;
        }
    }
    // Zero the strict lower triangle of R (round-off residue).
    let mut r_out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r_out[(i, j)] = r[(i, j)];
        }
    }

    Ok((q, r_out))
}
