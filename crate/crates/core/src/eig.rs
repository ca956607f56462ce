//! Nonsymmetric eigenvalues: balancing, Householder reduction to Hessenberg
//! form, then single-shift complex QR iteration with Wilkinson shifts.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Scalar, ZERO};

/// Subdiagonal deflation threshold, relative to the neighboring diagonal.
pub const EIG_DEFLATION_TOL: f64 = 1e-13;
/// Iteration budget as a multiple of the dimension.
pub const EIG_ITER_FACTOR: usize = 50;

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<Scalar>,
}

impl Spectrum {
    /// Product of the eigenvalues (equals the determinant).
    pub fn product(&self) -> Scalar {
        self.eigenvalues
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, &z| acc * z)
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.norm()).collect()
    }
}

/// Eigenvalues of a square complex matrix, n <= 2048.
pub fn eigenvalues(a: &DenseMatrix) -> Result<Spectrum> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    a.check_finite()?;
    let n = a.rows();
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: vec![],
        });
    }
    if n > 2048 {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue solver limited to n <= 2048, got {n}"
        )));
    }

    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    let eigs = hessenberg_qr(&mut h)?;
    Ok(Spectrum { eigenvalues: eigs })
}

/// Diagonal similarity scaling by powers of two to even out row/column norms.
fn balance(a: &mut DenseMatrix) {
    let n = a.rows();
    let radix = 2.0f64;
    let mut done = false;
    let mut rounds = 0;
    while !done && rounds < 32 {
        done = true;
        rounds += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].norm();
                    r += a[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut f = 1.0;
            let s = c + r;
            let mut cc = c;
            let mut rr = r;
            while cc < rr / radix {
                cc *= radix;
                rr /= radix;
                f *= radix;
            }
            while cc > rr * radix {
                cc /= radix;
                rr *= radix;
                f /= radix;
            }
            if (cc + rr) < 0.95 * s {
                done = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= inv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(a: &mut DenseMatrix) {
    let n = a.rows();
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<Scalar> = ((k + 1)..n).map(|i| a[(i, k)]).collect();
        let norm_x = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let phase = if v[0].norm() > 0.0 {
            v[0] / v[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        v[0] += phase * norm_x;
        let vnorm_sq = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if vnorm_sq == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm_sq;
        let len = n - k - 1;
        // A <- H A with H = I - tau v v^* acting on rows k+1..n.
        for j in 0..n {
            let dot: Scalar = (0..len).map(|i| v[i].conj() * a[(k + 1 + i, j)]).sum();
            let c = dot * tau;
            for i in 0..len {
                let upd = v[i] * c;
                a[(k + 1 + i, j)] -= upd;
            }
        }
        // A <- A H acting on columns k+1..n.
        for i in 0..n {
            let dot: Scalar = (0..len).map(|j| a[(i, k + 1 + j)] * v[j]).sum();
            let c = dot * tau;
            for j in 0..len {
                let upd = c * v[j].conj();
                a[(i, k + 1 + j)] -= upd;
            }
        }
    }
    // Clean entries below the first subdiagonal.
    for i in 2..n {
        for j in 0..(i - 1) {
            a[(i, j)] = ZERO;
        }
    }
}

/// Wilkinson shift: eigenvalue of the trailing 2x2 closest to the corner.
fn wilkinson_shift(h: &DenseMatrix, hi: usize) -> Scalar {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let l1 = (tr + disc) * 0.5;
    let l2 = (tr - disc) * 0.5;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn eig2(a: Scalar, b: Scalar, c: Scalar, d: Scalar) -> (Scalar, Scalar) {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    ((tr + disc) * 0.5, (tr - disc) * 0.5)
}

/// Shifted QR iteration on an upper Hessenberg matrix using Givens rotations.
/// Returns the eigenvalues; reports non-convergence with the iteration count.
fn hessenberg_qr(h: &mut DenseMatrix) -> Result<Vec<Scalar>> {
    let n = h.rows();
    let mut eigs: Vec<Scalar> = Vec::with_capacity(n);
    let mut hi = n - 1; // active block is 0..=hi after deflated tail removal
    let budget = EIG_ITER_FACTOR * n;
    let mut iterations = 0usize;
    let mut stall = 0usize;

    'outer: loop {
        // Deflate converged subdiagonals at the bottom of the active block.
        loop {
            if hi == 0 {
                eigs.push(h[(0, 0)]);
                break 'outer;
            }
            let sub = h[(hi, hi - 1)].norm();
            let scale = h[(hi - 1, hi - 1)].norm() + h[(hi, hi)].norm();
            if sub <= EIG_DEFLATION_TOL * scale.max(f64::MIN_POSITIVE) {
                eigs.push(h[(hi, hi)]);
                hi -= 1;
                stall = 0;
                continue;
            }
            break;
        }

        // Find the start of the active (unreduced) block.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let scale = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if sub <= EIG_DEFLATION_TOL * scale.max(f64::MIN_POSITIVE) {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }

        if hi - lo == 1 {
            // Solve the 2x2 block directly and deflate both eigenvalues.
            let (l1, l2) = eig2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            eigs.push(l1);
            eigs.push(l2);
            if lo == 0 {
                break 'outer;
            }
            hi = lo - 1;
            stall = 0;
            continue;
        }

        if iterations >= budget {
            return Err(Error::NotConverged {
                algorithm: "hessenberg-qr",
                iterations,
                residual: h[(hi, hi - 1)].norm(),
            });
        }
        iterations += 1;
        stall += 1;

        // Occasional exceptional shift breaks symmetric stalls.
        let shift = if stall.is_multiple_of(11) {
            // hi >= lo + 2 here, so hi - 2 is in bounds.
            let mag = h[(hi, hi - 1)].norm() + h[(hi - 1, hi - 2)].norm();
            h[(hi, hi)] + Complex64::new(1.5 * mag, 0.0)
        } else {
            wilkinson_shift(h, hi)
        };

        // Explicit shifted QR sweep on the active block via Givens rotations:
        // H - sI = QR, then H <- RQ + sI.
        let m = hi - lo + 1;
        for i in lo..=hi {
            h[(i, i)] -= shift;
        }
        let mut rot: Vec<(f64, Scalar)> = Vec::with_capacity(m - 1);
        for k in lo..hi {
            let x = h[(k, k)];
            let y = h[(k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 {
                (1.0, ZERO)
            } else if x.norm() == 0.0 {
                // Pure swap when the diagonal entry vanishes.
                (0.0, y.conj() / y.norm())
            } else {
                // Unitary Givens: [c, s; -conj(s), c] * (x, y) = (r', 0)
                // with c real; s = phase(x) * conj(y) / r.
                let c = x.norm() / r;
                let phase = x / x.norm();
                let s = phase * y.conj() / r;
                (c, s)
            };
            rot.push((c, s));
            // Apply from the left to rows k, k+1.
            for j in k..=hi {
                let hk = h[(k, j)];
                let hk1 = h[(k + 1, j)];
                h[(k, j)] = c * hk + s * hk1;
                h[(k + 1, j)] = -s.conj() * hk + c * hk1;
            }
        }
        for (k, &(c, s)) in (lo..hi).zip(rot.iter()) {
            // Apply the adjoint rotations from the right to columns k, k+1;
            // rows above k+1 are the only nonzero ones in the triangular R.
            for i in lo..=(k + 1) {
                let hik = h[(i, k)];
                let hik1 = h[(i, k + 1)];
                h[(i, k)] = hik * c + hik1 * s.conj();
                h[(i, k + 1)] = -hik * s + hik1 * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += shift;
        }
    }

    // Deflation walks from the bottom, so reverse for a stable order.
    eigs.reverse();
    Ok(eigs)
}
