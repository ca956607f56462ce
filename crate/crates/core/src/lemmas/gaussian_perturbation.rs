//! Invertibility of Gaussian perturbations of the identity: for a linear
//! map f of Gaussian vectors into 3x3 complex matrices with operator bound
//! K, the tail P(s_min(I + f(Z)) <= t) decays polynomially in t.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lemmas::LemmaReport;
use crate::matrix::DenseMatrix;
use crate::rng::RngStream;
use crate::svd::{smallest_singular_value, svd};

/// Linear map R^m -> C^{3x3}: entry (i, j) of the image is
/// a[i][j]^T z + i b[i][j]^T z.
#[derive(Debug, Clone)]
pub struct FSpec {
    pub re_coeffs: Vec<Vec<f64>>, // 9 vectors of length m, row-major entries
    pub im_coeffs: Vec<Vec<f64>>,
    pub m: usize,
}

impl FSpec {
    pub fn new(re_coeffs: Vec<Vec<f64>>, im_coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if re_coeffs.len() != 9 || im_coeffs.len() != 9 {
            return Err(Error::InvalidArgument(
                "need 9 real and 9 imaginary coefficient vectors".into(),
            ));
        }
        let m = re_coeffs[0].len();
        if m == 0 || re_coeffs.iter().chain(&im_coeffs).any(|v| v.len() != m) {
            return Err(Error::InvalidArgument(
                "coefficient vectors must share a positive length".into(),
            ));
        }
        Ok(Self {
            re_coeffs,
            im_coeffs,
            m,
        })
    }

    /// Identically zero map.
    pub fn zero(m: usize) -> Self {
        Self {
            re_coeffs: vec![vec![0.0; m]; 9],
            im_coeffs: vec![vec![0.0; m]; 9],
            m,
        }
    }

    /// Random Gaussian coefficients, rescaled to the requested operator
    /// bound.
    pub fn random(m: usize, k: f64, rng: &mut RngStream) -> Self {
        let mut spec = Self {
            re_coeffs: (0..9)
                .map(|_| (0..m).map(|_| rng.next_normal()).collect())
                .collect(),
            im_coeffs: (0..9)
                .map(|_| (0..m).map(|_| rng.next_normal()).collect())
                .collect(),
            m,
        };
        let current = spec.operator_bound();
        if current > 0.0 {
            let scale = k / current;
            for v in spec.re_coeffs.iter_mut().chain(spec.im_coeffs.iter_mut()) {
                for c in v.iter_mut() {
                    *c *= scale;
                }
            }
        }
        spec
    }

    pub fn apply(&self, z: &[f64]) -> DenseMatrix {
        debug_assert_eq!(z.len(), self.m);
        DenseMatrix::from_fn(3, 3, |i, j| {
            let idx = 3 * i + j;
            let re: f64 = self.re_coeffs[idx].iter().zip(z).map(|(c, x)| c * x).sum();
            let im: f64 = self.im_coeffs[idx].iter().zip(z).map(|(c, x)| c * x).sum();
            Complex64::new(re, im)
        })
    }

    /// Exact operator bound sup ||f(z)||_HS / ||z||: the largest singular
    /// value of the 18 x m matrix stacking all coefficient vectors.
    pub fn operator_bound(&self) -> f64 {
        let mut stack = DenseMatrix::zeros(18, self.m);
        for (r, v) in self.re_coeffs.iter().chain(&self.im_coeffs).enumerate() {
            for (c, &x) in v.iter().enumerate() {
                stack[(r, c)] = Complex64::new(x, 0.0);
            }
        }
        svd(&stack).expect("finite coefficients").largest()
    }
}

/// Tail estimation for s_min(I + f(Z)) on an ascending grid, with a
/// monotonicity check and decay assertion at the smallest point.
pub fn verify_gaussian_perturbation(
    f_spec: &FSpec,
    t_grid: &[f64],
    trials: u64,
    p_max_at_smallest: f64,
    rng: &RngStream,
) -> Result<(LemmaReport, Vec<f64>)> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty t grid".into()));
    }
    let smin: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut stream = rng.substream(trial);
            let z: Vec<f64> = (0..f_spec.m).map(|_| stream.next_normal()).collect();
            let a = &DenseMatrix::identity(3) + &f_spec.apply(&z);
            smallest_singular_value(&a).expect("finite")
        })
        .collect();
    let p_hat: Vec<f64> = t_grid
        .iter()
        .map(|&t| smin.iter().filter(|&&s| s <= t).count() as f64 / trials as f64)
        .collect();

    let mut report = LemmaReport::new("gaussian-perturbation");
    // Event nesting: p_hat nondecreasing along the ascending grid.
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
