//! Seedable samplers for Haar-distributed matrices on U(n), O(n), SO(n),
//! Gaussian matrices and the skew perturbation ensembles.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lu::determinant;
use crate::matrix::{DenseMatrix, Scalar, I};
use crate::qr::qr_decompose;
use crate::rng::RngStream;

/// Complex diagonal matrix, stored as its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMatrix {
    pub diag: Vec<Scalar>,
}

impl DiagonalMatrix {
    pub fn new(diag: Vec<Scalar>) -> Self {
        Self { diag }
    }

    pub fn from_real(diag: &[f64]) -> Self {
        Self {
            diag: diag.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::diag(&self.diag)
    }

    pub fn scale(&self, s: Scalar) -> Self {
        Self {
            diag: self.diag.iter().map(|&d| d * s).collect(),
        }
    }
}

/// Which compact group a perturbation is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    Unitary,
    Orthogonal,
    SpecialOrthogonal,
}

impl Ensemble {
    pub fn sample(self, n: usize, rng: &mut RngStream) -> DenseMatrix {
        match self {
            Ensemble::Unitary => haar_unitary(n, rng),
            Ensemble::Orthogonal => haar_orthogonal(n, rng),
            Ensemble::SpecialOrthogonal => haar_special_orthogonal(n, rng),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Ensemble::Unitary => "unitary",
            Ensemble::Orthogonal => "orthogonal",
            Ensemble::SpecialOrthogonal => "special_orthogonal",
        }
    }
}

impl std::str::FromStr for Ensemble {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unitary" => Ok(Ensemble::Unitary),
            "orthogonal" => Ok(Ensemble::Orthogonal),
            "special_orthogonal" | "special-orthogonal" => Ok(Ensemble::SpecialOrthogonal),
            other => Err(Error::InvalidArgument(format!(
                "unknown ensemble `{other}` (expected unitary | orthogonal | special_orthogonal)"
            ))),
        }
    }
}

/// Matrix with i.i.d. real N(0,1) entries (imaginary parts zero).
pub fn gaussian_real_matrix(rows: usize, cols: usize, rng: &mut RngStream) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.next_normal(), 0.0))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_complex_matrix(rows: usize, cols: usize, rng: &mut RngStream) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.next_complex_normal())
}

/// Haar-distributed unitary matrix: QR of a complex Ginibre draw with the
/// real-non-negative R diagonal convention. With a sign-ambiguous QR the
/// output would not be Haar.
pub fn haar_unitary(n: usize, rng: &mut RngStream) -> DenseMatrix {
    let g = gaussian_complex_matrix(n, n, rng);
    let (q, _r) = qr_decompose(&g).expect("gaussian draw is finite and square");
    q
}

/// Haar-distributed real orthogonal matrix.
pub fn haar_orthogonal(n: usize, rng: &mut RngStream) -> DenseMatrix {
    let g = gaussian_real_matrix(n, n, rng);
    let (q, _r) = qr_decompose(&g).expect("gaussian draw is finite and square");
    q
}

/// Haar on SO(n): sample O(n) and reflect the det = -1 coset onto SO(n)
/// by negating the first row.
pub fn haar_special_orthogonal(n: usize, rng: &mut RngStream) -> DenseMatrix {
    let mut q = haar_orthogonal(n, rng);
    let det = determinant(&q).expect("orthogonal matrix is finite");
    if det.re < 0.0 {
        for j in 0..n {
            q[(0, j)] = -q[(0, j)];
        }
    }
    q
}

/// Deterministic Hurwitz parametrization of SO(3): a rotation of the (x,y)
/// plane by `phi`, followed by the rotation sending the z axis to the
/// direction with azimuth `alpha` and cosine of polar angle `u`.
pub fn hurwitz_rotation(phi: f64, alpha: f64, u: f64) -> DenseMatrix {
    let r_xy = DenseMatrix::from_real(
        3,
        3,
        &[
            phi.cos(),
            phi.sin(),
            0.0,
            -phi.sin(),
            phi.cos(),
            0.0,
            0.0,
            0.0,
            1.0,
        ],
    )
    .unwrap();
    let beta = u.clamp(-1.0, 1.0).acos();
    let r_y = DenseMatrix::from_real(
        3,
        3,
        &[
            beta.cos(),
            0.0,
            beta.sin(),
            0.0,
            1.0,
            0.0,
            -beta.sin(),
            0.0,
            beta.cos(),
        ],
    )
    .unwrap();
    let r_z = DenseMatrix::from_real(
        3,
        3,
        &[
            alpha.cos(),
            -alpha.sin(),
            0.0,
            alpha.sin(),
            alpha.cos(),
            0.0,
            0.0,
            0.0,
            1.0,
        ],
    )
    .unwrap();
    &(&r_z * &r_y) * &r_xy
}

/// Haar on SO(3) via the Hurwitz construction: uniform plane rotation and a
/// uniform image of the z axis on the sphere.
pub fn hurwitz_so3(rng: &mut RngStream) -> DenseMatrix {
    let phi = rng.next_angle();
    let alpha = rng.next_angle();
    let u = 2.0 * rng.next_f64() - 1.0;
    hurwitz_rotation(phi, alpha, u)
}

/// Skew-Hermitian matrix with random first row/column and zero elsewhere:
/// S_11 = i s, column below the diagonal Z, row right of the diagonal -Z^T.
pub fn skew_hermitian_bordered(n: usize, rng: &mut RngStream) -> Result<DenseMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "bordered skew matrix needs n >= 2, got {n}"
        )));
    }
    let s = rng.next_normal();
    let z: Vec<f64> = (0..n - 1).map(|_| rng.next_normal()).collect();
    let mut m = DenseMatrix::zeros(n, n);
    m[(0, 0)] = s * I;
    for (k, &zk) in z.iter().enumerate() {
        m[(k + 1, 0)] = Complex64::new(zk, 0.0);
        m[(0, k + 1)] = Complex64::new(-zk, 0.0);
    }
    Ok(m)
}

/// Real Gaussian skew-symmetric matrix: i.i.d. N(0,1) above the diagonal,
/// S^T = -S exactly.
pub fn gaussian_skew_symmetric(n: usize, rng: &mut RngStream) -> Result<DenseMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "skew-symmetric matrix needs n >= 2, got {n}"
        )));
    }
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let g = rng.next_normal();
            m[(i, j)] = Complex64::new(g, 0.0);
            m[(j, i)] = Complex64::new(-g, 0.0);
        }
    }
    Ok(m)
}

/// Dense Gaussian skew-Hermitian matrix: S^* = -S exactly, imaginary
/// N(0,1) diagonal and standard complex Gaussian above the diagonal.
pub fn gaussian_skew_hermitian(n: usize, rng: &mut RngStream) -> Result<DenseMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "skew-Hermitian matrix needs n >= 2, got {n}"
        )));
    }
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = rng.next_normal() * I;
        for j in (i + 1)..n {
            let g = rng.next_complex_normal();
            m[(i, j)] = g;
            m[(j, i)] = -g.conj();
        }
    }
    Ok(m)
}

/// SO(2) rotation by a uniform angle.
pub fn haar_so2(rng: &mut RngStream) -> DenseMatrix {
    rotation2(rng.next_angle())
}

/// The plane rotation U(phi) = [[cos, sin], [-sin, cos]].
pub fn rotation2(phi: f64) -> DenseMatrix {
    DenseMatrix::from_real(2, 2, &[phi.cos(), phi.sin(), -phi.sin(), phi.cos()]).unwrap()
}

pub fn unitarity_defect(u: &DenseMatrix) -> f64 {
    (&u.adjoint() * u).max_abs_diff(&DenseMatrix::identity(u.cols()))
}

pub fn orthogonality_defect(u: &DenseMatrix) -> f64 {
    (&u.transpose() * u).max_abs_diff(&DenseMatrix::identity(u.cols()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ONE;
    use crate::stats::{ks2_test_1pct, ks_test_1pct};

    #[test]
    fn gaussian_matrix_is_deterministic() {
        let a = gaussian_real_matrix(2, 2, &mut RngStream::new(1, 0));
        let b = gaussian_real_matrix(2, 2, &mut RngStream::new(1, 0));
        assert_eq!(a, b);
    }

    #[test]
    fn gaussian_entry_distribution_ks() {
        let mut samples: Vec<f64> = (0..10_000)
            .map(|k| gaussian_real_matrix(1, 1, &mut RngStream::new(99, k))[(0, 0)].re)
            .collect();
        assert!(ks_test_1pct(&mut samples, crate::stats::normal_cdf));
    }

    #[test]
    fn gaussian_entry_moments() {
        let mut rng = RngStream::new(5, 0);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let x = gaussian_real_matrix(2, 2, &mut rng)[(0, 0)].re;
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.02);
        assert!((var - 1.0).abs() < 0.05);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        for n in [1usize, 2, 5, 16] {
            let u = haar_unitary(n, &mut RngStream::new(11, n as u64));
            assert!(unitarity_defect(&u) <= 1e-10, "n={n}");
        }
    }

    #[test]
    fn haar_unitary_phase_uniform_in_dimension_one() {
        let mut args: Vec<f64> = (0..10_000)
            .map(|k| {
                let u = haar_unitary(1, &mut RngStream::new(123, k));
                u[(0, 0)].arg()
            })
            .collect();
        let pi = std::f64::consts::PI;
        assert!(ks_test_1pct(&mut args, |x| (x + pi) / (2.0 * pi)));
    }

    #[test]
    fn haar_unitary_entry_second_moment() {
        // E |u_11|^2 = 1/n by column-norm symmetry.
        let n = 4;
        let draws = 10_000;
        let mean: f64 = (0..draws)
            .map(|k| haar_unitary(n, &mut RngStream::new(321, k))[(0, 0)].norm_sqr())
            .sum::<f64>()
            / draws as f64;
        assert!((mean - 0.25).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn haar_left_invariance_of_trace() {
        // trace(F U) and trace(U F) are identically distributed for fixed F.
        let n = 3;
        let f = haar_unitary(n, &mut RngStream::new(7, 1000));
        let mut left: Vec<f64> = Vec::new();
        let mut right: Vec<f64> = Vec::new();
        for k in 0..10_000u64 {
            let u = haar_unitary(n, &mut RngStream::new(53, k));
            left.push((&f * &u).trace().re);
            let u2 = haar_unitary(n, &mut RngStream::new(54, k));
            right.push((&u2 * &f).trace().re);
        }
        assert!(ks2_test_1pct(&mut left, &mut right));
    }

    #[test]
    fn orthogonal_real_and_orthogonal() {
        let u = haar_orthogonal(5, &mut RngStream::new(2, 2));
        assert_eq!(u.max_imag(), 0.0);
        assert!(orthogonality_defect(&u) <= 1e-10);
    }

    #[test]
    fn orthogonal_det_sign_split() {
        let draws = 10_000u64;
        let positive = (0..draws)
            .filter(|&k| {
                let u = haar_orthogonal(3, &mut RngStream::new(77, k));
                determinant(&u).unwrap().re > 0.0
            })
            .count();
        let frac = positive as f64 / draws as f64;
        assert!((0.47..=0.53).contains(&frac), "det>0 fraction {frac}");
    }

    #[test]
    fn special_orthogonal_has_unit_det() {
        for k in 0..50u64 {
            let u = haar_special_orthogonal(5, &mut RngStream::new(31, k));
            let det = determinant(&u).unwrap();
            assert!((det - ONE).norm() <= 1e-10);
        }
    }

    #[test]
    fn so2_first_column_angle_uniform() {
        let mut angles: Vec<f64> = (0..10_000)
            .map(|k| {
                let u = haar_special_orthogonal(2, &mut RngStream::new(8, k));
                u[(1, 0)].re.atan2(u[(0, 0)].re)
            })
            .collect();
        let pi = std::f64::consts::PI;
        assert!(ks_test_1pct(&mut angles, |x| (x + pi) / (2.0 * pi)));
    }

    #[test]
    fn hurwitz_is_rotation() {
        for k in 0..50u64 {
            let u = hurwitz_so3(&mut RngStream::new(13, k));
            assert!(orthogonality_defect(&u) <= 1e-10);
            let det = determinant(&u).unwrap();
            assert!((det - ONE).norm() <= 1e-10);
        }
    }

    #[test]
    fn hurwitz_z_image_octants_uniform() {
        let draws = 10_000u64;
        let mut counts = [0usize; 8];
        for k in 0..draws {
            let u = hurwitz_so3(&mut RngStream::new(19, k));
            // Image of e_z is the third column.
            let x = u[(0, 2)].re;
            let y = u[(1, 2)].re;
            let z = u[(2, 2)].re;
            let idx =
                ((x > 0.0) as usize) | (((y > 0.0) as usize) << 1) | (((z > 0.0) as usize) << 2);
            counts[idx] += 1;
        }
        for c in counts {
            let f = c as f64 / draws as f64;
            assert!((f - 0.125).abs() < 0.02, "octant frequency {f}");
        }
    }

    #[test]
    fn hurwitz_matches_qr_so3_in_distribution() {
        // Trace, entry (1,1) and rotation-angle statistics agree between
        // the two constructions; the angle of R in SO(3) satisfies
        // trace = 1 + 2 cos(theta).
        let stats = |u: &DenseMatrix| {
            let tr = u.trace().re;
            (tr, u[(0, 0)].re, ((tr - 1.0) / 2.0).clamp(-1.0, 1.0).acos())
        };
        let hsamples: Vec<_> = (0..10_000)
            .map(|k| stats(&hurwitz_so3(&mut RngStream::new(41, k))))
            .collect();
        let qsamples: Vec<_> = (0..10_000)
            .map(|k| stats(&haar_special_orthogonal(3, &mut RngStream::new(43, k))))
            .collect();
        for pick in [0usize, 1, 2] {
            let get = |t: &(f64, f64, f64)| match pick {
                0 => t.0,
                1 => t.1,
                _ => t.2,
            };
            let mut a: Vec<f64> = hsamples.iter().map(&get).collect();
            let mut b: Vec<f64> = qsamples.iter().map(&get).collect();
            assert!(ks2_test_1pct(&mut a, &mut b), "statistic {pick}");
        }
    }

    #[test]
    fn bordered_skew_structure() {
        let s = skew_hermitian_bordered(4, &mut RngStream::new(3, 3)).unwrap();
        // Exact skew-Hermitian symmetry.
        let sum = &s + &s.adjoint();
        assert_eq!(sum.max_abs(), 0.0);
        // Interior entries are identically zero.
        for (i, j) in [(1, 2), (1, 3), (2, 3)] {
            assert_eq!(s[(i, j)].norm(), 0.0);
        }
        assert!(skew_hermitian_bordered(1, &mut RngStream::new(3, 3)).is_err());
    }

    #[test]
    fn bordered_skew_hs_moment() {
        // E ||S||_HS^2 = E[s^2 + 2|Z|^2] = 1 + 2(n-1) = 7 at n = 4.
        let draws = 10_000u64;
        let mean: f64 = (0..draws)
            .map(|k| {
                let s = skew_hermitian_bordered(4, &mut RngStream::new(29, k)).unwrap();
                let h = s.hs_norm();
                h * h
            })
            .sum::<f64>()
            / draws as f64;
        assert!((mean - 7.0).abs() < 0.35, "mean {mean}");
    }

    #[test]
    fn skew_symmetric_structure_and_odd_singularity() {
        let s = gaussian_skew_symmetric(3, &mut RngStream::new(23, 1)).unwrap();
        assert_eq!((&s + &s.transpose()).max_abs(), 0.0);
        for i in 0..3 {
            assert_eq!(s[(i, i)].norm(), 0.0);
        }
        assert!(determinant(&s).unwrap().norm() < 1e-10);
    }

    #[test]
    fn skew_symmetric_norm_bound_frequency() {
        let n = 20;
        let draws = 1000u64;
        let bound = 4.0 * (n as f64).sqrt();
        let ok = (0..draws)
            .filter(|&k| {
                let s = gaussian_skew_symmetric(n, &mut RngStream::new(61, k)).unwrap();
                crate::svd::operator_norm(&s).unwrap() <= bound
            })
            .count();
        assert!(ok as f64 / draws as f64 >= 0.99);
    }

    #[test]
    fn skew_hermitian_dense_symmetry() {
        let s = gaussian_skew_hermitian(5, &mut RngStream::new(10, 10)).unwrap();
        assert_eq!((&s + &s.adjoint()).max_abs(), 0.0);
    }
}
