//! Dense complex matrices in row-major storage, the carrier for every
//! matrix-valued object in this crate.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Scalar = Complex64;

pub const ONE: Scalar = Complex64::new(1.0, 0.0);
pub const ZERO: Scalar = Complex64::new(0.0, 0.0);
pub const I: Scalar = Complex64::new(0.0, 1.0);

pub fn is_finite_scalar(z: Scalar) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Bilinear dot product `u^T v` (no conjugation).
pub fn dot_bilinear(u: &[Scalar], v: &[Scalar]) -> Scalar {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Hermitian inner product `u^* v`.
pub fn dot_hermitian(u: &[Scalar], v: &[Scalar]) -> Scalar {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(v: &[Scalar]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from row-major scalar data.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Convenience constructor from real row-major data.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        let d = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_vec(rows, cols, d)
    }

    pub fn diag(entries: &[Scalar]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in entries.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Scalar] {
        &self.data
    }

    /// Verify every entry is finite; the kernels reject NaN/Inf inputs.
    pub fn check_finite(&self) -> Result<()> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !is_finite_scalar(self[(i, j)]) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn row(&self, i: usize) -> Vec<Scalar> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_row(&mut self, i: usize, row: &[Scalar]) {
        assert_eq!(row.len(), self.cols);
        self.data[i * self.cols..(i + 1) * self.cols].copy_from_slice(row);
    }

    pub fn set_col(&mut self, j: usize, col: &[Scalar]) {
        assert_eq!(col.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = col[i];
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn scale(&self, s: Scalar) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn matvec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                dot_bilinear(row, v)
            })
            .collect()
    }

    /// Frobenius (Hilbert-Schmidt) norm.
    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest imaginary magnitude; zero for exactly real matrices.
    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Scalar {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Contiguous block `rows r0..r1, cols c0..c1` (half-open).
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        assert!(r1 <= self.rows && c1 <= self.cols && r0 <= r1 && c0 <= c1);
        Self::from_fn(r1 - r0, c1 - c0, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &DenseMatrix) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols);
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Minor obtained by removing the listed rows and columns.
    pub fn minor(&self, removed: &[usize]) -> Self {
        let keep_r: Vec<usize> = (0..self.rows).filter(|i| !removed.contains(i)).collect();
        let keep_c: Vec<usize> = (0..self.cols).filter(|j| !removed.contains(j)).collect();
        Self::from_fn(keep_r.len(), keep_c.len(), |i, j| {
            self[(keep_r[i], keep_c[j])]
        })
    }

    /// Relative elementwise distance to another matrix, as max |a-b|.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Scalar;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        // k-in-the-middle loop order keeps the inner traversal contiguous.
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let rrow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &r) in orow.iter_mut().zip(rrow) {
                    *o += a * r;
                }
            }
        }
        out
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_multiplication() {
        let a = DenseMatrix::from_fn(3, 3, |i, j| Complex64::new((i + 2 * j) as f64, j as f64));
        let id = DenseMatrix::identity(3);
        assert_eq!(&a * &id, a);
        assert_eq!(&id * &a, a);
    }

    #[test]
    fn adjoint_conjugates_and_transposes() {
        let a = DenseMatrix::from_fn(2, 3, |i, j| Complex64::new(i as f64, j as f64));
        let h = a.adjoint();
        assert_eq!(h.rows(), 3);
        assert_eq!(h[(2, 1)], Complex64::new(1.0, -2.0));
    }

    #[test]
    fn hs_norm_of_identity() {
        assert!((DenseMatrix::identity(3).hs_norm() - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn finite_check_rejects_nan() {
        let mut a = DenseMatrix::identity(2);
        a[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            a.check_finite(),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn minor_removes_rows_and_cols() {
        let a = DenseMatrix::from_fn(4, 4, |i, j| Complex64::new((4 * i + j) as f64, 0.0));
        let m = a.minor(&[0, 2]);
        assert_eq!(m.rows(), 2);
        assert_eq!(m[(0, 0)], Complex64::new(5.0, 0.0));
        assert_eq!(m[(1, 1)], Complex64::new(15.0, 0.0));
    }
}
