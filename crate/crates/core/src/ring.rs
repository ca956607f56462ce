//! Single-ring simulations: eigenvalue clouds of U D V with prescribed
//! singular values, annulus radii from the +/-2nd moments of the
//! singular-value measure, Stieltjes transforms and the spectral-condition
//! battery.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::eig::{eigenvalues, Spectrum};
use crate::ensembles::{haar_orthogonal, haar_unitary, DiagonalMatrix};
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Scalar};
use crate::rng::RngStream;
use crate::stats::mean_and_stderr;
use crate::svd::svd;

/// Equal-weight atomic measure on the real line or the complex plane.
#[derive(Debug, Clone)]
pub struct EmpiricalMeasure {
    pub atoms: Vec<Scalar>,
}

impl EmpiricalMeasure {
    pub fn new(atoms: Vec<Scalar>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidArgument("empty measure".into()));
        }
        Ok(Self { atoms })
    }

    pub fn from_real(atoms: &[f64]) -> Result<Self> {
        Self::new(atoms.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.atoms.len() as f64
    }

    /// Measure with every atom scaled by a positive factor.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            atoms: self.atoms.iter().map(|&z| z * alpha).collect(),
        }
    }

    /// Atoms together with their negatives, each at half weight.
    pub fn symmetrized(&self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend(self.atoms.iter().map(|&z| -z));
        Self { atoms }
    }
}

/// Which field the rotations U, V are drawn over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RingField {
    Complex,
    Real,
}

impl std::str::FromStr for RingField {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex" => Ok(RingField::Complex),
            "real" => Ok(RingField::Real),
            other => Err(Error::InvalidArgument(format!(
                "unknown field `{other}` (expected complex | real)"
            ))),
        }
    }
}

/// Eigenvalues of U D V with independent Haar rotations and non-negative
/// prescribed singular values D.
pub fn sample_single_ring(
    d: &DiagonalMatrix,
    field: RingField,
    rng: &mut RngStream,
) -> Result<Spectrum> {
    for &z in &d.diag {
        if z.im != 0.0 || z.re < 0.0 {
            return Err(Error::InvalidArgument(
                "singular-value diagonal must be non-negative real".into(),
            ));
        }
    }
    let n = d.len();
    let (u, v) = match field {
        RingField::Complex => (haar_unitary(n, rng), haar_unitary(n, rng)),
        RingField::Real => (haar_orthogonal(n, rng), haar_orthogonal(n, rng)),
    };
    let a = &(&u * &d.to_dense()) * &v;
    eigenvalues(&a)
}

/// Inner and outer annulus radii from the -2nd and +2nd moments:
/// a = (mean x^{-2})^{-1/2}, b = (mean x^2)^{1/2}; a = 0 when the measure
/// has an atom at zero.
pub fn ring_radii(mu_s: &EmpiricalMeasure) -> Result<(f64, f64)> {
    if mu_s.is_empty() {
        return Err(Error::InvalidArgument("empty measure".into()));
    }
    let mut inv_sq = 0.0f64;
    let mut sq = 0.0f64;
    let mut diverges = false;
    for &z in &mu_s.atoms {
        let x = z.re;
        if z.im != 0.0 || x < 0.0 {
            return Err(Error::InvalidArgument(
                "radii need a measure on the non-negative reals".into(),
            ));
        }
        if x == 0.0 {
            diverges = true;
        } else {
            inv_sq += 1.0 / (x * x);
        }
        sq += x * x;
    }
    let n = mu_s.len() as f64;
    let a = if diverges {
        0.0
    } else {
        (inv_sq / n).powf(-0.5)
    };
    let b = (sq / n).sqrt();
    Ok((a, b))
}

/// Classification of eigenvalue moduli against an annulus with margin, plus
/// the occupancy of a gap interval strictly inside (a, b).
#[derive(Debug, Clone, Serialize)]
pub struct AnnulusReport {
    pub a: f64,
    pub b: f64,
    pub margin: f64,
    pub fraction_inside: f64,
    pub fraction_below_inner: f64,
    pub fraction_above_outer: f64,
    pub gap_occupancy: f64,
}

/// Classify each eigenvalue modulus into [a - margin, b + margin], below or
/// above; `gap` defaults to the middle third of (a, b) and counts the
/// eigenvalues landing where the singular-value measure has no support.
pub fn annulus_coverage(
    spectrum: &Spectrum,
    a: f64,
    b: f64,
    margin: f64,
    gap: Option<(f64, f64)>,
) -> Result<AnnulusReport> {
    if a > b || margin < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "need a <= b and margin >= 0, got a={a}, b={b}, margin={margin}"
        )));
    }
    if spectrum.eigenvalues.is_empty() {
        return Err(Error::InvalidArgument("empty spectrum".into()));
    }
    let (gap_lo, gap_hi) = gap.unwrap_or_else(|| {
        let third = (b - a) / 3.0;
        (a + third, b - third)
    });
    let n = spectrum.eigenvalues.len() as f64;
    let mut below = 0u64;
    let mut above = 0u64;
    let mut inside = 0u64;
    let mut in_gap = 0u64;
    for m in spectrum.moduli() {
        if m < a - margin {
            below += 1;
        } else if m > b + margin {
            above += 1;
        } else {
            inside += 1;
        }
        if m >= gap_lo && m <= gap_hi {
            in_gap += 1;
        }
    }
    Ok(AnnulusReport {
        a,
        b,
        margin,
        fraction_inside: inside as f64 / n,
        fraction_below_inner: below as f64 / n,
        fraction_above_outer: above as f64 / n,
        gap_occupancy: in_gap as f64 / n,
    })
}

/// Stieltjes transform of an atomic measure on the real line:
/// S(z) = mean of 1/(z - x).
pub fn stieltjes_transform(mu: &EmpiricalMeasure, z: Scalar) -> Result<Scalar> {
    if mu.is_empty() {
        return Err(Error::InvalidArgument("empty measure".into()));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for &x in &mu.atoms {
        let d = z - x;
        if d.norm() <= 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "evaluation point {z} collides with an atom at {x}"
            )));
        }
        sum += d.inv();
    }
    Ok(sum / mu.len() as f64)
}

/// Report of the spectral conditions: the norm bound, the Stieltjes
/// imaginary-part bound on a grid above the real axis, and the optional
/// shifted-smallest-singular-value integral estimate.
#[derive(Debug, Clone, Serialize)]
pub struct SRConditionReport {
    /// Observed max_i d_i, the operator norm of D.
    pub m_bound: f64,
    /// Threshold M against which SR1 is judged.
    pub m_threshold: f64,
    pub sr1_pass: bool,
    pub kappa: f64,
    pub kappa1: f64,
    pub sr2_max_im: f64,
    pub sr2_pass: bool,
    pub sr3_estimate: Option<f64>,
    pub sr3_stderr: Option<f64>,
    pub sr3_delta: Option<f64>,
}

/// Evaluate the norm condition and the Stieltjes bound for the
/// singular-value measure of D. With `symmetrize` the transform is taken on
/// the sign-symmetrized measure instead of the plain one.
pub fn check_sr_conditions(
    d: &DiagonalMatrix,
    m_threshold: f64,
    kappa: f64,
    kappa1: f64,
    z_grid: &[Scalar],
    symmetrize: bool,
) -> Result<SRConditionReport> {
    if z_grid.is_empty() {
        return Err(Error::InvalidArgument("empty z grid".into()));
    }
    let n = d.len() as f64;
    let floor = n.powf(-kappa);
    for &z in z_grid {
        // Grid points sit on or above the n^{-kappa} line.
        if z.im < floor {
            return Err(Error::InvalidArgument(format!(
                "grid point {z} has Im z < n^-kappa = {floor:.3e}"
            )));
        }
    }
    let m_bound = d.diag.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut mu = EmpiricalMeasure::new(
        d.diag
            .iter()
            .map(|z| Complex64::new(z.norm(), 0.0))
            .collect(),
    )?;
    if symmetrize {
        mu = mu.symmetrized();
    }
    let mut sr2_max_im = 0.0f64;
    for &z in z_grid {
        let s = stieltjes_transform(&mu, z)?;
        sr2_max_im = sr2_max_im.max(s.im.abs());
    }
    Ok(SRConditionReport {
        m_bound,
        m_threshold,
        sr1_pass: m_bound <= m_threshold,
        kappa,
        kappa1,
        sr2_max_im,
        sr2_pass: sr2_max_im <= kappa1,
        sr3_estimate: None,
        sr3_stderr: None,
        sr3_delta: None,
    })
}

/// Monte Carlo estimate of E[ 1_{sigma_n(z) < n^{-delta}} log^2 sigma_n(z) ]
/// with sigma_n(z) = s_min(U D V - z I), together with its standard error.
pub fn estimate_sr3_integral(
    d: &DiagonalMatrix,
    z: Scalar,
    delta_exp: f64,
    field: RingField,
    trials: u64,
    rng: &RngStream,
) -> Result<(f64, f64)> {
    if trials < 1 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let n = d.len();
    let threshold = (n as f64).powf(-delta_exp);
    let d_dense = d.to_dense();
    let zi = {
        let mut m = DenseMatrix::identity(n);
        for i in 0..n {
            m[(i, i)] = z;
        }
        m
    };
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut stream = rng.substream(trial);
            let (u, v) = match field {
                RingField::Complex => (haar_unitary(n, &mut stream), haar_unitary(n, &mut stream)),
                RingField::Real => (
                    haar_orthogonal(n, &mut stream),
                    haar_orthogonal(n, &mut stream),
                ),
            };
            let a = &(&(&u * &d_dense) * &v) - &zi;
            let sigma = svd(&a).expect("finite").smallest();
            if sigma < threshold && sigma > 0.0 {
                let l = sigma.ln();
                l * l
            } else {
                0.0
            }
        })
        .collect();
    Ok(mean_and_stderr(&samples))
}

/// Atoms {+s_k, -s_k} of the shifted matrix A - z I, 2n in total.
pub fn symmetrized_singular_measure(a: &DenseMatrix, z: Scalar) -> Result<EmpiricalMeasure> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] -= z;
    }
    let f = svd(&shifted)?;
    let mut atoms: Vec<Scalar> = Vec::with_capacity(2 * n);
    for &s in &f.singular_values {
        atoms.push(Complex64::new(s, 0.0));
        atoms.push(Complex64::new(-s, 0.0));
    }
    EmpiricalMeasure::new(atoms)
}

/// Equispaced grid on [lo, hi] as a diagonal, the deterministic stand-in
/// for a uniform singular-value law.
pub fn uniform_grid_diagonal(n: usize, lo: f64, hi: f64) -> DiagonalMatrix {
    if n == 1 {
        return DiagonalMatrix::from_real(&[lo]);
    }
    let step = (hi - lo) / (n - 1) as f64;
    DiagonalMatrix::from_real(&(0..n).map(|i| lo + step * i as f64).collect::<Vec<f64>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{I, ONE};

    #[test]
    fn haar_case_lives_on_unit_circle() {
        let d = DiagonalMatrix::from_real(&[1.0; 24]);
        let s = sample_single_ring(&d, RingField::Complex, &mut RngStream::new(900, 0)).unwrap();
        for m in s.moduli() {
            assert!((m - 1.0).abs() <= 1e-8, "modulus {m}");
        }
    }

    #[test]
    fn zero_singular_value_forces_zero_eigenvalue() {
        let mut vals = vec![0.0f64; 16];
        for (i, v) in vals.iter_mut().enumerate() {
            *v = 1.0 + i as f64 / 15.0;
        }
        vals[15] = 0.0;
        let d = DiagonalMatrix::from_real(&vals);
        let s = sample_single_ring(&d, RingField::Complex, &mut RngStream::new(901, 0)).unwrap();
        let min_mod = s.moduli().into_iter().fold(f64::INFINITY, f64::min);
        assert!(min_mod <= 1e-8, "smallest modulus {min_mod}");
    }

    #[test]
    fn negative_diagonal_rejected() {
        let d = DiagonalMatrix::from_real(&[1.0, -2.0]);
        assert!(sample_single_ring(&d, RingField::Complex, &mut RngStream::new(0, 0)).is_err());
        let dc = DiagonalMatrix::new(vec![ONE, I]);
        assert!(sample_single_ring(&dc, RingField::Complex, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn radii_point_mass() {
        let mu = EmpiricalMeasure::from_real(&[1.0]).unwrap();
        let (a, b) = ring_radii(&mu).unwrap();
        assert_eq!((a, b), (1.0, 1.0));
    }

    #[test]
    fn radii_uniform_grid() {
        // 1000 equispaced atoms on [1, 2]: a -> sqrt(2), b -> sqrt(7/3).
        let d = uniform_grid_diagonal(1000, 1.0, 2.0);
        let mu = EmpiricalMeasure::new(d.diag).unwrap();
        let (a, b) = ring_radii(&mu).unwrap();
        assert!((a - 2f64.sqrt()).abs() < 1e-3, "a = {a}");
        assert!((b - (7f64 / 3.0).sqrt()).abs() < 1e-3, "b = {b}");
    }

    #[test]
    fn radii_two_atoms() {
        // atoms {1, 2}: a = sqrt(8/5), b = sqrt(5/2).
        let mu = EmpiricalMeasure::from_real(&[1.0, 2.0]).unwrap();
        let (a, b) = ring_radii(&mu).unwrap();
        assert!((a - (8f64 / 5.0).sqrt()).abs() < 1e-12);
        assert!((b - (5f64 / 2.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn radii_zero_atom_collapses_inner_radius() {
        let mu = EmpiricalMeasure::from_real(&[0.0, 1.0, 2.0]).unwrap();
        let (a, _) = ring_radii(&mu).unwrap();
        assert_eq!(a, 0.0);
    }

    #[test]
    fn radii_scaling_is_exact() {
        let mu = EmpiricalMeasure::from_real(&[0.5, 1.0, 4.0]).unwrap();
        let (a, b) = ring_radii(&mu).unwrap();
        let (a2, b2) = ring_radii(&mu.scaled(2.0)).unwrap();
        assert_eq!(a2, 2.0 * a);
        assert_eq!(b2, 2.0 * b);
    }

    #[test]
    fn coverage_classification() {
        let spec = Spectrum {
            eigenvalues: vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(-1.0, 0.0),
            ],
        };
        let r = annulus_coverage(&spec, 1.0, 1.0, 0.1, None).unwrap();
        assert_eq!(r.fraction_inside, 1.0);
        let sum = r.fraction_inside + r.fraction_below_inner + r.fraction_above_outer;
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stieltjes_point_mass_values() {
        let mu = EmpiricalMeasure::from_real(&[0.0]).unwrap();
        let s = stieltjes_transform(&mu, I).unwrap();
        assert!((s - (-I)).norm() < 1e-15);
        let z = Complex64::new(0.3, 0.7);
        let s2 = stieltjes_transform(&mu, z).unwrap();
        assert!((s2 - z.inv()).norm() < 1e-15);
    }

    #[test]
    fn stieltjes_two_atoms() {
        let mu = EmpiricalMeasure::from_real(&[1.0, 2.0]).unwrap();
        let s = stieltjes_transform(&mu, Complex64::new(3.0, 0.0)).unwrap();
        assert!((s - Complex64::new(0.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn stieltjes_sign_convention_and_collision() {
        let mu = EmpiricalMeasure::from_real(&[0.2, 0.4, 1.5]).unwrap();
        let s = stieltjes_transform(&mu, Complex64::new(0.3, 0.5)).unwrap();
        assert!(s.im <= 0.0);
        assert!(stieltjes_transform(&mu, Complex64::new(0.2, 0.0)).is_err());
    }

    #[test]
    fn symmetrized_transform_is_imaginary_on_the_axis() {
        let mu = EmpiricalMeasure::from_real(&[0.5, 1.0, 2.0])
            .unwrap()
            .symmetrized();
        let s = stieltjes_transform(&mu, Complex64::new(0.0, 0.8)).unwrap();
        assert!(s.re.abs() < 1e-14);
    }

    #[test]
    fn sr_conditions_concentrated_vs_spread() {
        // All atoms at 1 with z = 1 + i/10: |Im S| = 10 > kappa1 = 2.
        let ones = DiagonalMatrix::from_real(&vec![1.0; 100]);
        let z = Complex64::new(1.0, 0.1);
        let r = check_sr_conditions(&ones, 2.5, 0.5, 2.0, &[z], false).unwrap();
        assert!((r.sr2_max_im - 10.0).abs() < 1e-9);
        assert!(!r.sr2_pass);

        // A spread-out diagonal passes with a generous kappa1.
        let d = uniform_grid_diagonal(100, 1.0, 2.0);
        let grid: Vec<Scalar> = (0..100)
            .map(|k| Complex64::new(3.0 * k as f64 / 99.0, 0.1))
            .collect();
        let r2 = check_sr_conditions(&d, 2.5, 0.5, 10.0, &grid, false).unwrap();
        assert!(r2.sr1_pass);
        assert!(r2.sr2_pass, "max im {}", r2.sr2_max_im);
    }

    #[test]
    fn sr_grid_below_floor_rejected() {
        let d = uniform_grid_diagonal(100, 1.0, 2.0);
        let z = Complex64::new(1.0, 0.01); // below 100^{-0.5} = 0.1
        assert!(check_sr_conditions(&d, 2.5, 0.5, 2.0, &[z], false).is_err());
    }

    #[test]
    fn sr3_indicator_never_fires_for_well_separated_shift() {
        let d = DiagonalMatrix::from_real(&[3.0; 8]);
        let (est, se) = estimate_sr3_integral(
            &d,
            Complex64::new(0.0, 0.0),
            0.2,
            RingField::Complex,
            50,
            &RngStream::new(902, 0),
        )
        .unwrap();
        assert_eq!(est, 0.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn sr3_monotone_in_delta() {
        let d = uniform_grid_diagonal(16, 0.0, 2.0);
        let z = Complex64::new(1.0, 0.0);
        let rng = RngStream::new(903, 0);
        let (e_small, _) =
            estimate_sr3_integral(&d, z, 0.1, RingField::Complex, 200, &rng).unwrap();
        let (e_large, _) =
            estimate_sr3_integral(&d, z, 0.8, RingField::Complex, 200, &rng).unwrap();
        // Larger delta shrinks the indicator threshold n^{-delta}.
        assert!(e_large <= e_small + 1e-12);
    }

    #[test]
    fn symmetrized_measure_atoms() {
        let a = DenseMatrix::identity(3);
        let mu = symmetrized_singular_measure(&a, Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(mu.len(), 6);
        let plus = mu
            .atoms
            .iter()
            .filter(|z| (z.re - 1.0).abs() < 1e-12)
            .count();
        let minus = mu
            .atoms
            .iter()
            .filter(|z| (z.re + 1.0).abs() < 1e-12)
            .count();
        assert_eq!((plus, minus), (3, 3));

        let zero =
            symmetrized_singular_measure(&DenseMatrix::zeros(2, 2), Complex64::new(0.0, 0.0))
                .unwrap();
        assert!(zero.atoms.iter().all(|z| z.norm() == 0.0));
        assert_eq!(zero.len(), 4);
    }

    #[test]
    fn shift_identity_between_scaled_problems() {
        // s_min(U D V - z I) = |z| s_min((1/z) D - U^* V^*) for the same
        // draws, z nonzero.
        let mut rng = RngStream::new(904, 0);
        let d = uniform_grid_diagonal(8, 1.0, 2.0);
        let u = haar_unitary(8, &mut rng);
        let v = haar_unitary(8, &mut rng);
        let z = Complex64::new(0.7, -0.3);
        let a = &(&u * &d.to_dense()) * &v;
        let mut shifted = a.clone();
        for i in 0..8 {
            shifted[(i, i)] -= z;
        }
        let lhs = svd(&shifted).unwrap().smallest();

        let winv = &u.adjoint() * &v.adjoint();
        let mut rhs_mat = d.to_dense().scale(z.inv());
        rhs_mat = &rhs_mat - &winv;
        let rhs = z.norm() * svd(&rhs_mat).unwrap().smallest();
        assert!((lhs - rhs).abs() <= 1e-8 * lhs.max(1.0), "{lhs} vs {rhs}");
    }
}
