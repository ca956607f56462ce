//! Deterministic and statistical verifiers for the matrix-analysis
//! inequalities that drive the perturbation bounds: polar corrections of
//! near-identity perturbations, null-covector quadratic forms, Schur
//! complement invertibility transfer, Gaussian small-ball frequencies,
//! trigonometric determinant identities, Remez-type inequalities, and
//! low-dimensional tail bounds.

mod breaking_orthogonality;
mod determinant_scan;
mod gaussian_perturbation;
mod identity_perturbation;
mod low_dim;
mod minors;
mod quadratic_form;
mod remez;

pub use breaking_orthogonality::verify_breaking_orthogonality;
pub use determinant_scan::{
    det_trig_coefficients, trig_identity_residual, vanishing_determinant_scan,
};
pub use gaussian_perturbation::{verify_gaussian_perturbation, FSpec};
pub use identity_perturbation::{
    verify_identity_perturbation, verify_zero_perturbation, PerturbationField,
};
pub use low_dim::low_dim_theorem_check;
pub use minors::{
    poorly_invertible_instance, poorly_invertible_suite, small_ball_frequency,
    verify_poorly_invertible_minor, verify_well_invertible_minor, well_invertible_suite,
};
pub use quadratic_form::{
    null_covector, quadratic_form_both_sides, quadratic_form_suite, verify_quadratic_form,
};
pub use remez::{
    remez_convex_check, remez_sphere_check, remez_torus_check, Polynomial, REMEZ_C1_DEFAULT,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Outcome of one verification run. `max_slack` is the worst signed margin
/// by which the asserted inequality held (negative on a violation).
#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub lemma_id: String,
    pub instances: u64,
    pub skipped: u64,
    pub violations: u64,
    pub max_slack: f64,
    pub worst_case: Option<String>,
}

impl LemmaReport {
    pub fn new(lemma_id: &str) -> Self {
        Self {
            lemma_id: lemma_id.to_string(),
            instances: 0,
            skipped: 0,
            violations: 0,
            max_slack: f64::INFINITY,
            worst_case: None,
        }
    }

    /// Record one checked instance with its signed slack (>= 0 means the
    /// inequality held).
    pub fn record(&mut self, slack: f64, describe: impl FnOnce() -> String) {
        self.instances += 1;
        if slack < self.max_slack {
            self.max_slack = slack;
            self.worst_case = Some(describe());
        }
        if slack < 0.0 {
            self.violations += 1;
        }
    }

    /// Instances whose hypotheses failed are skipped, never counted as passes.
    pub fn skip(&mut self) {
        self.skipped += 1;
    }

    pub fn pass(&self) -> bool {
        self.violations == 0
    }

    /// Merge per-instance reports produced by parallel workers.
    pub fn merge(mut self, other: LemmaReport) -> LemmaReport {
        debug_assert_eq!(self.lemma_id, other.lemma_id);
        self.instances += other.instances;
        self.skipped += other.skipped;
        self.violations += other.violations;
        if other.max_slack < self.max_slack {
            self.max_slack = other.max_slack;
            self.worst_case = other.worst_case;
        }
        self
    }
}

/// Two-by-two block partition of a square matrix with a k x k leading block.
#[derive(Debug, Clone)]
pub struct BlockMatrix2 {
    pub top_left: DenseMatrix,
    pub top_right: DenseMatrix,
    pub bottom_left: DenseMatrix,
    pub bottom_right: DenseMatrix,
}

impl BlockMatrix2 {
    pub fn new(
        top_left: DenseMatrix,
        top_right: DenseMatrix,
        bottom_left: DenseMatrix,
        bottom_right: DenseMatrix,
    ) -> Result<Self> {
        let k = top_left.rows();
        let m = bottom_right.rows();
        let ok = top_left.cols() == k
            && top_right.rows() == k
            && top_right.cols() == m
            && bottom_left.rows() == m
            && bottom_left.cols() == k
            && bottom_right.cols() == m;
        if !ok {
            return Err(Error::DimensionMismatch(format!(
                "inconsistent blocks: {}x{}, {}x{}, {}x{}, {}x{}",
                top_left.rows(),
                top_left.cols(),
                top_right.rows(),
                top_right.cols(),
                bottom_left.rows(),
                bottom_left.cols(),
                bottom_right.rows(),
                bottom_right.cols()
            )));
        }
        Ok(Self {
            top_left,
            top_right,
            bottom_left,
            bottom_right,
        })
    }

    pub fn split(a: &DenseMatrix, k: usize) -> Result<Self> {
        if !a.is_square() || k == 0 || k >= a.rows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot split {}x{} at k = {k}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        Ok(Self {
            top_left: a.block(0, k, 0, k),
            top_right: a.block(0, k, k, n),
            bottom_left: a.block(k, n, 0, k),
            bottom_right: a.block(k, n, k, n),
        })
    }

    pub fn k(&self) -> usize {
        self.top_left.rows()
    }

    pub fn dim(&self) -> usize {
        self.top_left.rows() + self.bottom_right.rows()
    }

    pub fn assemble(&self) -> DenseMatrix {
        let k = self.k();
        let n = self.dim();
        let mut a = DenseMatrix::zeros(n, n);
        a.set_block(0, 0, &self.top_left);
        a.set_block(0, k, &self.top_right);
        a.set_block(k, 0, &self.bottom_left);
        a.set_block(k, k, &self.bottom_right);
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn report_tracks_worst_instance() {
        let mut r = LemmaReport::new("demo");
        r.record(0.5, || "a".into());
        r.record(-0.1, || "b".into());
        r.record(0.2, || "c".into());
        r.skip();
        assert_eq!(r.instances, 3);
        assert_eq!(r.skipped, 1);
        assert_eq!(r.violations, 1);
        assert_eq!(r.max_slack, -0.1);
        assert_eq!(r.worst_case.as_deref(), Some("b"));
        assert!(!r.pass());
    }

    #[test]
    fn report_json_schema() {
        let mut r = LemmaReport::new("demo");
        r.record(0.25, || "x".into());
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(
            text,
            r#"{"lemma_id":"demo","instances":1,"skipped":0,"violations":0,"max_slack":0.25,"worst_case":"x"}"#
        );
    }

    #[test]
    fn block_roundtrip() {
        let a = DenseMatrix::from_fn(5, 5, |i, j| Complex64::new(i as f64, j as f64));
        let b = BlockMatrix2::split(&a, 2).unwrap();
        assert_eq!(b.k(), 2);
        assert_eq!(b.assemble(), a);
        assert!(BlockMatrix2::split(&a, 0).is_err());
        assert!(BlockMatrix2::split(&a, 5).is_err());
    }
}
