//! Polar correction of near-identity perturbations: for skew-Hermitian S
//! and W0 = I + eps S, the unitary polar factor W = U0 V0^* of W0 satisfies
//! ||W - W0|| <= 2 eps^2 ||S^2|| whenever eps^2 ||S^2|| <= 1/4. The same
//! holds over the reals with skew-symmetric S and orthogonal W.

use rayon::prelude::*;

use crate::ensembles::{gaussian_skew_hermitian, gaussian_skew_symmetric, unitarity_defect};
use crate::error::Result;
use crate::lemmas::LemmaReport;
use crate::matrix::DenseMatrix;
use crate::rng::RngStream;
use crate::svd::{operator_norm, svd};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationField {
    Complex,
    Real,
}

/// Check the polar correction bound on random skew draws. Draws violating
/// the hypothesis eps^2 ||S^2|| <= 1/4 are skipped.
pub fn verify_identity_perturbation(
    n: usize,
    epsilon: f64,
    trials: u64,
    field: PerturbationField,
    rng: &RngStream,
) -> Result<LemmaReport> {
    let id = match field {
        PerturbationField::Complex => "identity-perturbation",
        PerturbationField::Real => "identity-perturbation-real",
    };
    let reports: Vec<LemmaReport> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut stream = rng.substream(trial);
            let mut report = LemmaReport::new(id);
            let s = match field {
                PerturbationField::Complex => gaussian_skew_hermitian(n, &mut stream),
                PerturbationField::Real => gaussian_skew_symmetric(n, &mut stream),
            }
            .expect("n >= 2");
            check_instance(&s, epsilon, field, &mut report);
            report
        })
        .collect();
    Ok(reports
        .into_iter()
        .fold(LemmaReport::new(id), LemmaReport::merge))
}

fn check_instance(
    s: &DenseMatrix,
    epsilon: f64,
    field: PerturbationField,
    report: &mut LemmaReport,
) {
    let n = s.rows();
    let s_sq_norm = operator_norm(&(s * s)).expect("finite");
    let hyp = epsilon * epsilon * s_sq_norm;
    if hyp > 0.25 {
        report.skip();
        return;
    }
    let mut w0 = DenseMatrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            w0[(i, j)] += epsilon * s[(i, j)];
        }
    }
    let f = svd(&w0).expect("finite");
    let w = &f.left * &f.right.adjoint();

    // Bound on the polar correction.
    let dist = operator_norm(&(&w - &w0)).expect("finite");
    let bound = 2.0 * hyp;
    report.record(bound - dist, || {
        format!("n={n} ||W-W0||={dist:.3e} bound={bound:.3e}")
    });

    // W must itself be unitary (orthogonal in the real case).
    let defect = unitarity_defect(&w);
    report.record(1e-10 - defect, || {
        format!("n={n} unitarity defect {defect:.3e}")
    });
    if field == PerturbationField::Real {
        let imag = w.max_imag();
        report.record(1e-12 - imag, || {
            format!("n={n} imaginary residue {imag:.3e}")
        });
    }
}

/// Degenerate case: S = 0 gives W = W0 = I with zero slack on both sides.
pub fn verify_zero_perturbation(n: usize) -> LemmaReport {
    let mut report = LemmaReport::new("identity-perturbation");
    let s = DenseMatrix::zeros(n, n);
    check_instance(&s, 0.01, PerturbationField::Complex, &mut report);
    report
}
