//! Experiment dispatch and file emission. Every emitted file starts with a
//! `#` provenance line (tool version, config hash, seed); results are
//! reduced in trial order so the bytes are independent of the thread count.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::Serialize;

use rmtlab::ensembles::haar_so2;
use rmtlab::lemmas::{self, LemmaReport, PerturbationField, REMEZ_C1_DEFAULT};
use rmtlab::lu::determinant;
use rmtlab::matrix::{DenseMatrix, ONE};
use rmtlab::ring::{
    annulus_coverage, check_sr_conditions, estimate_sr3_integral, ring_radii, sample_single_ring,
    EmpiricalMeasure, RingField,
};
use rmtlab::rng::RngStream;
use rmtlab::stats::fmt_f64;
use rmtlab::svd::{operator_norm, smallest_singular_value};
use rmtlab::tail::{counterexample_matrix, fit_tail_exponent, tail_estimate};

use crate::config::{parse_d_spec, parse_t_grid, Experiment, ExperimentConfig, TOOL_VERSION};
use crate::plot::{emit_radial_histogram, emit_tail_plotdata};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub wall_time: f64,
    pub outputs: Vec<PathBuf>,
    pub passed: bool,
}

/// Run the configured experiment; returns the manifest with `passed`
/// reflecting every assertion the experiment makes.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunManifest> {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .context("building worker pool")?;
    let (outputs, passed) = pool.install(|| dispatch(config))?;
    Ok(RunManifest {
        config_hash: config.config_hash(),
        tool_version: TOOL_VERSION.to_string(),
        wall_time: start.elapsed().as_secs_f64(),
        outputs,
        passed,
    })
}

fn dispatch(config: &ExperimentConfig) -> Result<(Vec<PathBuf>, bool)> {
    match &config.experiment {
        Experiment::Tail {
            n,
            d_spec,
            ensemble,
            t_grid_spec,
            trials,
        } => run_tail(config, *n, d_spec, *ensemble, t_grid_spec, *trials),
        Experiment::Lemma {
            name,
            n,
            instances,
            trials,
            samples,
        } => run_lemma(config, name, *n, *instances, *trials, *samples),
        Experiment::SingleRing {
            n,
            d_spec,
            field,
            trials,
            margin,
        } => run_single_ring(config, *n, d_spec, *field, *trials, *margin),
        Experiment::SrCheck {
            n,
            d_spec,
            m_threshold,
            kappa,
            kappa1,
            z_points,
            symmetrize,
            sr3_z,
            delta_exp,
            trials,
        } => run_sr_check(
            config,
            *n,
            d_spec,
            *m_threshold,
            *kappa,
            *kappa1,
            *z_points,
            *symmetrize,
            sr3_z,
            *delta_exp,
            *trials,
        ),
        Experiment::Counterexample { m_param, draws } => {
            run_counterexample(config, *m_param, *draws)
        }
        Experiment::VerifyAll => run_verify_all(config),
    }
}

pub fn write_with_header(path: &Path, header: &str, body: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    writeln!(f, "{header}")?;
    f.write_all(body.as_bytes())?;
    Ok(())
}

fn json_body<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn run_tail(
    config: &ExperimentConfig,
    n: usize,
    d_spec: &str,
    ensemble: rmtlab::Ensemble,
    t_grid_spec: &str,
    trials: u64,
) -> Result<(Vec<PathBuf>, bool)> {
    let d = parse_d_spec(d_spec, n)?.to_dense();
    let grid = parse_t_grid(t_grid_spec)?;
    let rng = RngStream::new(config.seed, 0);
    let est = tail_estimate(&d, ensemble, &grid, trials, &rng)?;

    let mut csv = Vec::new();
    est.write_csv(&mut csv)?;
    let header = config.header_line();
    write_with_header(&config.out_path, &header, std::str::from_utf8(&csv)?)?;
    let mut outputs = vec![config.out_path.clone()];

    let plot_path = with_suffix(&config.out_path, ".plot.dat");
    emit_tail_plotdata(&est, &plot_path, &header)?;
    outputs.push(plot_path);

    match fit_tail_exponent(&est) {
        Ok(fit) => {
            let fit_path = with_suffix(&config.out_path, ".fit.json");
            write_with_header(&fit_path, &header, &json_body(&fit)?)?;
            outputs.push(fit_path);
        }
        Err(e) => eprintln!("exponent fit skipped: {e}"),
    }
    Ok((outputs, true))
}

/// Default parameters per lemma name: (n, instances, trials, samples).
pub fn lemma_defaults(name: &str) -> (usize, u64, u64, u64) {
    match name {
        "identity-perturbation" | "identity-perturbation-real" => (6, 1000, 0, 0),
        "quadratic-form" => (8, 500, 0, 0),
        "well-invertible-minor" => (10, 100, 0, 10_000),
        "poorly-invertible-minor" => (10, 100, 10_000, 100),
        "gaussian-perturbation" => (3, 0, 10_000, 0),
        "breaking-orthogonality" => (2, 0, 10_000, 0),
        "det-trig" => (2, 200, 0, 0),
        "vanishing-determinant" => (2, 200, 0, 0),
        "remez-convex" => (1, 100, 0, 0),
        "remez-sphere" => (1, 100, 0, 0),
        "remez-torus" => (5, 100, 0, 0),
        "low-dim-tail" => (2, 0, 10_000, 0),
        _ => (0, 0, 0, 0),
    }
}

pub const LEMMA_NAMES: &[&str] = &[
    "identity-perturbation",
    "identity-perturbation-real",
    "quadratic-form",
    "well-invertible-minor",
    "poorly-invertible-minor",
    "gaussian-perturbation",
    "breaking-orthogonality",
    "det-trig",
    "vanishing-determinant",
    "remez-convex",
    "remez-sphere",
    "remez-torus",
    "low-dim-tail",
];

/// Run one named verifier with the resolved parameters.
pub fn run_lemma_by_name(
    name: &str,
    n: usize,
    instances: u64,
    trials: u64,
    samples: u64,
    seed: u64,
) -> Result<LemmaReport> {
    let rng = RngStream::new(seed, 0);
    let report = match name {
        "identity-perturbation" => lemmas::verify_identity_perturbation(
            n,
            0.01,
            instances,
            PerturbationField::Complex,
            &rng,
        )?,
        "identity-perturbation-real" => {
            lemmas::verify_identity_perturbation(n, 0.01, instances, PerturbationField::Real, &rng)?
        }
        "quadratic-form" => lemmas::quadratic_form_suite(n, instances, &rng)?,
        "well-invertible-minor" => lemmas::well_invertible_suite(n, instances, samples, &rng)?,
        "poorly-invertible-minor" => {
            let mut report =
                lemmas::poorly_invertible_suite(n, instances, 0.01, 0.1, samples, &rng)?;
            // Companion small-ball frequency check at slack factor 10.
            let mut inst_rng = RngStream::new(seed, 999_001);
            let block = lemmas::poorly_invertible_instance(n, &mut inst_rng);
            let f = rmtlab::svd::svd(&block.bottom_right)?;
            let minv = pseudo_inverse(&f);
            let nu: Vec<Complex64> = (0..n - 1).map(|_| inst_rng.next_complex_normal()).collect();
            let t = 0.01;
            let freq = lemmas::small_ball_frequency(&minv, &nu, 0.1, t, trials, &rng)?;
            let bound = 10.0 * t * (n as f64).sqrt();
            report.record(bound - freq, || {
                format!("small-ball frequency {freq:.4} vs {bound:.4}")
            });
            report
        }
        "gaussian-perturbation" => {
            let mut spec_rng = RngStream::new(seed, 999_002);
            let f = lemmas::FSpec::random(18, 1.0, &mut spec_rng);
            let (report, _) = lemmas::verify_gaussian_perturbation(
                &f,
                &[1e-4, 1e-3, 1e-2, 1e-1],
                trials,
                0.05,
                &rng,
            )?;
            report
        }
        "breaking-orthogonality" => {
            let d = if n == 2 {
                rmtlab::DiagonalMatrix::from_real(&[1.0, 2.0])
            } else {
                rmtlab::DiagonalMatrix::from_real(&[1.0, 2.0, 0.5])
            };
            let (report, _) = lemmas::verify_breaking_orthogonality(
                &DenseMatrix::identity(n),
                &d,
                &[1e-3, 1e-2, 1e-1],
                trials,
                0.05,
                &rng,
            )?;
            report
        }
        "det-trig" => {
            let mut report = LemmaReport::new("det-trig");
            let mut inst_rng = RngStream::new(seed, 0);
            for _ in 0..instances {
                let b = rmtlab::ensembles::gaussian_complex_matrix(2, 2, &mut inst_rng);
                let resid = lemmas::trig_identity_residual(&b, 64)?;
                report.record(1e-10 - resid, || format!("residual {resid:.3e}"));
            }
            report
        }
        "vanishing-determinant" => {
            let mut report = LemmaReport::new("vanishing-determinant");
            let mut inst_rng = RngStream::new(seed, 0);
            for _ in 0..instances {
                let mut b = rmtlab::ensembles::gaussian_complex_matrix(n, n, &mut inst_rng);
                while operator_norm(&b)? < 0.5 {
                    b = rmtlab::ensembles::gaussian_complex_matrix(n, n, &mut inst_rng);
                }
                let grid = if n == 2 { 64 } else { 16 };
                let (sup, defect) = lemmas::vanishing_determinant_scan(&b, grid)?;
                let norm = operator_norm(&b)?;
                report.record(2.0 * sup * norm - defect, || {
                    format!("defect {defect:.3e} vs 2*{sup:.3e}*{norm:.3e}")
                });
            }
            report
        }
        "remez-convex" => lemmas::remez_convex_check(4, n, 1.0, 0.5, instances, &rng)?,
        "remez-sphere" => {
            let (report, c1_needed) =
                lemmas::remez_sphere_check(2, n, 0.5, instances, REMEZ_C1_DEFAULT, &rng)?;
            eprintln!("remez-sphere: smallest sufficient C1 = {c1_needed:.4}");
            report
        }
        "remez-torus" => {
            lemmas::remez_torus_check(2, 0.25, 0.25, instances, REMEZ_C1_DEFAULT, &rng)?
        }
        "low-dim-tail" => {
            let b = DenseMatrix::from_real(2, 2, &[2.0, 0.0, 0.0, 0.1]).unwrap();
            let est = lemmas::low_dim_theorem_check(&b, 0.7, &[1e-4, 1e-3, 1e-2], trials, &rng)?;
            let mut report = LemmaReport::new("low-dim-tail");
            for w in est.p_hat.windows(2) {
                report.record(w[1] - w[0], || "monotonicity break".to_string());
            }
            report.record(0.05 - est.p_hat[0], || {
                format!("p_hat({}) = {}", est.t_grid[0], est.p_hat[0])
            });
            report
        }
        other => bail!("unknown lemma `{other}` (expected one of {LEMMA_NAMES:?})"),
    };
    Ok(report)
}

fn pseudo_inverse(f: &rmtlab::SvdResult) -> DenseMatrix {
    let n = f.singular_values.len();
    let mut sinv = DenseMatrix::zeros(n, n);
    for i in 0..n {
        sinv[(i, i)] = Complex64::new(1.0 / f.singular_values[i], 0.0);
    }
    &(&f.right * &sinv) * &f.left.adjoint()
}

fn run_lemma(
    config: &ExperimentConfig,
    name: &str,
    n: usize,
    instances: u64,
    trials: u64,
    samples: u64,
) -> Result<(Vec<PathBuf>, bool)> {
    let report = run_lemma_by_name(name, n, instances, trials, samples, config.seed)?;
    let pass = report.pass();
    println!(
        "{} {}: instances={} skipped={} violations={} max_slack={:.3e}",
        if pass { "PASS" } else { "FAIL" },
        report.lemma_id,
        report.instances,
        report.skipped,
        report.violations,
        report.max_slack
    );
    write_with_header(
        &config.out_path,
        &config.header_line(),
        &json_body(&report)?,
    )?;
    Ok((vec![config.out_path.clone()], pass))
}

fn run_single_ring(
    config: &ExperimentConfig,
    n: usize,
    d_spec: &str,
    field: RingField,
    trials: u64,
    margin: f64,
) -> Result<(Vec<PathBuf>, bool)> {
    let d = parse_d_spec(d_spec, n)?;
    // Independent stream per trial, reduced in trial order.
    let spectra: Vec<rmtlab::Spectrum> = {
        use rayon::prelude::*;
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut stream = RngStream::new(config.seed, trial);
                sample_single_ring(&d, field, &mut stream).expect("valid diagonal")
            })
            .collect::<Vec<_>>()
    };

    let header = config.header_line();
    let mut csv = String::from("trial,re,im\n");
    for (trial, s) in spectra.iter().enumerate() {
        for ev in &s.eigenvalues {
            csv.push_str(&format!(
                "{},{},{}\n",
                trial,
                fmt_f64(ev.re),
                fmt_f64(ev.im)
            ));
        }
    }
    write_with_header(&config.out_path, &header, &csv)?;
    let mut outputs = vec![config.out_path.clone()];

    let mu = EmpiricalMeasure::new(d.diag.clone())?;
    let (a, b) = ring_radii(&mu)?;
    let pooled = rmtlab::Spectrum {
        eigenvalues: spectra.iter().flat_map(|s| s.eigenvalues.clone()).collect(),
    };
    let coverage = annulus_coverage(&pooled, a, b, margin, None)?;
    let cov_path = with_suffix(&config.out_path, ".annulus.json");
    write_with_header(&cov_path, &header, &json_body(&coverage)?)?;
    outputs.push(cov_path);

    let hist_path = with_suffix(&config.out_path, ".hist.dat");
    emit_radial_histogram(&pooled.moduli(), 64, &hist_path, &header)?;
    outputs.push(hist_path);
    Ok((outputs, true))
}

#[allow(clippy::too_many_arguments)]
fn run_sr_check(
    config: &ExperimentConfig,
    n: usize,
    d_spec: &str,
    m_threshold: f64,
    kappa: f64,
    kappa1: f64,
    z_points: usize,
    symmetrize: bool,
    sr3_z: &[f64],
    delta_exp: f64,
    trials: u64,
) -> Result<(Vec<PathBuf>, bool)> {
    let d = parse_d_spec(d_spec, n)?;
    let floor = (n as f64).powf(-kappa);
    let hi = 1.5 * d.diag.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let z_grid: Vec<Complex64> = (0..z_points)
        .map(|k| Complex64::new(hi * k as f64 / (z_points.max(2) - 1) as f64, floor))
        .collect();
    let mut report = check_sr_conditions(&d, m_threshold, kappa, kappa1, &z_grid, symmetrize)?;

    if !sr3_z.is_empty() && trials > 0 {
        let mut worst = 0.0f64;
        let mut worst_se = 0.0f64;
        for (i, &zr) in sr3_z.iter().enumerate() {
            let rng = RngStream::new(config.seed, 10_000 + i as u64);
            let (est, se) = estimate_sr3_integral(
                &d,
                Complex64::new(zr, 0.0),
                delta_exp,
                RingField::Complex,
                trials,
                &rng,
            )?;
            if est > worst {
                worst = est;
                worst_se = se;
            }
        }
        report.sr3_estimate = Some(worst);
        report.sr3_stderr = Some(worst_se);
        report.sr3_delta = Some(delta_exp);
    }

    let pass = report.sr1_pass && report.sr2_pass;
    println!(
        "{} sr-check: max|d|={:.4} (M={:.4}) max|Im S|={:.4} (kappa1={:.4}) sr3={:?}",
        if pass { "PASS" } else { "FAIL" },
        report.m_bound,
        report.m_threshold,
        report.sr2_max_im,
        report.kappa1,
        report.sr3_estimate
    );
    write_with_header(
        &config.out_path,
        &config.header_line(),
        &json_body(&report)?,
    )?;
    Ok((vec![config.out_path.clone()], pass))
}

#[derive(Debug, Serialize)]
struct CounterexampleReport {
    m_param: f64,
    draws: u64,
    max_det_deviation: f64,
    max_smin: f64,
    bbt_norm: f64,
    det_identity_pass: bool,
    smin_bound_pass: bool,
}

fn run_counterexample(
    config: &ExperimentConfig,
    m_param: f64,
    draws: u64,
) -> Result<(Vec<PathBuf>, bool)> {
    let b = counterexample_matrix(m_param)?;
    let bbt_norm = (&b * &b.transpose()).max_abs();
    let mut max_det_dev = 0.0f64;
    let mut max_smin = 0.0f64;
    // det(B + U) = 1 holds on the rotation coset SO(2); reflections land far
    // from 1 and are well invertible, so the scan runs over SO(2).
    for k in 0..draws {
        let mut rng = RngStream::new(config.seed, k);
        let u = haar_so2(&mut rng);
        let sum = &b + &u;
        max_det_dev = max_det_dev.max((determinant(&sum)? - ONE).norm());
        max_smin = max_smin.max(smallest_singular_value(&sum)?);
    }
    let report = CounterexampleReport {
        m_param,
        draws,
        max_det_deviation: max_det_dev,
        max_smin,
        bbt_norm,
        det_identity_pass: max_det_dev <= 1e-8,
        smin_bound_pass: max_smin <= 10.0 / m_param,
    };
    let pass = report.det_identity_pass && report.smin_bound_pass && bbt_norm == 0.0;
    println!(
        "{} counterexample: max|det-1|={:.3e} max s_min={:.3e} ||BB^T||={:.3e}",
        if pass { "PASS" } else { "FAIL" },
        max_det_dev,
        max_smin,
        bbt_norm
    );
    write_with_header(
        &config.out_path,
        &config.header_line(),
        &json_body(&report)?,
    )?;
    Ok((vec![config.out_path.clone()], pass))
}

fn run_verify_all(config: &ExperimentConfig) -> Result<(Vec<PathBuf>, bool)> {
    let mut all_pass = true;
    let mut reports = Vec::new();
    for name in LEMMA_NAMES {
        let (n, instances, trials, samples) = lemma_defaults(name);
        // Trim the heavier suites so the battery stays interactive.
        let report = run_lemma_by_name(
            name,
            n,
            instances.min(200),
            trials.min(4000),
            samples.min(2000),
            config.seed,
        )?;
        let pass = report.pass();
        all_pass &= pass;
        println!(
            "{} {}: instances={} skipped={} violations={}",
            if pass { "PASS" } else { "FAIL" },
            report.lemma_id,
            report.instances,
            report.skipped,
            report.violations
        );
        reports.push(report);
    }
    write_with_header(
        &config.out_path,
        &config.header_line(),
        &json_body(&reports)?,
    )?;
    Ok((vec![config.out_path.clone()], all_pass))
}
