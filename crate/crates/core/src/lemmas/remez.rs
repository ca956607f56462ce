//! Remez-type inequalities checked by dense grid evaluation: a polynomial
//! of degree n that is small on a subset of prescribed measure is controlled
//! on the whole body (box, sphere, or S^1 x S^2 torus) by a measure-ratio
//! factor raised to a degree-dependent power.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lemmas::LemmaReport;
use crate::rng::RngStream;

/// Default sphere/torus constant; the checker also reports the smallest
/// value that would have sufficed.
pub const REMEZ_C1_DEFAULT: f64 = 4.0 * std::f64::consts::PI;

/// Real polynomial in `vars` variables of total degree <= `degree`, stored
/// as (exponent tuple, coefficient) pairs.
#[derive(Debug, Clone)]
pub struct Polynomial {
    pub vars: usize,
    pub degree: usize,
    terms: Vec<(Vec<usize>, f64)>,
}

impl Polynomial {
    pub fn random(vars: usize, degree: usize, rng: &mut RngStream) -> Self {
        let mut terms = Vec::new();
        let mut expo = vec![0usize; vars];
        collect_monomials(vars, degree, 0, &mut expo, &mut terms, rng);
        Self {
            vars,
            degree,
            terms,
        }
    }

    pub fn constant(vars: usize, value: f64) -> Self {
        Self {
            vars,
            degree: 0,
            terms: vec![(vec![0; vars], value)],
        }
    }

    /// Chebyshev polynomial T_k in one variable.
    pub fn chebyshev(k: usize) -> Self {
        // Recurrence on coefficient vectors: T_0 = 1, T_1 = x,
        // T_{k+1} = 2x T_k - T_{k-1}.
        let mut t0 = vec![1.0f64];
        let mut t1 = vec![0.0, 1.0];
        if k == 0 {
            return Self::from_univariate(&t0);
        }
        for _ in 1..k {
            let mut next = vec![0.0; t1.len() + 1];
            for (i, &c) in t1.iter().enumerate() {
                next[i + 1] += 2.0 * c;
            }
            for (i, &c) in t0.iter().enumerate() {
                next[i] -= c;
            }
            t0 = std::mem::take(&mut t1);
            t1 = next;
        }
        Self::from_univariate(&t1)
    }

    fn from_univariate(coeffs: &[f64]) -> Self {
        Self {
            vars: 1,
            degree: coeffs.len().saturating_sub(1),
            terms: coeffs
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0.0)
                .map(|(e, &c)| (vec![e], c))
                .collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.vars);
        debug_assert!(self.degree <= 8);
        // Power table per coordinate up to the degree.
        let mut pows = vec![[0.0f64; 9]; self.vars];
        for (v, p) in pows.iter_mut().enumerate() {
            p[0] = 1.0;
            for e in 1..=self.degree.min(8) {
                p[e] = p[e - 1] * x[v];
            }
        }
        self.terms
            .iter()
            .map(|(expo, c)| {
                let mut t = *c;
                for (v, &e) in expo.iter().enumerate() {
                    if e > 0 {
                        t *= pows[v][e];
                    }
                }
                t
            })
            .sum()
    }
}

fn collect_monomials(
    vars: usize,
    remaining: usize,
    var: usize,
    expo: &mut Vec<usize>,
    terms: &mut Vec<(Vec<usize>, f64)>,
    rng: &mut RngStream,
) {
    if var == vars {
        terms.push((expo.clone(), rng.next_normal()));
        return;
    }
    for e in 0..=remaining {
        expo[var] = e;
        collect_monomials(vars, remaining - e, var + 1, expo, terms, rng);
    }
    expo[var] = 0;
}

fn sup_on<'a>(points: impl Iterator<Item = &'a Vec<f64>>, poly: &Polynomial) -> f64 {
    points.map(|x| poly.eval(x).abs()).fold(0.0, f64::max)
}

/// Box inequality: sup_V |f| <= (4 m |V| / |E|)^deg sup_E |f| with E a
/// random sub-box of the prescribed volume fraction.
pub fn remez_convex_check(
    poly_degree: usize,
    dim: usize,
    half_width: f64,
    e_fraction: f64,
    trials: u64,
    rng: &RngStream,
) -> Result<LemmaReport> {
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidArgument(format!(
            "dim must be 1 or 2, got {dim}"
        )));
    }
    if poly_degree > 6 {
        return Err(Error::InvalidArgument("degree must be at most 6".into()));
    }
    if !(0.0 < e_fraction && e_fraction <= 1.0) {
        return Err(Error::InvalidArgument(
            "E fraction must be in (0, 1]".into(),
        ));
    }
    let side = 2.0 * half_width;
    let vol_v = side.powi(dim as i32);
    let vol_e = e_fraction * vol_v;
    let factor = (4.0 * dim as f64 * vol_v / vol_e).powi(poly_degree as i32);
    let axis_frac = e_fraction.powf(1.0 / dim as f64);

    let per_axis = if dim == 1 { 2001usize } else { 161 };
    let reports: Vec<LemmaReport> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut stream = rng.substream(k);
            let poly = Polynomial::random(dim, poly_degree, &mut stream);
            // Random placement of the sub-box inside V.
            let offsets: Vec<f64> = (0..dim)
                .map(|_| stream.next_f64() * (1.0 - axis_frac) * side - half_width)
                .collect();
            let v_grid = box_grid(dim, per_axis, |_| (-half_width, half_width));
            let e_grid = box_grid(dim, per_axis, |ax| {
                (offsets[ax], offsets[ax] + axis_frac * side)
            });
            let sup_v = sup_on(v_grid.iter(), &poly);
            let sup_e = sup_on(e_grid.iter(), &poly);
            let mut report = LemmaReport::new("remez-convex");
            report.record(factor * sup_e - sup_v, || {
                format!(
                    "deg={poly_degree} dim={dim} sup_V={sup_v:.3e} factor*sup_E={:.3e}",
                    factor * sup_e
                )
            });
            report
        })
        .collect();
    Ok(reports
        .into_iter()
        .fold(LemmaReport::new("remez-convex"), LemmaReport::merge))
}

fn box_grid(dim: usize, per_axis: usize, bounds: impl Fn(usize) -> (f64, f64)) -> Vec<Vec<f64>> {
    let axis = |ax: usize| -> Vec<f64> {
        let (lo, hi) = bounds(ax);
        (0..per_axis)
            .map(|i| lo + (hi - lo) * i as f64 / (per_axis - 1) as f64)
            .collect()
    };
    match dim {
        1 => axis(0).into_iter().map(|x| vec![x]).collect(),
        2 => {
            let xs = axis(0);
            let ys = axis(1);
            xs.iter()
                .flat_map(|&x| ys.iter().map(move |&y| vec![x, y]))
                .collect()
        }
        _ => unreachable!(),
    }
}

/// Equal-area grid on S^2: midpoints in the polar cosine times equispaced
/// azimuths.
fn sphere_grid(n_u: usize, n_phi: usize) -> Vec<Vec<f64>> {
    let mut pts = Vec::with_capacity(n_u * n_phi);
    for i in 0..n_u {
        let u = -1.0 + 2.0 * (i as f64 + 0.5) / n_u as f64;
        let s = (1.0 - u * u).sqrt();
        for j in 0..n_phi {
            let phi = std::f64::consts::TAU * j as f64 / n_phi as f64;
            pts.push(vec![s * phi.cos(), s * phi.sin(), u]);
        }
    }
    pts
}

fn circle_grid(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / n as f64;
            vec![t.cos(), t.sin()]
        })
        .collect()
}

fn random_unit(dim: usize, rng: &mut RngStream) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.next_normal()).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sphere inequality: sup_{S^m} |f| <= (C1/|E|)^{2 deg} sup_E |f| with E a
/// random cap of the prescribed measure fraction. Returns the report and the
/// largest "smallest sufficient C1" observed across draws.
pub fn remez_sphere_check(
    poly_degree: usize,
    m: usize,
    e_fraction: f64,
    trials: u64,
    c1: f64,
    rng: &RngStream,
) -> Result<(LemmaReport, f64)> {
    if m != 1 && m != 2 {
        return Err(Error::InvalidArgument(format!("m must be 1 or 2, got {m}")));
    }
    if poly_degree > 6 {
        return Err(Error::InvalidArgument("degree must be at most 6".into()));
    }
    if !(0.01..=1.0).contains(&e_fraction) {
        return Err(Error::InvalidArgument(
            "E fraction must lie in [0.01, 1]".into(),
        ));
    }
    let total = if m == 1 {
        std::f64::consts::TAU
    } else {
        2.0 * std::f64::consts::TAU
    };
    let measure_e = e_fraction * total;
    if c1 < measure_e {
        return Err(Error::InvalidArgument(format!(
            "C1 = {c1:.3} below |E| = {measure_e:.3} makes the bound vacuous"
        )));
    }
    let factor = (c1 / measure_e).powi(2 * poly_degree as i32);
    let grid = if m == 1 {
        circle_grid(4096)
    } else {
        sphere_grid(128, 256)
    };
    // Cap membership: x . center >= cos(angular radius); the cap measure is
    // the arc length (m = 1) or 2 pi (1 - cos psi) (m = 2).
    let cos_radius = if m == 1 {
        (measure_e / 2.0).cos()
    } else {
        1.0 - measure_e / std::f64::consts::TAU
    };

    let results: Vec<(LemmaReport, f64)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut stream = rng.substream(k);
            let poly = Polynomial::random(m + 1, poly_degree, &mut stream);
            let center = random_unit(m + 1, &mut stream);
            let sup_s = sup_on(grid.iter(), &poly);
            let sup_e = grid
                .iter()
                .filter(|x| dot(x, &center) >= cos_radius)
                .map(|x| poly.eval(x).abs())
                .fold(0.0, f64::max);
            let mut report = LemmaReport::new("remez-sphere");
            report.record(factor * sup_e - sup_s, || {
                format!(
                    "deg={poly_degree} m={m} sup_S={sup_s:.3e} factor*sup_E={:.3e}",
                    factor * sup_e
                )
            });
            let c1_needed = if sup_e > 0.0 && poly_degree > 0 {
                measure_e * (sup_s / sup_e).powf(1.0 / (2.0 * poly_degree as f64))
            } else {
                measure_e
            };
            (report, c1_needed)
        })
        .collect();
    let mut merged = LemmaReport::new("remez-sphere");
    let mut c1_needed = 0.0f64;
    for (r, c) in results {
        merged = merged.merge(r);
        c1_needed = c1_needed.max(c);
    }
    Ok((merged, c1_needed))
}

/// Torus variant on S^1 x S^2 in R^5 with the product measure and exponent
/// 4 deg: sup_T |f| <= (C1/|E|)^{4 deg} sup_E |f| with E a product of caps.
pub fn remez_torus_check(
    poly_degree: usize,
    e_fraction_circle: f64,
    e_fraction_sphere: f64,
    trials: u64,
    c1: f64,
    rng: &RngStream,
) -> Result<LemmaReport> {
    if poly_degree > 6 {
        return Err(Error::InvalidArgument("degree must be at most 6".into()));
    }
    if !(0.05..=1.0).contains(&e_fraction_circle) || !(0.05..=1.0).contains(&e_fraction_sphere) {
        return Err(Error::InvalidArgument(
            "cap fractions must lie in [0.05, 1]".into(),
        ));
    }
    let measure_circle = e_fraction_circle * std::f64::consts::TAU;
    let measure_sphere = e_fraction_sphere * 2.0 * std::f64::consts::TAU;
    let measure_e = measure_circle * measure_sphere;
    if c1 < measure_e {
        return Err(Error::InvalidArgument(format!(
            "C1 = {c1:.3} below |E| = {measure_e:.3} makes the bound vacuous"
        )));
    }
    let factor = (c1 / measure_e).powi(4 * poly_degree as i32);
    let circle = circle_grid(64);
    let sphere = sphere_grid(32, 64);
    let cos_arc = (measure_circle / 2.0).cos();
    let cos_cap = 1.0 - measure_sphere / std::f64::consts::TAU;

    let reports: Vec<LemmaReport> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut stream = rng.substream(k);
            let poly = Polynomial::random(5, poly_degree, &mut stream);
            let c_center = random_unit(2, &mut stream);
            let s_center = random_unit(3, &mut stream);
            let mut sup_t = 0.0f64;
            let mut sup_e = 0.0f64;
            let mut point = vec![0.0f64; 5];
            for c in &circle {
                let in_arc = dot(c, &c_center) >= cos_arc;
                point[0] = c[0];
                point[1] = c[1];
                for s in &sphere {
                    point[2] = s[0];
                    point[3] = s[1];
                    point[4] = s[2];
                    let v = poly.eval(&point).abs();
                    sup_t = sup_t.max(v);
                    if in_arc && dot(s, &s_center) >= cos_cap {
                        sup_e = sup_e.max(v);
                    }
                }
            }
            let mut report = LemmaReport::new("remez-torus");
            report.record(factor * sup_e - sup_t, || {
                format!(
                    "deg={poly_degree} sup_T={sup_t:.3e} factor*sup_E={:.3e}",
                    factor * sup_e
                )
            });
            report
        })
        .collect();
    Ok(reports
        .into_iter()
        .fold(LemmaReport::new("remez-torus"), LemmaReport::merge))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_polynomial_box() {
        // For a constant the two sups coincide and the factor is >= 1.
        let poly = Polynomial::constant(1, 3.5);
        let grid = box_grid(1, 101, |_| (-1.0, 1.0));
        assert_eq!(sup_on(grid.iter(), &poly), 3.5);
        let r = remez_convex_check(0, 1, 1.0, 0.5, 10, &RngStream::new(700, 0)).unwrap();
        assert!(r.pass());
    }

    #[test]
    fn random_box_polynomials_hold() {
        let r = remez_convex_check(4, 1, 1.0, 0.5, 100, &RngStream::new(701, 0)).unwrap();
        assert_eq!(r.violations, 0, "worst {:?}", r.worst_case);
        let r2 = remez_convex_check(3, 2, 1.0, 0.25, 50, &RngStream::new(702, 0)).unwrap();
        assert_eq!(r2.violations, 0, "worst {:?}", r2.worst_case);
    }

    #[test]
    fn chebyshev_near_extremal_slack() {
        // T_4 on [-1, 1] against E = [-1, 0.9]: measured slack stays
        // nonnegative but the ratio is classical near-extremal.
        let poly = Polynomial::chebyshev(4);
        let v_grid = box_grid(1, 4001, |_| (-1.0, 1.0));
        let e_grid = box_grid(1, 4001, |_| (-1.0, 0.9));
        let sup_v = sup_on(v_grid.iter(), &poly);
        let sup_e = sup_on(e_grid.iter(), &poly);
        let factor = (4.0 * 2.0 / 1.9f64).powi(4);
        assert!((sup_v - 1.0).abs() < 1e-6);
        assert!(factor * sup_e >= sup_v);
    }

    #[test]
    fn chebyshev_recurrence_values() {
        let t4 = Polynomial::chebyshev(4);
        // T_4(x) = 8x^4 - 8x^2 + 1.
        for &x in &[-1.0, -0.3, 0.0, 0.7, 1.0] {
            let x: f64 = x;
            let want = 8.0 * x.powi(4) - 8.0 * x * x + 1.0;
            assert!((t4.eval(&[x]) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_checks_hold() {
        let (r, c1_needed) =
            remez_sphere_check(2, 1, 0.5, 100, REMEZ_C1_DEFAULT, &RngStream::new(703, 0)).unwrap();
        assert_eq!(r.violations, 0, "worst {:?}", r.worst_case);
        assert!(c1_needed <= REMEZ_C1_DEFAULT);
        let (r2, _) =
            remez_sphere_check(3, 2, 0.25, 30, REMEZ_C1_DEFAULT, &RngStream::new(704, 0)).unwrap();
        assert_eq!(r2.violations, 0, "worst {:?}", r2.worst_case);
    }

    #[test]
    fn torus_check_holds() {
        let r = remez_torus_check(2, 0.25, 0.25, 20, REMEZ_C1_DEFAULT, &RngStream::new(705, 0))
            .unwrap();
        assert_eq!(r.violations, 0, "worst {:?}", r.worst_case);
    }

    #[test]
    fn vacuous_configuration_rejected() {
        assert!(
            remez_torus_check(2, 0.9, 0.9, 5, REMEZ_C1_DEFAULT, &RngStream::new(706, 0)).is_err()
        );
    }
}
