//! Statistical helpers shared by the Monte Carlo suites: Wilson score
//! intervals, Kolmogorov-Smirnov tests and least-squares exponent fits.

/// Round-trip-exact float emission: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Normal quantile for two-sided 95% coverage.
pub const Z_95: f64 = 1.959963984540054;
/// Normal quantile for two-sided 99% coverage.
pub const Z_99: f64 = 2.5758293035489004;

/// Asymptotic one-sample KS critical coefficient at the 1% level:
/// reject when D * sqrt(n) exceeds this.
pub const KS_COEFF_1PCT: f64 = 1.6276236115189503; // sqrt(-ln(0.005) / 2)

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Wilson score interval for a binomial proportion. The bounds are exactly
/// 0 (resp. 1) at the empty (resp. full) count, where the algebra cancels.
pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0);
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * ((p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt());
    let lo = if hits == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if hits == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// One-sample KS statistic of `samples` against the CDF `f`.
pub fn ks_statistic(samples: &mut [f64], f: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let cdf = f(x);
        let hi = (i as f64 + 1.0) / n - cdf;
        let lo = cdf - i as f64 / n;
        d = d.max(hi.max(lo));
    }
    d
}

/// One-sample KS test at the 1% level; true means "consistent with f".
pub fn ks_test_1pct(samples: &mut [f64], f: impl Fn(f64) -> f64) -> bool {
    let n = samples.len() as f64;
    ks_statistic(samples, f) * n.sqrt() <= KS_COEFF_1PCT
}

/// Two-sample KS statistic.
pub fn ks2_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (a.len(), b.len());
    let mut i = 0;
    let mut j = 0;
    let mut d = 0.0f64;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        let fa = i as f64 / n as f64;
        let fb = j as f64 / m as f64;
        d = d.max((fa - fb).abs());
    }
    d
}

/// Two-sample KS test at the 1% level; true means "same distribution".
pub fn ks2_test_1pct(a: &mut [f64], b: &mut [f64]) -> bool {
    let n = a.len() as f64;
    let m = b.len() as f64;
    let crit = KS_COEFF_1PCT * ((n + m) / (n * m)).sqrt();
    ks2_statistic(a, b) <= crit
}

/// Ordinary least squares y = slope * x + intercept, with R^2.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 {
        (sxy * sxy) / (sxx * syy)
    } else {
        1.0
    };
    (slope, intercept, r2)
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples
        .iter()
        .map(|&x| (x - mean) * (x - mean))
        .sum::<f64>()
        / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn normal_cdf_symmetry() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.0) + normal_cdf(-1.0) - 1.0).abs() < 1e-15);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-9);
    }

    #[test]
    fn wilson_contains_p_hat() {
        let (lo, hi) = wilson_interval(500, 1000, Z_95);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!(hi - lo < 0.07);
        let (lo0, _) = wilson_interval(0, 100, Z_95);
        assert_eq!(lo0, 0.0);
        let (_, hi1) = wilson_interval(100, 100, Z_95);
        assert_eq!(hi1, 1.0);
    }

    #[test]
    fn ks_accepts_matching_distribution() {
        let mut rng = RngStream::new(2024, 0);
        let mut xs: Vec<f64> = (0..10_000).map(|_| rng.next_normal()).collect();
        assert!(ks_test_1pct(&mut xs, normal_cdf));
    }

    #[test]
    fn ks_rejects_wrong_distribution() {
        let mut rng = RngStream::new(2024, 1);
        let mut xs: Vec<f64> = (0..10_000).map(|_| rng.next_normal() + 0.2).collect();
        assert!(!ks_test_1pct(&mut xs, normal_cdf));
    }

    #[test]
    fn two_sample_ks_same_and_shifted() {
        let mut rng = RngStream::new(9, 0);
        let mut a: Vec<f64> = (0..10_000).map(|_| rng.next_normal()).collect();
        let mut b: Vec<f64> = (0..10_000).map(|_| rng.next_normal()).collect();
        assert!(ks2_test_1pct(&mut a, &mut b));
        let mut c: Vec<f64> = (0..10_000).map(|_| rng.next_normal() + 0.15).collect();
        assert!(!ks2_test_1pct(&mut a, &mut c));
    }

    #[test]
    fn exact_power_law_fit() {
        let x: Vec<f64> = [0.1f64, 0.2, 0.4].iter().map(|t| t.ln()).collect();
        let y: Vec<f64> = [0.1f64, 0.2, 0.4].iter().map(|t| t.ln()).collect();
        let (slope, _, r2) = linear_fit(&x, &y);
        assert!((slope - 1.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }
}
